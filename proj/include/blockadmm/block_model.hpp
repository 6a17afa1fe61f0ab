#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <span>
#include <variant>
#include <vector>

namespace blockadmm {

using Index = Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Splits N variables into n consecutive blocks of sizes N_1..N_n.
class BlockPartition {
 public:
  BlockPartition() = default;
  explicit BlockPartition(std::vector<Index> block_sizes);

  /// n blocks of identical size.
  static BlockPartition uniform(Index num_blocks, Index block_size);

  Index num_blocks() const { return static_cast<Index>(sizes_.size()); }
  Index total_size() const { return offsets_.empty() ? 0 : offsets_.back(); }
  Index size(Index block) const { return sizes_[static_cast<std::size_t>(block)]; }
  Index offset(Index block) const { return offsets_[static_cast<std::size_t>(block)]; }
  const std::vector<Index>& sizes() const { return sizes_; }

  bool operator==(const BlockPartition&) const = default;

 private:
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;  // n + 1 prefix sums, offsets_[0] = 0
};

/// Ordered, disjoint index sets S_1..S_l covering all blocks of a partition.
class Grouping {
 public:
  Grouping() = default;
  Grouping(BlockPartition partition, std::vector<std::vector<Index>> index_sets);

  const BlockPartition& partition() const { return partition_; }
  Index num_groups() const { return static_cast<Index>(sets_.size()); }
  std::span<const Index> group(Index i) const { return sets_[static_cast<std::size_t>(i)]; }
  const std::vector<std::vector<Index>>& index_sets() const { return sets_; }

  /// Nominal group size p = n / l (integer division; the last group may be larger).
  Index nominal_group_size() const;

  /// Group containing `block`.
  Index group_of(Index block) const { return owner_[static_cast<std::size_t>(block)]; }

  bool operator==(const Grouping& other) const { return sets_ == other.sets_; }

 private:
  BlockPartition partition_;
  std::vector<std::vector<Index>> sets_;
  std::vector<Index> owner_;
};

/// l contiguous groups of p = n / l blocks; when l does not divide n the last
/// group takes the remainder.
Grouping make_contiguous_grouping(const BlockPartition& partition, Index num_groups);

/// One singleton group per block (l = n).
Grouping identity_grouping(const BlockPartition& partition);

/// One column block A_j, stored dense (column-major) or sparse (CSC).
class MatrixBlock {
 public:
  explicit MatrixBlock(MatrixXd dense) : storage_(std::move(dense)) {}
  explicit MatrixBlock(SparseMatrix sparse);

  Index rows() const;
  Index cols() const;
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(storage_); }
  Index nonzeros() const;

  /// out += A_j x.
  void apply_add(const Eigen::Ref<const VectorXd>& x, Eigen::Ref<VectorXd> out) const;
  /// out = A_j^T v.
  void apply_transpose(const Eigen::Ref<const VectorXd>& v, Eigen::Ref<VectorXd> out) const;

  VectorXd apply(const Eigen::Ref<const VectorXd>& x) const;
  VectorXd apply_transpose(const Eigen::Ref<const VectorXd>& v) const;

  MatrixXd to_dense() const;
  const MatrixXd* dense() const { return std::get_if<MatrixXd>(&storage_); }
  const SparseMatrix* sparse() const { return std::get_if<SparseMatrix>(&storage_); }

 private:
  std::variant<MatrixXd, SparseMatrix> storage_;
};

/// A = [A_1, ..., A_n] held as column blocks sharing m rows.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(Index rows, std::vector<MatrixBlock> blocks);

  static BlockMatrix from_dense(const MatrixXd& a, const BlockPartition& partition);
  static BlockMatrix from_sparse(const SparseMatrix& a, const BlockPartition& partition);

  Index rows() const { return rows_; }
  Index cols() const { return partition_.total_size(); }
  Index num_blocks() const { return partition_.num_blocks(); }
  const BlockPartition& partition() const { return partition_; }
  const MatrixBlock& block(Index j) const { return blocks_[static_cast<std::size_t>(j)]; }
  bool is_sparse() const;

  MatrixXd to_dense() const;
  SparseMatrix to_sparse() const;

 private:
  Index rows_ = 0;
  BlockPartition partition_;
  std::vector<MatrixBlock> blocks_;
};

/// A vector conforming to a BlockPartition, stored contiguously.
class BlockVector {
 public:
  BlockVector() = default;
  explicit BlockVector(BlockPartition partition);
  BlockVector(BlockPartition partition, VectorXd values);

  const BlockPartition& partition() const { return partition_; }
  Index num_blocks() const { return partition_.num_blocks(); }

  auto segment(Index j) { return values_.segment(partition_.offset(j), partition_.size(j)); }
  auto segment(Index j) const { return values_.segment(partition_.offset(j), partition_.size(j)); }

  VectorXd& values() { return values_; }
  const VectorXd& values() const { return values_; }

 private:
  BlockPartition partition_;
  VectorXd values_;
};

/// A_j x_j.
VectorXd block_apply(const BlockMatrix& a, Index j, const Eigen::Ref<const VectorXd>& x_j);

/// Sum over j in S_i of A_j x_j, accumulated in ascending block order.
VectorXd group_apply(const BlockMatrix& a, const Grouping& grouping, Index i, const BlockVector& x);

/// Ax - b, accumulated in ascending block order.
VectorXd full_residual(const BlockMatrix& a, const BlockVector& x, const VectorXd& b);

}  // namespace blockadmm
