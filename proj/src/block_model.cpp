#include "blockadmm/block_model.hpp"

#include <string>

#include "blockadmm/errors.hpp"

namespace blockadmm {

BlockPartition::BlockPartition(std::vector<Index> block_sizes) : sizes_(std::move(block_sizes)) {
  offsets_.reserve(sizes_.size() + 1);
  offsets_.push_back(0);
  for (std::size_t j = 0; j < sizes_.size(); ++j) {
    if (sizes_[j] < 1) {
      throw ShapeError("block " + std::to_string(j) + " has size " + std::to_string(sizes_[j]) +
                       "; every block needs at least one variable");
    }
    offsets_.push_back(offsets_.back() + sizes_[j]);
  }
}

BlockPartition BlockPartition::uniform(Index num_blocks, Index block_size) {
  if (num_blocks < 1) throw ShapeError("a partition needs at least one block");
  return BlockPartition(std::vector<Index>(static_cast<std::size_t>(num_blocks), block_size));
}

Grouping::Grouping(BlockPartition partition, std::vector<std::vector<Index>> index_sets)
    : partition_(std::move(partition)), sets_(std::move(index_sets)) {
  const Index n = partition_.num_blocks();
  if (sets_.empty()) throw InvalidGroupingError("a grouping needs at least one group");
  owner_.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t i = 0; i < sets_.size(); ++i) {
    if (sets_[i].empty()) {
      throw InvalidGroupingError("group " + std::to_string(i) + " is empty");
    }
    for (Index j : sets_[i]) {
      if (j < 0 || j >= n) {
        throw InvalidGroupingError("block index " + std::to_string(j) + " out of range [0, " +
                                   std::to_string(n) + ")");
      }
      auto& owner = owner_[static_cast<std::size_t>(j)];
      if (owner != -1) {
        throw InvalidGroupingError("block " + std::to_string(j) + " appears in two groups");
      }
      owner = static_cast<Index>(i);
    }
  }
  for (Index j = 0; j < n; ++j) {
    if (owner_[static_cast<std::size_t>(j)] == -1) {
      throw InvalidGroupingError("block " + std::to_string(j) + " belongs to no group");
    }
  }
}

Index Grouping::nominal_group_size() const {
  return partition_.num_blocks() / num_groups();
}

Grouping make_contiguous_grouping(const BlockPartition& partition, Index num_groups) {
  const Index n = partition.num_blocks();
  if (num_groups <= 0 || num_groups > n) {
    throw InvalidGroupingError("number of groups " + std::to_string(num_groups) +
                               " must lie in [1, " + std::to_string(n) + "]");
  }
  const Index p = n / num_groups;
  std::vector<std::vector<Index>> sets(static_cast<std::size_t>(num_groups));
  for (Index j = 0; j < n; ++j) {
    const Index i = std::min(j / p, num_groups - 1);
    sets[static_cast<std::size_t>(i)].push_back(j);
  }
  return Grouping(partition, std::move(sets));
}

Grouping identity_grouping(const BlockPartition& partition) {
  return make_contiguous_grouping(partition, partition.num_blocks());
}

MatrixBlock::MatrixBlock(SparseMatrix sparse) : storage_(std::move(sparse)) {
  std::get<SparseMatrix>(storage_).makeCompressed();
}

Index MatrixBlock::rows() const {
  return std::visit([](const auto& m) -> Index { return m.rows(); }, storage_);
}

Index MatrixBlock::cols() const {
  return std::visit([](const auto& m) -> Index { return m.cols(); }, storage_);
}

Index MatrixBlock::nonzeros() const {
  if (const auto* s = sparse()) return s->nonZeros();
  return dense()->size();
}

void MatrixBlock::apply_add(const Eigen::Ref<const VectorXd>& x, Eigen::Ref<VectorXd> out) const {
  if (x.size() != cols() || out.size() != rows()) {
    throw ShapeError("block product: expected x of length " + std::to_string(cols()) +
                     " and output of length " + std::to_string(rows()));
  }
  if (const auto* d = dense()) {
    out.noalias() += (*d) * x;
    return;
  }
  const SparseMatrix& s = *sparse();
  for (Index c = 0; c < s.outerSize(); ++c) {
    const double xc = x[c];
    if (xc == 0.0) continue;
    for (SparseMatrix::InnerIterator it(s, c); it; ++it) out[it.row()] += it.value() * xc;
  }
}

void MatrixBlock::apply_transpose(const Eigen::Ref<const VectorXd>& v,
                                  Eigen::Ref<VectorXd> out) const {
  if (v.size() != rows() || out.size() != cols()) {
    throw ShapeError("block transpose product: expected v of length " + std::to_string(rows()) +
                     " and output of length " + std::to_string(cols()));
  }
  if (const auto* d = dense()) {
    out.noalias() = d->transpose() * v;
    return;
  }
  const SparseMatrix& s = *sparse();
  for (Index c = 0; c < s.outerSize(); ++c) {
    double acc = 0.0;
    for (SparseMatrix::InnerIterator it(s, c); it; ++it) acc += it.value() * v[it.row()];
    out[c] = acc;
  }
}

VectorXd MatrixBlock::apply(const Eigen::Ref<const VectorXd>& x) const {
  VectorXd out = VectorXd::Zero(rows());
  apply_add(x, out);
  return out;
}

VectorXd MatrixBlock::apply_transpose(const Eigen::Ref<const VectorXd>& v) const {
  VectorXd out(cols());
  apply_transpose(v, out);
  return out;
}

MatrixXd MatrixBlock::to_dense() const {
  if (const auto* d = dense()) return *d;
  return MatrixXd(*sparse());
}

BlockMatrix::BlockMatrix(Index rows, std::vector<MatrixBlock> blocks)
    : rows_(rows), blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw ShapeError("a block matrix needs at least one block");
  std::vector<Index> sizes;
  sizes.reserve(blocks_.size());
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    if (blocks_[j].rows() != rows_) {
      throw ShapeError("block " + std::to_string(j) + " has " + std::to_string(blocks_[j].rows()) +
                       " rows, expected " + std::to_string(rows_));
    }
    sizes.push_back(blocks_[j].cols());
  }
  partition_ = BlockPartition(std::move(sizes));
}

BlockMatrix BlockMatrix::from_dense(const MatrixXd& a, const BlockPartition& partition) {
  if (a.cols() != partition.total_size()) {
    throw ShapeError("matrix has " + std::to_string(a.cols()) + " columns, partition covers " +
                     std::to_string(partition.total_size()));
  }
  std::vector<MatrixBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(partition.num_blocks()));
  for (Index j = 0; j < partition.num_blocks(); ++j) {
    blocks.emplace_back(MatrixXd(a.middleCols(partition.offset(j), partition.size(j))));
  }
  return BlockMatrix(a.rows(), std::move(blocks));
}

BlockMatrix BlockMatrix::from_sparse(const SparseMatrix& a, const BlockPartition& partition) {
  if (a.cols() != partition.total_size()) {
    throw ShapeError("matrix has " + std::to_string(a.cols()) + " columns, partition covers " +
                     std::to_string(partition.total_size()));
  }
  std::vector<MatrixBlock> blocks;
  blocks.reserve(static_cast<std::size_t>(partition.num_blocks()));
  for (Index j = 0; j < partition.num_blocks(); ++j) {
    blocks.emplace_back(SparseMatrix(a.middleCols(partition.offset(j), partition.size(j))));
  }
  return BlockMatrix(a.rows(), std::move(blocks));
}

bool BlockMatrix::is_sparse() const {
  for (const auto& b : blocks_) {
    if (!b.is_sparse()) return false;
  }
  return true;
}

MatrixXd BlockMatrix::to_dense() const {
  MatrixXd out(rows_, cols());
  for (Index j = 0; j < num_blocks(); ++j) {
    out.middleCols(partition_.offset(j), partition_.size(j)) = block(j).to_dense();
  }
  return out;
}

SparseMatrix BlockMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  for (Index j = 0; j < num_blocks(); ++j) {
    const Index off = partition_.offset(j);
    if (const auto* s = block(j).sparse()) {
      for (Index c = 0; c < s->outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(*s, c); it; ++it) {
          triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(off + c), it.value());
        }
      }
    } else {
      const MatrixXd& d = *block(j).dense();
      for (Index c = 0; c < d.cols(); ++c) {
        for (Index r = 0; r < d.rows(); ++r) {
          if (d(r, c) != 0.0) {
            triplets.emplace_back(static_cast<int>(r), static_cast<int>(off + c), d(r, c));
          }
        }
      }
    }
  }
  SparseMatrix out(rows_, cols());
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

BlockVector::BlockVector(BlockPartition partition)
    : partition_(std::move(partition)), values_(VectorXd::Zero(partition_.total_size())) {}

BlockVector::BlockVector(BlockPartition partition, VectorXd values)
    : partition_(std::move(partition)), values_(std::move(values)) {
  if (values_.size() != partition_.total_size()) {
    throw ShapeError("vector of length " + std::to_string(values_.size()) +
                     " does not match partition of total size " +
                     std::to_string(partition_.total_size()));
  }
}

VectorXd block_apply(const BlockMatrix& a, Index j, const Eigen::Ref<const VectorXd>& x_j) {
  if (j < 0 || j >= a.num_blocks()) {
    throw ShapeError("block index " + std::to_string(j) + " out of range");
  }
  return a.block(j).apply(x_j);
}

VectorXd group_apply(const BlockMatrix& a, const Grouping& grouping, Index i, const BlockVector& x) {
  if (i < 0 || i >= grouping.num_groups()) {
    throw InvalidGroupingError("group index " + std::to_string(i) + " out of range");
  }
  if (!(x.partition() == a.partition()) || !(grouping.partition() == a.partition())) {
    throw ShapeError("group product: vector, grouping and matrix partitions differ");
  }
  VectorXd out = VectorXd::Zero(a.rows());
  for (Index j : grouping.group(i)) a.block(j).apply_add(x.segment(j), out);
  return out;
}

VectorXd full_residual(const BlockMatrix& a, const BlockVector& x, const VectorXd& b) {
  if (b.size() != a.rows()) {
    throw ShapeError("right-hand side has length " + std::to_string(b.size()) + ", expected " +
                     std::to_string(a.rows()));
  }
  if (!(x.partition() == a.partition())) {
    throw ShapeError("residual: vector and matrix partitions differ");
  }
  VectorXd out = VectorXd::Zero(a.rows());
  for (Index j = 0; j < a.num_blocks(); ++j) a.block(j).apply_add(x.segment(j), out);
  out -= b;
  return out;
}

}  // namespace blockadmm
