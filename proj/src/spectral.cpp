#include "blockadmm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <string>

#include "blockadmm/errors.hpp"
#include "blockadmm/random.hpp"

namespace blockadmm {

namespace {

// Lanczos vectors kept before an explicit restart from the current Ritz vector.
constexpr Index kMaxBasis = 200;

struct RitzPair {
  double value = 0.0;
  double residual = 0.0;  // ||M u - value u|| for the Ritz vector u
  VectorXd coefficients;  // u in the Lanczos basis
};

RitzPair top_ritz_pair(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const auto k = static_cast<Index>(alpha.size());
  VectorXd diag = Eigen::Map<const VectorXd>(alpha.data(), k);
  VectorXd sub = Eigen::Map<const VectorXd>(beta.data(), k - 1);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  RitzPair pair;
  pair.value = eig.eigenvalues()[k - 1];
  pair.coefficients = eig.eigenvectors().col(k - 1);
  pair.residual = std::abs(beta[static_cast<std::size_t>(k - 1)] * pair.coefficients[k - 1]);
  return pair;
}

}  // namespace

// Lanczos on M = op^T op with full reorthogonalization. Its Krylov space holds
// every power iterate of the same start vector, and the Ritz residual bounds
// the eigenvalue error directly, which a plain power step cannot do when the
// top singular values are nearly tied.
SpectralEstimate spectral_norm(const LinearOperator& op, const PowerIterationOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidParameterError("power iteration tol must be positive");
  if (options.max_iters < 1) throw InvalidParameterError("power iteration needs max_iters >= 1");
  if (op.rows == 0 || op.cols == 0) return {};

  Rng rng(options.seed);
  VectorXd start(op.cols);
  for (Index c = 0; c < op.cols; ++c) start[c] = rng.normal();
  start.normalize();

  const Index basis_cap = std::min(op.cols, kMaxBasis);
  VectorXd image(op.rows);
  VectorXd w(op.cols);
  SpectralEstimate estimate;
  Index steps = 0;
  while (true) {
    std::vector<VectorXd> basis{start};
    std::vector<double> alpha, beta;
    RitzPair ritz;
    bool exhausted = false;
    while (true) {
      const VectorXd& v = basis.back();
      op.apply(v, image);
      op.apply_transpose(image, w);
      ++steps;
      alpha.push_back(v.dot(w));
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) w -= q.dot(w) * q;
      }
      beta.push_back(w.norm());
      ritz = top_ritz_pair(alpha, beta);

      estimate.value = std::sqrt(std::max(ritz.value, 0.0));
      estimate.iterations = steps;
      estimate.relative_residual = ritz.value > 0.0 ? ritz.residual / ritz.value : 0.0;
      // An exhausted Krylov space (beta ~ 0) makes the Ritz values exact.
      exhausted = beta.back() <= 1e-14 * std::max(ritz.value, std::abs(alpha.front())) ||
                  static_cast<Index>(basis.size()) == op.cols;
      if (ritz.value <= 0.0 && exhausted) return estimate;  // op is zero on the space
      if (estimate.relative_residual <= options.tol || exhausted) return estimate;
      if (steps >= options.max_iters || static_cast<Index>(basis.size()) >= basis_cap) break;
      basis.push_back(w / beta.back());
    }
    if (steps >= options.max_iters) break;
    start.setZero();
    for (std::size_t i = 0; i < basis.size(); ++i) {
      start += ritz.coefficients[static_cast<Index>(i)] * basis[i];
    }
    start.normalize();
  }
  throw EstimationFailedError("spectral norm estimate did not reach relative tolerance " +
                                  std::to_string(options.tol) + " in " +
                                  std::to_string(options.max_iters) + " iterations",
                              estimate.value);
}

LinearOperator make_operator(const MatrixBlock& block) {
  LinearOperator op;
  op.rows = block.rows();
  op.cols = block.cols();
  op.apply = [&block](const VectorXd& in, VectorXd& out) {
    out.setZero(block.rows());
    block.apply_add(in, out);
  };
  op.apply_transpose = [&block](const VectorXd& in, VectorXd& out) {
    out.resize(block.cols());
    block.apply_transpose(in, out);
  };
  return op;
}

LinearOperator make_operator(const BlockMatrix& a) {
  LinearOperator op;
  op.rows = a.rows();
  op.cols = a.cols();
  op.apply = [&a](const VectorXd& in, VectorXd& out) {
    out.setZero(a.rows());
    const auto& part = a.partition();
    for (Index j = 0; j < a.num_blocks(); ++j) {
      a.block(j).apply_add(in.segment(part.offset(j), part.size(j)), out);
    }
  };
  op.apply_transpose = [&a](const VectorXd& in, VectorXd& out) {
    out.resize(a.cols());
    const auto& part = a.partition();
    for (Index j = 0; j < a.num_blocks(); ++j) {
      a.block(j).apply_transpose(in, out.segment(part.offset(j), part.size(j)));
    }
  };
  return op;
}

LinearOperator make_group_operator(const BlockMatrix& a, const Grouping& grouping, Index i) {
  if (i < 0 || i >= grouping.num_groups()) {
    throw InvalidGroupingError("group index " + std::to_string(i) + " out of range");
  }
  const auto group = grouping.group(i);
  std::vector<Index> blocks(group.begin(), group.end());
  std::vector<Index> local_offsets;
  Index cols = 0;
  for (Index j : blocks) {
    local_offsets.push_back(cols);
    cols += a.partition().size(j);
  }
  LinearOperator op;
  op.rows = a.rows();
  op.cols = cols;
  op.apply = [&a, blocks, local_offsets](const VectorXd& in, VectorXd& out) {
    out.setZero(a.rows());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& blk = a.block(blocks[k]);
      blk.apply_add(in.segment(local_offsets[k], blk.cols()), out);
    }
  };
  op.apply_transpose = [&a, blocks, local_offsets, cols](const VectorXd& in, VectorXd& out) {
    out.resize(cols);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const auto& blk = a.block(blocks[k]);
      blk.apply_transpose(in, out.segment(local_offsets[k], blk.cols()));
    }
  };
  return op;
}

LinearOperator make_coupling_operator(const BlockMatrix& a, const Grouping& grouping) {
  if (!(grouping.partition() == a.partition())) {
    throw ShapeError("coupling operator: grouping does not match the matrix partition");
  }
  LinearOperator op;
  op.rows = a.cols();
  op.cols = a.cols();
  // z_i = G_i^T sum_{q > i} G_q w_q
  op.apply = [&a, &grouping](const VectorXd& in, VectorXd& out) {
    const auto& part = a.partition();
    out.resize(a.cols());
    VectorXd suffix = VectorXd::Zero(a.rows());
    for (Index i = grouping.num_groups() - 1; i >= 0; --i) {
      for (Index j : grouping.group(i)) {
        a.block(j).apply_transpose(suffix, out.segment(part.offset(j), part.size(j)));
      }
      for (Index j : grouping.group(i)) {
        a.block(j).apply_add(in.segment(part.offset(j), part.size(j)), suffix);
      }
    }
  };
  // t_q = G_q^T sum_{i < q} G_i u_i
  op.apply_transpose = [&a, &grouping](const VectorXd& in, VectorXd& out) {
    const auto& part = a.partition();
    out.resize(a.cols());
    VectorXd prefix = VectorXd::Zero(a.rows());
    for (Index i = 0; i < grouping.num_groups(); ++i) {
      for (Index j : grouping.group(i)) {
        a.block(j).apply_transpose(prefix, out.segment(part.offset(j), part.size(j)));
      }
      for (Index j : grouping.group(i)) {
        a.block(j).apply_add(in.segment(part.offset(j), part.size(j)), prefix);
      }
    }
  };
  return op;
}

double coupling_norm_blocks(const BlockMatrix& a, const PowerIterationOptions& options) {
  if (a.num_blocks() <= 1) return 0.0;
  const Grouping blocks = identity_grouping(a.partition());
  return spectral_norm(make_coupling_operator(a, blocks), options).value;
}

double coupling_norm_groups(const BlockMatrix& a, const Grouping& grouping,
                            const PowerIterationOptions& options) {
  if (grouping.num_groups() <= 1) return 0.0;
  return spectral_norm(make_coupling_operator(a, grouping), options).value;
}

double gram_spectral_norm(const MatrixBlock& block) {
  if (block.rows() == 0 || block.cols() == 0) return 0.0;
  MatrixXd gram;
  if (const SparseMatrix* s = block.sparse()) {
    gram = MatrixXd(SparseMatrix(s->transpose() * *s));
  } else {
    gram = block.dense()->transpose() * *block.dense();
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    throw EstimationFailedError("eigenvalue solve of a block Gram matrix failed", 0.0);
  }
  return std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 0.0));
}

const GroupSpectra* SpectralReport::find(const Grouping& grouping) const {
  for (const auto& g : groups) {
    if (g.grouping == grouping) return &g;
  }
  return nullptr;
}

SpectralReport compute_spectral_report(const BlockMatrix& a, const SpectralRequest& request,
                                       const PowerIterationOptions& options) {
  SpectralReport report;
  auto track = [&report](const SpectralEstimate& e) {
    report.max_relative_residual = std::max(report.max_relative_residual, e.relative_residual);
    return e.value;
  };
  if (request.block_norms) {
    report.block_norms.reserve(static_cast<std::size_t>(a.num_blocks()));
    for (Index j = 0; j < a.num_blocks(); ++j) {
      const MatrixBlock& block = a.block(j);
      if (block.cols() <= request.dense_column_limit) {
        report.block_norms.push_back(gram_spectral_norm(block));
      } else {
        report.block_norms.push_back(track(spectral_norm(make_operator(block), options)));
      }
    }
  }
  if (request.coupling && a.num_blocks() > 1) {
    const Grouping blocks = identity_grouping(a.partition());
    report.coupling_norm_blocks = track(spectral_norm(make_coupling_operator(a, blocks), options));
  }
  if (request.full_norm) report.full_norm = track(spectral_norm(make_operator(a), options));
  for (const auto& grouping : request.groupings) {
    GroupSpectra g;
    g.grouping = grouping;
    for (Index i = 0; i < grouping.num_groups(); ++i) {
      g.group_norms.push_back(track(spectral_norm(make_group_operator(a, grouping, i), options)));
    }
    if (grouping.num_groups() > 1) {
      g.coupling_norm = track(spectral_norm(make_coupling_operator(a, grouping), options));
    }
    report.groups.push_back(std::move(g));
  }
  return report;
}

}  // namespace blockadmm
