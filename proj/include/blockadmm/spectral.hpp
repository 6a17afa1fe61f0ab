#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "blockadmm/block_model.hpp"

namespace blockadmm {

/// Matrix-free operator R^cols -> R^rows with its adjoint. Operators built by the
/// make_* helpers reference their matrix (and grouping), which must outlive them.
struct LinearOperator {
  Index rows = 0;
  Index cols = 0;
  std::function<void(const VectorXd& in, VectorXd& out)> apply;
  std::function<void(const VectorXd& in, VectorXd& out)> apply_transpose;
};

struct PowerIterationOptions {
  double tol = 1e-9;
  Index max_iters = 5000;
  std::uint64_t seed = 0x5EED;
};

struct SpectralEstimate {
  double value = 0.0;           // sigma_max estimate
  Index iterations = 0;
  double relative_residual = 0.0;  // ||M u - theta u|| / theta for the top Ritz pair of M = op^T op
};

/// Largest singular value from a Lanczos iteration on op^T op (a Krylov refinement
/// of power iteration) started from a seeded random vector, so the result is
/// deterministic. Stops once the top Ritz pair has relative residual <= tol, which
/// bounds the relative error of sigma_max^2 by tol. Throws EstimationFailedError
/// (carrying the best estimate) when max_iters operator products do not get there.
SpectralEstimate spectral_norm(const LinearOperator& op, const PowerIterationOptions& options = {});

LinearOperator make_operator(const MatrixBlock& block);
LinearOperator make_operator(const BlockMatrix& a);
/// The group slice [A_j for j in S_i].
LinearOperator make_group_operator(const BlockMatrix& a, const Grouping& grouping, Index i);

/// Strictly block-upper operator whose (i, q) block is G_i^T G_q for i < q, where
/// G_i are the group slices. Applying it to w gives z_i = G_i^T sum_{q>i} G_q w_q
/// via suffix sums; the N x N matrix is never formed.
LinearOperator make_coupling_operator(const BlockMatrix& a, const Grouping& grouping);

/// ||A_D^T A_tri||_2 over the individual blocks (0 when n = 1).
double coupling_norm_blocks(const BlockMatrix& a, const PowerIterationOptions& options = {});

/// The same over group slices (0 when l = 1).
double coupling_norm_groups(const BlockMatrix& a, const Grouping& grouping,
                            const PowerIterationOptions& options = {});

/// ||A_j||_2 from the largest eigenvalue of A_j^T A_j (dense eigensolve).
double gram_spectral_norm(const MatrixBlock& block);

struct GroupSpectra {
  Grouping grouping;
  std::vector<double> group_norms;  // ||G_i||_2
  double coupling_norm = 0.0;       // ||G_D^T G_tri||_2
};

struct SpectralReport {
  std::vector<double> block_norms;  // ||A_j||_2
  double coupling_norm_blocks = 0.0;
  double full_norm = 0.0;           // ||A||_2
  std::vector<GroupSpectra> groups;
  double max_relative_residual = 0.0;  // worst estimator residual across estimates

  const GroupSpectra* find(const Grouping& grouping) const;
};

struct SpectralRequest {
  bool block_norms = true;
  bool coupling = true;
  bool full_norm = true;
  std::vector<Grouping> groupings;
  /// Blocks with at most this many columns get their norm from an eigensolve of
  /// the small Gram matrix A_j^T A_j instead of the iterative estimator.
  Index dense_column_limit = 512;
};

SpectralReport compute_spectral_report(const BlockMatrix& a, const SpectralRequest& request,
                                       const PowerIterationOptions& options = {});

}  // namespace blockadmm
