#pragma once

#include <functional>
#include <string>
#include <vector>

#include "blockadmm/block_model.hpp"

namespace blockadmm {

enum class ObjectiveKind { kHalfSquaredL2, kL1, kWeightedQuadratic, kCustomProx };

/// Serialized names: "half_sq_l2", "l1", "weighted_quadratic", "custom_prox".
std::string to_string(ObjectiveKind kind);
ObjectiveKind objective_kind_from_string(const std::string& name);

/// argmin_x f(x) + (tau/2) ||x - d||^2.
using ProxOracle = std::function<VectorXd(const VectorXd& d, double tau)>;
using ValueOracle = std::function<double(const VectorXd& x)>;

/// One separable term f_j of the objective.
///
/// The weighted quadratic is f(x) = 1/2 sum_c w_c (x_c - c_c)^2 with w_c > 0, so
/// its strong convexity modulus is min_c w_c. Custom terms supply a prox oracle
/// and, optionally, a value oracle.
class BlockObjective {
 public:
  static BlockObjective half_squared_l2();
  static BlockObjective l1();
  static BlockObjective weighted_quadratic(VectorXd weights, VectorXd center);
  static BlockObjective custom(ProxOracle prox, double strong_convexity, ValueOracle value = {});

  ObjectiveKind kind() const { return kind_; }
  double strong_convexity() const { return mu_; }
  bool is_quadratic() const {
    return kind_ == ObjectiveKind::kHalfSquaredL2 || kind_ == ObjectiveKind::kWeightedQuadratic;
  }
  const VectorXd& weights() const { return weights_; }
  const VectorXd& center() const { return center_; }

  /// argmin_x f(x) + (tau/2)||x - d||^2.
  VectorXd prox(const VectorXd& d, double tau) const;
  double value(const VectorXd& x) const;

 private:
  BlockObjective(ObjectiveKind kind, double mu) : kind_(kind), mu_(mu) {}

  ObjectiveKind kind_;
  double mu_;
  VectorXd weights_;
  VectorXd center_;
  ProxOracle prox_;
  ValueOracle value_;
};

/// f(x) = sum_j f_j(x_j).
class SeparableObjective {
 public:
  SeparableObjective() = default;
  explicit SeparableObjective(std::vector<BlockObjective> terms) : terms_(std::move(terms)) {}

  static SeparableObjective uniform(const BlockObjective& term, Index num_blocks);

  Index num_blocks() const { return static_cast<Index>(terms_.size()); }
  const BlockObjective& term(Index j) const { return terms_[static_cast<std::size_t>(j)]; }
  const std::vector<BlockObjective>& terms() const { return terms_; }

  double value(const BlockVector& x) const;

 private:
  std::vector<BlockObjective> terms_;
};

/// Soft thresholding: sign(d) max(|d| - lambda, 0) componentwise.
VectorXd prox_l1(const VectorXd& d, double lambda);

/// argmin 1/2||x||^2 + (tau/2)||x - d||^2 = (tau / (tau + 1)) d.
VectorXd prox_half_sq(const VectorXd& d, double tau);

/// Minimizes f_j(x) + (rho/2)||A_j (x - x_old) + v||^2 + 1/2||x - x_old||^2_P with
/// P = tau I - rho A_j^T A_j. This reduces to prox_{f_j/tau}(d) with
/// d = x_old - (rho/tau) A_j^T v.
VectorXd solve_block_subproblem(const BlockObjective& f, const MatrixBlock& a_j,
                                const VectorXd& x_old, const VectorXd& v, double rho,
                                double tau);

/// Same subproblem with an arbitrary symmetric regularizer P. Only quadratic terms
/// are supported; solved by Cholesky on P + W + rho A_j^T A_j.
VectorXd solve_block_subproblem_general(const BlockObjective& f, const MatrixBlock& a_j,
                                        const VectorXd& x_old, const VectorXd& v, double rho,
                                        const MatrixXd& regularizer);

/// The full subproblem objective (used by tests and diagnostics).
double block_subproblem_value(const BlockObjective& f, const MatrixBlock& a_j,
                              const VectorXd& x_old, const VectorXd& v, double rho, double tau,
                              const VectorXd& x);

/// mu = min_j mu_j; zero means merely convex.
double min_strong_convexity(const SeparableObjective& objective);

}  // namespace blockadmm
