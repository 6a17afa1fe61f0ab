#include "blockadmm/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockadmm/errors.hpp"

namespace blockadmm {

namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw InvalidParameterError(std::string(name) + " must be positive, got " +
                                std::to_string(value));
  }
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kHalfSquaredL2:
      return "half_sq_l2";
    case ObjectiveKind::kL1:
      return "l1";
    case ObjectiveKind::kWeightedQuadratic:
      return "weighted_quadratic";
    case ObjectiveKind::kCustomProx:
      return "custom_prox";
  }
  return "unknown";
}

ObjectiveKind objective_kind_from_string(const std::string& name) {
  if (name == "half_sq_l2") return ObjectiveKind::kHalfSquaredL2;
  if (name == "l1") return ObjectiveKind::kL1;
  if (name == "weighted_quadratic") return ObjectiveKind::kWeightedQuadratic;
  if (name == "custom_prox") return ObjectiveKind::kCustomProx;
  throw UnsupportedObjectiveError("unknown objective kind '" + name + "'");
}

BlockObjective BlockObjective::half_squared_l2() {
  return BlockObjective(ObjectiveKind::kHalfSquaredL2, 1.0);
}

BlockObjective BlockObjective::l1() { return BlockObjective(ObjectiveKind::kL1, 0.0); }

BlockObjective BlockObjective::weighted_quadratic(VectorXd weights, VectorXd center) {
  if (weights.size() == 0 || weights.size() != center.size()) {
    throw ShapeError("weighted quadratic: weights and center must have equal, nonzero length");
  }
  if (!(weights.minCoeff() > 0.0)) {
    throw InvalidParameterError("weighted quadratic: weights must be positive");
  }
  BlockObjective f(ObjectiveKind::kWeightedQuadratic, weights.minCoeff());
  f.weights_ = std::move(weights);
  f.center_ = std::move(center);
  return f;
}

BlockObjective BlockObjective::custom(ProxOracle prox, double strong_convexity,
                                      ValueOracle value) {
  if (!(strong_convexity >= 0.0)) {
    throw InvalidParameterError("strong convexity modulus must be nonnegative");
  }
  BlockObjective f(ObjectiveKind::kCustomProx, strong_convexity);
  f.prox_ = std::move(prox);
  f.value_ = std::move(value);
  return f;
}

VectorXd BlockObjective::prox(const VectorXd& d, double tau) const {
  require_positive(tau, "tau");
  switch (kind_) {
    case ObjectiveKind::kHalfSquaredL2:
      return prox_half_sq(d, tau);
    case ObjectiveKind::kL1:
      return prox_l1(d, 1.0 / tau);
    case ObjectiveKind::kWeightedQuadratic: {
      if (d.size() != weights_.size()) {
        throw ShapeError("weighted quadratic prox: length mismatch");
      }
      return ((tau * d.array() + weights_.array() * center_.array()) /
              (tau + weights_.array()))
          .matrix();
    }
    case ObjectiveKind::kCustomProx:
      if (!prox_) throw UnsupportedObjectiveError("custom objective has no prox oracle");
      return prox_(d, tau);
  }
  throw UnsupportedObjectiveError("unhandled objective kind");
}

double BlockObjective::value(const VectorXd& x) const {
  switch (kind_) {
    case ObjectiveKind::kHalfSquaredL2:
      return 0.5 * x.squaredNorm();
    case ObjectiveKind::kL1:
      return x.lpNorm<1>();
    case ObjectiveKind::kWeightedQuadratic:
      return 0.5 * (weights_.array() * (x - center_).array().square()).sum();
    case ObjectiveKind::kCustomProx:
      if (!value_) throw UnsupportedObjectiveError("custom objective has no value oracle");
      return value_(x);
  }
  throw UnsupportedObjectiveError("unhandled objective kind");
}

SeparableObjective SeparableObjective::uniform(const BlockObjective& term, Index num_blocks) {
  return SeparableObjective(std::vector<BlockObjective>(static_cast<std::size_t>(num_blocks), term));
}

double SeparableObjective::value(const BlockVector& x) const {
  if (x.num_blocks() != num_blocks()) throw ShapeError("objective/vector block count mismatch");
  double total = 0.0;
  for (Index j = 0; j < num_blocks(); ++j) total += term(j).value(x.segment(j));
  return total;
}

VectorXd prox_l1(const VectorXd& d, double lambda) {
  require_positive(lambda, "lambda");
  VectorXd out(d.size());
  for (Index c = 0; c < d.size(); ++c) {
    const double shrunk = std::abs(d[c]) - lambda;
    out[c] = shrunk > 0.0 ? std::copysign(shrunk, d[c]) : 0.0;
  }
  return out;
}

VectorXd prox_half_sq(const VectorXd& d, double tau) {
  require_positive(tau, "tau");
  // Ratio first, then scale.
  const double ratio = tau / (tau + 1.0);
  return ratio * d;
}

VectorXd solve_block_subproblem(const BlockObjective& f, const MatrixBlock& a_j,
                                const VectorXd& x_old, const VectorXd& v, double rho,
                                double tau) {
  require_positive(tau, "tau");
  if (x_old.size() != a_j.cols() || v.size() != a_j.rows()) {
    throw ShapeError("block subproblem: x_old or v has the wrong length");
  }
  VectorXd d = a_j.apply_transpose(v);
  d *= -(rho / tau);
  d += x_old;
  return f.prox(d, tau);
}

VectorXd solve_block_subproblem_general(const BlockObjective& f, const MatrixBlock& a_j,
                                        const VectorXd& x_old, const VectorXd& v, double rho,
                                        const MatrixXd& regularizer) {
  if (!f.is_quadratic()) {
    throw UnsupportedObjectiveError(
        "a general regularizer is only supported for quadratic block objectives");
  }
  const Index nj = a_j.cols();
  if (regularizer.rows() != nj || regularizer.cols() != nj || x_old.size() != nj ||
      v.size() != a_j.rows()) {
    throw ShapeError("general block subproblem: dimension mismatch");
  }
  const MatrixXd a = a_j.to_dense();
  const MatrixXd gram = rho * a.transpose() * a;
  VectorXd weights = VectorXd::Ones(nj);
  VectorXd center = VectorXd::Zero(nj);
  if (f.kind() == ObjectiveKind::kWeightedQuadratic) {
    weights = f.weights();
    center = f.center();
  }
  MatrixXd system = regularizer + gram;
  VectorXd rhs = system * x_old - rho * (a.transpose() * v) +
                 (weights.array() * center.array()).matrix();
  system.diagonal() += weights;
  Eigen::LLT<MatrixXd> llt(system);
  if (llt.info() != Eigen::Success) {
    throw InvalidParameterError("general block subproblem: system matrix is not positive definite");
  }
  return llt.solve(rhs);
}

double block_subproblem_value(const BlockObjective& f, const MatrixBlock& a_j,
                              const VectorXd& x_old, const VectorXd& v, double rho, double tau,
                              const VectorXd& x) {
  const VectorXd step = x - x_old;
  const VectorXd a_step = a_j.apply(step);
  const VectorXd coupled = a_step + v;
  // ||step||_P^2 with P = tau I - rho A^T A.
  const double reg = tau * step.squaredNorm() - rho * a_step.squaredNorm();
  return f.value(x) + 0.5 * rho * coupled.squaredNorm() + 0.5 * reg;
}

double min_strong_convexity(const SeparableObjective& objective) {
  if (objective.num_blocks() == 0) return 0.0;
  double mu = std::numeric_limits<double>::infinity();
  for (const auto& term : objective.terms()) mu = std::min(mu, term.strong_convexity());
  return mu;
}

}  // namespace blockadmm
