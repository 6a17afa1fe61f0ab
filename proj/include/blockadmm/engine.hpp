#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "blockadmm/block_model.hpp"
#include "blockadmm/problem.hpp"
#include "blockadmm/tau_policy.hpp"

namespace blockadmm {

enum class ScheduleKind {
  kGaussSeidel,  // F-ADMM: blocks one after another, each sees the fresh ones before it
  kJacobi,       // J-ADMM: every block solves from the same stale residual
  kHybrid,       // H-ADMM: groups Gauss-Seidel, blocks within a group Jacobi
  kTwoGroup      // H-ADMM(l=2) for merely convex objectives
};

/// "gauss-seidel", "jacobi", "hybrid", "two-group".
std::string to_string(ScheduleKind kind);

class Schedule {
 public:
  static Schedule gauss_seidel() { return Schedule(ScheduleKind::kGaussSeidel, std::nullopt); }
  static Schedule jacobi() { return Schedule(ScheduleKind::kJacobi, std::nullopt); }
  static Schedule hybrid(Grouping grouping);
  /// Throws InvalidGroupingError unless the grouping has exactly two groups.
  static Schedule two_group(Grouping grouping);

  ScheduleKind kind() const { return kind_; }
  const Grouping* grouping() const { return grouping_ ? &*grouping_ : nullptr; }

  /// The grouping whose products SolverState caches: the schedule's own grouping,
  /// or one group per block for gauss-seidel and jacobi.
  Grouping state_grouping(const BlockPartition& partition) const;

 private:
  Schedule(ScheduleKind kind, std::optional<Grouping> grouping)
      : kind_(kind), grouping_(std::move(grouping)) {}

  ScheduleKind kind_;
  std::optional<Grouping> grouping_;
};

enum class StopKind { kConstraintResidual, kRelativeError, kMaxEpochs };

struct StopRule {
  StopKind kind = StopKind::kConstraintResidual;
  double tol = 1e-10;
  std::optional<VectorXd> reference;  // x* for kRelativeError

  /// 1/2 ||Ax - b||^2 <= tol.
  static StopRule constraint_residual(double tol) { return {StopKind::kConstraintResidual, tol, {}}; }
  /// ||x - x*|| / ||x*|| <= tol.
  static StopRule relative_error(VectorXd reference, double tol) {
    return {StopKind::kRelativeError, tol, std::move(reference)};
  }
  /// Run until max_epochs (or divergence).
  static StopRule max_epochs() { return {StopKind::kMaxEpochs, 0.0, {}}; }
};

struct DivergenceGuard {
  double threshold = 1e12;  // on 1/2||r||^2 and on ||x||
  Index min_epochs = 10;
};

struct SolverConfig {
  double rho = 1.0;
  double gamma = 1.0;
  RegularizerPolicy policy;
  Schedule schedule = Schedule::gauss_seidel();
  Index max_epochs = 100000;
  StopRule stop;
  DivergenceGuard guard;
  int threads = 1;               // caps within-epoch parallelism; never changes results
  bool track_g_metric = false;   // record ||u^k - u^{k+1}||_G^2 per epoch

  /// Throws InvalidParameterError / InvalidConfigError / InvalidGroupingError.
  void validate(const Problem& problem) const;
};

struct EpochRecord {
  Index epoch = 0;
  double half_sq_residual = 0.0;
  double g_dist_to_ref = std::numeric_limits<double>::quiet_NaN();
  double g_step = std::numeric_limits<double>::quiet_NaN();
};

/// Iterate plus the cached group products g_i = G_i x_i and r = sum_i g_i - b.
struct SolverState {
  BlockVector x;
  VectorXd y;
  Index epoch = 0;
  Grouping grouping;
  std::vector<VectorXd> group_products;
  VectorXd residual;
  std::vector<EpochRecord> history;

  /// x = 0, y = 0.
  static SolverState initial(const Problem& problem, const Schedule& schedule);
  static SolverState from_iterates(const Problem& problem, const Schedule& schedule, BlockVector x,
                                   VectorXd y);

  /// Switches the cached products to `grouping` (recomputing them) if it differs.
  void regroup(const Problem& problem, const Grouping& grouping);
  /// Recomputes every g_i from x, then r.
  void refresh_products(const Problem& problem);
  /// r = sum_i g_i - b, summed in group order.
  void refresh_residual(const VectorXd& b);

  double half_sq_residual() const { return 0.5 * residual.squaredNorm(); }
};

void epoch_gauss_seidel(SolverState& state, const Problem& problem, const SolverConfig& config);
void epoch_jacobi(SolverState& state, const Problem& problem, const SolverConfig& config);
void epoch_hybrid(SolverState& state, const Problem& problem, const SolverConfig& config);
void epoch_two_group(SolverState& state, const Problem& problem, const SolverConfig& config);

/// Dispatches on config.schedule.
void primal_epoch(SolverState& state, const Problem& problem, const SolverConfig& config);

/// y <- y - gamma rho (Ax - b), using the cached residual.
void dual_update(SolverState& state, const SolverConfig& config);

struct GDistance {
  double value = 0.0;
  bool psd_violation = false;  // value < -1e-10: some regularizer is not PSD
};

/// ||u - u_ref||_G^2 = sum_i ||x_i - x_i^ref||^2_{P_i} + ||y - y^ref||^2 / (gamma rho).
///
/// With a grouping, P_i are the group regularizers blockdiag(P_j + rho A_j^T A_j) -
/// rho G_i^T G_i (the metric under which the hybrid schedule is a Gauss-Seidel
/// method over groups); without one, the individual P_j.
GDistance g_metric(const BlockVector& x, const VectorXd& y, const BlockVector& x_ref,
                   const VectorXd& y_ref, const RegularizerPolicy& policy, double rho,
                   double gamma, const BlockMatrix& a, const Grouping* grouping = nullptr);

enum class Decision { kContinue, kConverged, kDiverged };

Decision stop_check(const SolverState& state, const StopRule& rule,
                    const DivergenceGuard& guard = {});

enum class Outcome { kConverged, kDiverged, kMaxEpochs };

/// "converged", "diverged", "max-epochs".
std::string to_string(Outcome outcome);

struct RunReport {
  Outcome outcome = Outcome::kMaxEpochs;
  Index epochs = 0;
  double final_half_sq_residual = 0.0;
  std::optional<double> final_relative_error;
  TauRule tau_rule = TauRule::kPerBlockManual;
  ScheduleKind schedule = ScheduleKind::kGaussSeidel;
  double wall_time_seconds = 0.0;
  bool metric_violation = false;
  std::vector<EpochRecord> history;

  bool converged() const { return outcome == Outcome::kConverged; }
  bool diverged() const { return outcome == Outcome::kDiverged; }
  bool hit_max_epochs() const { return outcome == Outcome::kMaxEpochs; }
};

struct RunOptions {
  std::optional<BlockVector> x_ref;  // enables final_relative_error
  std::optional<VectorXd> y_ref;     // with x_ref, enables the g_dist_to_ref trace
  std::optional<BlockVector> x0;
  std::optional<VectorXd> y0;
  bool record_history = true;
};

struct RunResult {
  RunReport report;
  SolverState state;
};

/// Repeats (primal epoch, dual update, stop check) until the stop rule fires,
/// divergence is detected or max_epochs is reached. Divergence is an outcome,
/// not an exception.
RunResult run(const Problem& problem, const SolverConfig& config, const RunOptions& options = {});

}  // namespace blockadmm
