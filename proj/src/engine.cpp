#include "blockadmm/engine.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>

#include "blockadmm/errors.hpp"

namespace blockadmm {

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kGaussSeidel:
      return "gauss-seidel";
    case ScheduleKind::kJacobi:
      return "jacobi";
    case ScheduleKind::kHybrid:
      return "hybrid";
    case ScheduleKind::kTwoGroup:
      return "two-group";
  }
  return "unknown";
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kConverged:
      return "converged";
    case Outcome::kDiverged:
      return "diverged";
    case Outcome::kMaxEpochs:
      return "max-epochs";
  }
  return "unknown";
}

Schedule Schedule::hybrid(Grouping grouping) {
  return Schedule(ScheduleKind::kHybrid, std::move(grouping));
}

Schedule Schedule::two_group(Grouping grouping) {
  if (grouping.num_groups() != 2) {
    throw InvalidGroupingError("two-group schedule needs exactly 2 groups, got " +
                               std::to_string(grouping.num_groups()));
  }
  return Schedule(ScheduleKind::kTwoGroup, std::move(grouping));
}

Grouping Schedule::state_grouping(const BlockPartition& partition) const {
  if (grouping_) return *grouping_;
  return identity_grouping(partition);
}

void SolverConfig::validate(const Problem& problem) const {
  problem.validate();
  if (!(rho > 0.0)) throw InvalidParameterError("rho must be positive");
  if (!(gamma > 0.0 && gamma < 2.0)) throw InvalidParameterError("gamma must lie in (0, 2)");
  if (max_epochs < 0) throw InvalidConfigError("max_epochs must be nonnegative");
  if (threads < 1) throw InvalidConfigError("threads must be >= 1");
  const Index n = problem.num_blocks();
  if (policy.has_explicit_regularizers()) {
    if (static_cast<Index>(policy.explicit_regularizers.size()) != n) {
      throw InvalidConfigError("explicit regularizer count does not match block count");
    }
    for (Index j = 0; j < n; ++j) {
      const auto& p = policy.explicit_regularizers[static_cast<std::size_t>(j)];
      if (p.rows() != problem.partition().size(j) || p.cols() != p.rows()) {
        throw ShapeError("explicit regularizer " + std::to_string(j) + " has the wrong shape");
      }
      if (!problem.objective.term(j).is_quadratic()) {
        throw UnsupportedObjectiveError(
            "explicit regularizers need quadratic block objectives (block " + std::to_string(j) +
            ")");
      }
    }
  } else {
    if (policy.tau.size() != n) {
      throw InvalidConfigError("tau has " + std::to_string(policy.tau.size()) +
                               " entries, expected " + std::to_string(n));
    }
    for (Index j = 0; j < n; ++j) {
      if (!(policy.tau[j] > 0.0)) {
        throw InvalidParameterError("tau[" + std::to_string(j) + "] must be positive");
      }
    }
  }
  if (const Grouping* g = schedule.grouping()) {
    if (!(g->partition() == problem.partition())) {
      throw InvalidGroupingError("schedule grouping does not match the problem partition");
    }
  }
  if (schedule.kind() == ScheduleKind::kHybrid && schedule.grouping() == nullptr) {
    throw InvalidGroupingError("hybrid schedule needs a grouping");
  }
  if (stop.kind == StopKind::kRelativeError) {
    if (!stop.reference) throw InvalidConfigError("relative-error stop rule needs a reference x*");
    if (stop.reference->size() != problem.partition().total_size()) {
      throw ShapeError("stop-rule reference has the wrong length");
    }
  }
}

SolverState SolverState::initial(const Problem& problem, const Schedule& schedule) {
  return from_iterates(problem, schedule, BlockVector(problem.partition()),
                       VectorXd::Zero(problem.a.rows()));
}

SolverState SolverState::from_iterates(const Problem& problem, const Schedule& schedule,
                                       BlockVector x, VectorXd y) {
  if (!(x.partition() == problem.partition())) {
    throw ShapeError("initial x does not conform to the problem partition");
  }
  if (y.size() != problem.a.rows()) throw ShapeError("initial y has the wrong length");
  SolverState state;
  state.x = std::move(x);
  state.y = std::move(y);
  state.grouping = schedule.state_grouping(problem.partition());
  state.refresh_products(problem);
  return state;
}

void SolverState::regroup(const Problem& problem, const Grouping& target) {
  if (grouping == target && static_cast<Index>(group_products.size()) == target.num_groups()) {
    return;
  }
  grouping = target;
  refresh_products(problem);
}

void SolverState::refresh_products(const Problem& problem) {
  group_products.assign(static_cast<std::size_t>(grouping.num_groups()),
                        VectorXd::Zero(problem.a.rows()));
  for (Index i = 0; i < grouping.num_groups(); ++i) {
    auto& g = group_products[static_cast<std::size_t>(i)];
    for (Index j : grouping.group(i)) problem.a.block(j).apply_add(x.segment(j), g);
  }
  refresh_residual(problem.b);
}

void SolverState::refresh_residual(const VectorXd& b) {
  residual = -b;
  for (const auto& g : group_products) residual += g;
}

namespace {

/// Runs `solve(j)` for each block of `blocks`. Each call must touch only block j's
/// state, so serial and concurrent execution give bit-identical results.
template <class Fn>
void for_each_block(std::span<const Index> blocks, int threads, Fn&& solve) {
#ifdef BLOCKADMM_HAVE_OPENMP
  if (threads > 1 && blocks.size() > 1) {
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto count = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
      try {
        solve(blocks[static_cast<std::size_t>(k)]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    return;
  }
#else
  (void)threads;
#endif
  for (Index j : blocks) solve(j);
}

/// Overwrites x_j with the minimizer of block j's subproblem for coupling vector v.
void update_block(SolverState& state, const Problem& problem, const SolverConfig& config, Index j,
                  const VectorXd& v) {
  const VectorXd x_old = state.x.segment(j);
  const auto& f = problem.objective.term(j);
  const auto& a_j = problem.a.block(j);
  if (config.policy.has_explicit_regularizers()) {
    state.x.segment(j) = solve_block_subproblem_general(
        f, a_j, x_old, v, config.rho,
        config.policy.explicit_regularizers[static_cast<std::size_t>(j)]);
  } else {
    state.x.segment(j) = solve_block_subproblem(f, a_j, x_old, v, config.rho, config.policy.tau[j]);
  }
}

/// g = sum_{j in S_i} A_j x_j.
void group_product(const SolverState& state, const Problem& problem, Index i, VectorXd& g) {
  g.setZero(problem.a.rows());
  for (Index j : state.grouping.group(i)) problem.a.block(j).apply_add(state.x.segment(j), g);
}

/// sum_i g_i - b - y / rho, from the cached residual.
VectorXd stale_coupling(const SolverState& state, double rho) {
  return state.residual - state.y / rho;
}

/// Gauss-Seidel over the groups of state.grouping, Jacobi within each group. The
/// coupling vector is carried forward incrementally: v_{i+1} = v_i + G_i x_i^new - g_i.
void grouped_sweep(SolverState& state, const Problem& problem, const SolverConfig& config) {
  VectorXd v = stale_coupling(state, config.rho);
  VectorXd fresh(problem.a.rows());
  for (Index i = 0; i < state.grouping.num_groups(); ++i) {
    for_each_block(state.grouping.group(i), config.threads,
                   [&](Index j) { update_block(state, problem, config, j, v); });
    group_product(state, problem, i, fresh);
    auto& cached = state.group_products[static_cast<std::size_t>(i)];
    v += fresh;
    v -= cached;
    cached.swap(fresh);
  }
  state.refresh_residual(problem.b);
}

}  // namespace

void epoch_gauss_seidel(SolverState& state, const Problem& problem, const SolverConfig& config) {
  state.regroup(problem, identity_grouping(problem.partition()));
  // w = sum_{q<j} A_q x_q^new + sum_{s>=j} A_s x_s^old - b - y/rho
  VectorXd w = stale_coupling(state, config.rho);
  VectorXd fresh(problem.a.rows());
  for (Index j = 0; j < problem.num_blocks(); ++j) {
    update_block(state, problem, config, j, w);
    fresh.setZero();
    problem.a.block(j).apply_add(state.x.segment(j), fresh);
    auto& cached = state.group_products[static_cast<std::size_t>(j)];
    w += fresh;
    w -= cached;
    cached.swap(fresh);
  }
  state.refresh_residual(problem.b);
}

void epoch_jacobi(SolverState& state, const Problem& problem, const SolverConfig& config) {
  state.regroup(problem, identity_grouping(problem.partition()));
  const VectorXd v = stale_coupling(state, config.rho);
  std::vector<Index> all(static_cast<std::size_t>(problem.num_blocks()));
  for (Index j = 0; j < problem.num_blocks(); ++j) all[static_cast<std::size_t>(j)] = j;
  for_each_block(all, config.threads, [&](Index j) { update_block(state, problem, config, j, v); });
  for (Index j = 0; j < problem.num_blocks(); ++j) {
    group_product(state, problem, j, state.group_products[static_cast<std::size_t>(j)]);
  }
  state.refresh_residual(problem.b);
}

void epoch_hybrid(SolverState& state, const Problem& problem, const SolverConfig& config) {
  const Grouping* grouping = config.schedule.grouping();
  if (grouping == nullptr) throw InvalidGroupingError("hybrid epoch needs a grouping");
  state.regroup(problem, *grouping);
  grouped_sweep(state, problem, config);
}

void epoch_two_group(SolverState& state, const Problem& problem, const SolverConfig& config) {
  const Grouping* grouping = config.schedule.grouping();
  if (grouping == nullptr || grouping->num_groups() != 2) {
    throw InvalidGroupingError("two-group epoch needs a grouping with exactly 2 groups");
  }
  state.regroup(problem, *grouping);
  auto& g1 = state.group_products[0];
  auto& g2 = state.group_products[1];
  const VectorXd scaled_dual = state.y / config.rho;

  // v_1 = G_1 x_1^k + G_2 x_2^k - b - y^k / rho
  const VectorXd v1 = g1 + g2 - problem.b - scaled_dual;
  for_each_block(grouping->group(0), config.threads,
                 [&](Index j) { update_block(state, problem, config, j, v1); });
  group_product(state, problem, 0, g1);

  // v_2 = G_1 x_1^{k+1} + G_2 x_2^k - b - y^k / rho
  const VectorXd v2 = g1 + g2 - problem.b - scaled_dual;
  for_each_block(grouping->group(1), config.threads,
                 [&](Index j) { update_block(state, problem, config, j, v2); });
  group_product(state, problem, 1, g2);

  state.refresh_residual(problem.b);
}

void primal_epoch(SolverState& state, const Problem& problem, const SolverConfig& config) {
  switch (config.schedule.kind()) {
    case ScheduleKind::kGaussSeidel:
      epoch_gauss_seidel(state, problem, config);
      return;
    case ScheduleKind::kJacobi:
      epoch_jacobi(state, problem, config);
      return;
    case ScheduleKind::kHybrid:
      epoch_hybrid(state, problem, config);
      return;
    case ScheduleKind::kTwoGroup:
      epoch_two_group(state, problem, config);
      return;
  }
}

void dual_update(SolverState& state, const SolverConfig& config) {
  state.y -= (config.gamma * config.rho) * state.residual;
}

GDistance g_metric(const BlockVector& x, const VectorXd& y, const BlockVector& x_ref,
                   const VectorXd& y_ref, const RegularizerPolicy& policy, double rho,
                   double gamma, const BlockMatrix& a, const Grouping* grouping) {
  if (!(x.partition() == a.partition()) || !(x_ref.partition() == a.partition())) {
    throw ShapeError("g_metric: iterates do not conform to the matrix partition");
  }
  if (y.size() != a.rows() || y_ref.size() != a.rows()) {
    throw ShapeError("g_metric: dual vectors have the wrong length");
  }
  if (!(rho > 0.0) || !(gamma > 0.0)) throw InvalidParameterError("g_metric: rho, gamma > 0");
  const Grouping groups = grouping ? *grouping : identity_grouping(a.partition());
  const bool explicit_p = policy.has_explicit_regularizers();
  if (!explicit_p && policy.tau.size() != a.num_blocks()) {
    throw ShapeError("g_metric: tau has the wrong length");
  }

  double value = 0.0;
  VectorXd image(a.rows());
  for (Index i = 0; i < groups.num_groups(); ++i) {
    image.setZero();
    for (Index j : groups.group(i)) {
      const VectorXd d = x.segment(j) - x_ref.segment(j);
      if (explicit_p) {
        const auto& p = policy.explicit_regularizers[static_cast<std::size_t>(j)];
        value += d.dot(p * d) + rho * a.block(j).apply(d).squaredNorm();
      } else {
        value += policy.tau[j] * d.squaredNorm();
      }
      a.block(j).apply_add(d, image);
    }
    value -= rho * image.squaredNorm();
  }
  value += (y - y_ref).squaredNorm() / (gamma * rho);
  return {value, value < -1e-10};
}

Decision stop_check(const SolverState& state, const StopRule& rule, const DivergenceGuard& guard) {
  const double half_sq = state.half_sq_residual();
  const double x_norm = state.x.values().norm();
  if (!std::isfinite(half_sq) || !std::isfinite(x_norm) || !state.y.allFinite()) {
    return Decision::kDiverged;
  }
  if (state.epoch >= guard.min_epochs && (half_sq > guard.threshold || x_norm > guard.threshold)) {
    return Decision::kDiverged;
  }
  switch (rule.kind) {
    case StopKind::kConstraintResidual:
      return half_sq <= rule.tol ? Decision::kConverged : Decision::kContinue;
    case StopKind::kRelativeError: {
      if (!rule.reference) throw InvalidConfigError("relative-error stop rule needs a reference");
      const double ref_norm = rule.reference->norm();
      const double err = (state.x.values() - *rule.reference).norm();
      const double rel = ref_norm > 0.0 ? err / ref_norm : err;
      return rel <= rule.tol ? Decision::kConverged : Decision::kContinue;
    }
    case StopKind::kMaxEpochs:
      return Decision::kContinue;
  }
  return Decision::kContinue;
}

RunResult run(const Problem& problem, const SolverConfig& config, const RunOptions& options) {
  config.validate(problem);
  const auto start = std::chrono::steady_clock::now();

  SolverState state =
      (options.x0 || options.y0)
          ? SolverState::from_iterates(
                problem, config.schedule,
                options.x0 ? *options.x0 : BlockVector(problem.partition()),
                options.y0 ? *options.y0 : VectorXd::Zero(problem.a.rows()))
          : SolverState::initial(problem, config.schedule);

  const bool track_ref = options.x_ref.has_value() && options.y_ref.has_value();
  const Grouping* metric_grouping = config.schedule.grouping();
  RunReport report;
  report.tau_rule = config.policy.rule;
  report.schedule = config.schedule.kind();

  auto metric = [&](const BlockVector& x, const VectorXd& y, const BlockVector& xr,
                    const VectorXd& yr) {
    const GDistance d =
        g_metric(x, y, xr, yr, config.policy, config.rho, config.gamma, problem.a, metric_grouping);
    report.metric_violation = report.metric_violation || d.psd_violation;
    return d.value;
  };

  auto record = [&](double g_step) {
    if (!options.record_history) return;
    EpochRecord rec;
    rec.epoch = state.epoch;
    rec.half_sq_residual = state.half_sq_residual();
    if (track_ref) rec.g_dist_to_ref = metric(state.x, state.y, *options.x_ref, *options.y_ref);
    rec.g_step = g_step;
    state.history.push_back(rec);
  };

  record(std::numeric_limits<double>::quiet_NaN());
  Decision decision = stop_check(state, config.stop, config.guard);
  std::optional<BlockVector> previous_x;
  std::optional<VectorXd> previous_y;
  while (decision == Decision::kContinue && state.epoch < config.max_epochs) {
    if (config.track_g_metric) {
      previous_x = state.x;
      previous_y = state.y;
    }
    primal_epoch(state, problem, config);
    dual_update(state, config);
    ++state.epoch;
    double g_step = std::numeric_limits<double>::quiet_NaN();
    if (config.track_g_metric) g_step = metric(*previous_x, *previous_y, state.x, state.y);
    record(g_step);
    decision = stop_check(state, config.stop, config.guard);
  }

  switch (decision) {
    case Decision::kConverged:
      report.outcome = Outcome::kConverged;
      break;
    case Decision::kDiverged:
      report.outcome = Outcome::kDiverged;
      break;
    case Decision::kContinue:
      report.outcome = Outcome::kMaxEpochs;
      break;
  }
  report.epochs = state.epoch;
  report.final_half_sq_residual = state.half_sq_residual();
  const VectorXd* reference = nullptr;
  if (options.x_ref) {
    reference = &options.x_ref->values();
  } else if (config.stop.reference) {
    reference = &*config.stop.reference;
  }
  if (reference != nullptr) {
    const double ref_norm = reference->norm();
    const double err = (state.x.values() - *reference).norm();
    report.final_relative_error = ref_norm > 0.0 ? err / ref_norm : err;
  }
  report.history = state.history;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(report), std::move(state)};
}

}  // namespace blockadmm
