// Runs the reproduction and property criteria at full size and prints one
// PASS/FAIL line per criterion. Usage: acceptance [--criterion N]... [--out DIR]

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "blockadmm/engine.hpp"
#include "blockadmm/errors.hpp"
#include "blockadmm/experiments.hpp"
#include "blockadmm/spectral.hpp"
#include "blockadmm/tau_policy.hpp"
#include "cli.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace blockadmm;

namespace {

struct Context {
  fs::path out_dir;
  int threads = 1;
};

/// Collects individual checks; the criterion passes when all of them do.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    std::cout << "  [" << (ok ? "ok" : "FAILED") << "] " << what << '\n';
    if (!ok) {
      ++failures_;
      if (first_failure_.empty()) first_failure_ = what;
    }
  }
  bool passed() const { return failures_ == 0; }
  int failures() const { return failures_; }
  const std::string& first_failure() const { return first_failure_; }

 private:
  int failures_ = 0;
  std::string first_failure_;
};

std::string fmt(double v, int precision = 1) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

bool within(double value, double target, double fraction) {
  return std::isfinite(value) && std::abs(value - target) <= fraction * target;
}

std::string deviation(double value, double target) {
  const double pct = 100.0 * (value - target) / target;
  return (pct >= 0 ? "+" : "") + fmt(pct) + "%";
}

SweepTable sweep_from_config(const Context& ctx, const std::string& file) {
  SweepSpec spec = load_sweep_config((fs::path(BLOCKADMM_SOURCE_DIR) / "configs" / file).string());
  spec.threads = ctx.threads;
  std::cout << "  running " << spec.name << " (" << spec.runs << " seeds from " << spec.base_seed
            << ")\n"
            << std::flush;
  const SweepTable table = run_sweep(spec, [](const std::string& msg) {
    std::cerr << "    " << msg << '\n';
  });
  std::cout << format_sweep_table(table);
  fs::create_directories(ctx.out_dir);
  std::ofstream csv(ctx.out_dir / (spec.name + ".csv"));
  write_sweep_csv(table, csv);
  return table;
}

const SweepCell& cell(const SweepTable& t, Algorithm a, double m) {
  const SweepCell* c = t.find(a, m);
  if (c == nullptr) throw InvalidConfigError("sweep lacks cell " + to_string(a));
  return *c;
}

bool all_converged(const SweepCell& c) { return c.count(Outcome::kConverged) == c.runs(); }

std::string cell_text(const SweepCell& c) {
  std::ostringstream s;
  s << display_name(c.algorithm.algorithm) << " mean " << fmt(c.mean_epochs()) << " ("
    << c.count(Outcome::kConverged) << "/" << c.runs() << " converged, "
    << c.count(Outcome::kDiverged) << " diverged)";
  return s.str();
}

void expect_mean(Checks& checks, const SweepCell& c, double published, double fraction) {
  checks.expect(all_converged(c) && within(c.mean_epochs(), published, fraction),
                cell_text(c) + " vs published " + fmt(published) + " (" + deviation(c.mean_epochs(), published) +
                    ", allowed +-" + fmt(100 * fraction, 0) + "%)");
}

// ------------------------------------------------------------------ criterion 1

Checks criterion1(const Context& ctx) {
  Checks checks;
  const SweepTable t = sweep_from_config(ctx, "table1_l2_theory.json");
  const auto& j = cell(t, Algorithm::kJadmm, 1.0);
  const auto& h = cell(t, Algorithm::kHadmm, 1.0);
  const auto& f = cell(t, Algorithm::kFadmm, 1.0);
  checks.expect(j.runs() >= 20 && h.runs() >= 20 && f.runs() >= 20, "at least 20 runs per cell");
  expect_mean(checks, j, 4358.2, 0.2);
  expect_mean(checks, h, 214.1, 0.2);
  expect_mean(checks, f, 211.3, 0.2);
  const double ratio = j.mean_epochs() / h.mean_epochs();
  checks.expect(ratio >= 10.0, "J/H epoch ratio " + fmt(ratio, 2) + " >= 10");
  return checks;
}

// ------------------------------------------------------------------ criterion 2

Checks criterion2(const Context& ctx) {
  Checks checks;
  const SweepTable t = sweep_from_config(ctx, "table2_l2_uniform.json");
  // Published Table 2: (J, H, F) per multiplier.
  const std::map<double, std::array<double, 3>> converging = {
      {1.0, {530.0, 526.3, 526.2}}, {0.6, {324.0, 320.1, 319.9}},
      {0.4, {217.7, 214.5, 214.1}}, {0.22, {123.1, 119.3, 119.0}}};
  for (const auto& [m, published] : converging) {
    std::cout << "  multiplier " << m << '\n';
    expect_mean(checks, cell(t, Algorithm::kJadmm, m), published[0], 0.2);
    expect_mean(checks, cell(t, Algorithm::kHadmm, m), published[1], 0.2);
    expect_mean(checks, cell(t, Algorithm::kFadmm, m), published[2], 0.2);
  }
  const std::map<double, std::array<double, 2>> small = {{0.2, {95.8, 95.5}}, {0.1, {75.3, 73.0}}};
  for (const auto& [m, published] : small) {
    std::cout << "  multiplier " << m << '\n';
    const auto& j = cell(t, Algorithm::kJadmm, m);
    checks.expect(j.diverged(), cell_text(j) + " diverges");
    expect_mean(checks, cell(t, Algorithm::kHadmm, m), published[0], 0.2);
    expect_mean(checks, cell(t, Algorithm::kFadmm, m), published[1], 0.2);
  }
  return checks;
}

// ------------------------------------------------------------------ criterion 3

Checks criterion3(const Context& ctx) {
  Checks checks;
  const SweepTable t = sweep_from_config(ctx, "table3_l1_theory.json");
  const auto& j = cell(t, Algorithm::kJadmm, 1.0);
  checks.expect(j.runs() >= 5, "J-ADMM cell has " + std::to_string(j.runs()) + " >= 5 runs");
  expect_mean(checks, j, 12610.1, 0.2);
  expect_mean(checks, cell(t, Algorithm::kHadmm2, 1.0), 605.8, 0.2);
  expect_mean(checks, cell(t, Algorithm::kHadmm, 1.0), 1882.1, 0.2);
  expect_mean(checks, cell(t, Algorithm::kFadmm, 1.0), 1879.4, 0.2);
  for (const auto& c : t.cells) {
    double worst = 0.0;
    for (const auto& s : c.samples) {
      if (s.outcome == Outcome::kConverged) worst = std::max(worst, s.half_sq_residual);
    }
    checks.expect(worst <= 1e-15, display_name(c.algorithm.algorithm) +
                                      " worst final 1/2||r||^2 over converged runs " + sci(worst) +
                                      " <= 1e-15");
  }
  return checks;
}

// ------------------------------------------------------------------ criterion 4

Checks criterion4(const Context& ctx) {
  Checks checks;
  const SweepTable t = sweep_from_config(ctx, "table4_l1_uniform.json");
  for (double m : {0.2, 0.1, 0.05}) {
    const auto& f = cell(t, Algorithm::kFadmm, m);
    const auto& h = cell(t, Algorithm::kHadmm, m);
    const auto& h2 = cell(t, Algorithm::kHadmm2, m);
    const auto& j = cell(t, Algorithm::kJadmm, m);
    const bool converge = all_converged(f) && all_converged(h) && all_converged(h2) && all_converged(j);
    checks.expect(converge, "multiplier " + fmt(m, 2) + ": all four algorithms converge in every run");
    const bool ordered = f.mean_epochs() <= h.mean_epochs() && h.mean_epochs() <= h2.mean_epochs() &&
                         h2.mean_epochs() <= j.mean_epochs();
    checks.expect(ordered, "multiplier " + fmt(m, 2) + ": F " + fmt(f.mean_epochs()) + " <= H " +
                               fmt(h.mean_epochs()) + " <= H(l=2) " + fmt(h2.mean_epochs()) +
                               " <= J " + fmt(j.mean_epochs()));
  }
  const std::map<double, std::array<double, 2>> small = {{0.03, {244.4, 246.3}}, {0.02, {150.3, 162.2}}};
  for (const auto& [m, published] : small) {
    std::cout << "  multiplier " << m << '\n';
    const auto& j = cell(t, Algorithm::kJadmm, m);
    const auto& h2 = cell(t, Algorithm::kHadmm2, m);
    checks.expect(j.diverged(), cell_text(j) + " diverges");
    checks.expect(h2.diverged(), cell_text(h2) + " diverges");
    expect_mean(checks, cell(t, Algorithm::kFadmm, m), published[0], 0.25);
    expect_mean(checks, cell(t, Algorithm::kHadmm, m), published[1], 0.25);
  }
  return checks;
}

// ------------------------------------------------------------------ criterion 5

std::map<std::string, double> max_tau_by_rule(const std::string& csv) {
  std::map<std::string, double> best;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    const std::string rule = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string value = line.substr(c2 + 1);
    const double tau = value == "degenerate" ? 0.0 : std::stod(value);
    auto [it, inserted] = best.emplace(rule, tau);
    if (!inserted) it->second = std::max(it->second, tau);
  }
  return best;
}

std::string run_tool(const std::vector<std::string>& args, Checks& checks) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  std::string joined;
  for (const auto& a : args) joined += " " + a;
  checks.expect(code == 0, "blockadmm" + joined + " exits 0" + (code ? " (got " + std::to_string(code) + ": " + err.str() + ")" : ""));
  return out.str();
}

Checks criterion5(const Context& ctx) {
  Checks checks;
  const fs::path l2 = ctx.out_dir / "l2-seed1";
  const fs::path l1 = ctx.out_dir / "l1-seed1";
  run_tool({"--seed", "1", "gen", "l2", "--out", l2.string()}, checks);
  run_tool({"--seed", "1", "gen", "l1", "--out", l1.string()}, checks);

  const auto l2_tau = max_tau_by_rule(run_tool({"tau-report", l2.string()}, checks));
  std::cout << "  l2 max tau:";
  for (const auto& [rule, tau] : l2_tau) std::cout << ' ' << rule << '=' << fmt(tau, 4);
  std::cout << '\n';
  const double j = l2_tau.at("jadmm-theory");
  checks.expect(j > l2_tau.at("fadmm-theory"), "l2: max tau J " + fmt(j, 4) + " > F " + fmt(l2_tau.at("fadmm-theory"), 4));
  checks.expect(j > l2_tau.at("hadmm-theory"), "l2: max tau J " + fmt(j, 4) + " > H " + fmt(l2_tau.at("hadmm-theory"), 4));

  // The l1 objective is merely convex; F/H need an assumed mu (1, as in the sweeps).
  const auto l1_tau = max_tau_by_rule(run_tool({"tau-report", l1.string(), "--mu", "1"}, checks));
  std::cout << "  l1 max tau:";
  for (const auto& [rule, tau] : l1_tau) std::cout << ' ' << rule << '=' << fmt(tau, 6);
  std::cout << '\n';
  const double h2 = l1_tau.at("hadmm2-theory");
  for (const char* other : {"jadmm-theory", "hadmm-theory", "fadmm-theory"}) {
    checks.expect(h2 < l1_tau.at(other), std::string("l1: max tau H(l=2) ") + fmt(h2, 6) + " < " + other + " " +
                                             fmt(l1_tau.at(other), 6));
  }
  return checks;
}

// ------------------------------------------------------------------ criterion 6

using testing::dense_coupling;
using testing::dense_norm;
using testing::random_dense;
using testing::random_vector;
using testing::rel_diff;

/// Block sizes with n <= 8 blocks and at most 80 columns in total.
BlockPartition toy_partition(Rng& rng) {
  const Index n = 2 + static_cast<Index>(rng.below(7));
  std::vector<Index> sizes;
  for (Index j = 0; j < n; ++j) sizes.push_back(1 + static_cast<Index>(rng.below(10)));
  return BlockPartition(sizes);
}

Problem toy_problem(Rng& rng, const BlockPartition& part, Index rows, bool with_l1) {
  Problem p;
  p.a = BlockMatrix::from_dense(random_dense(rng, rows, part.total_size()), part);
  p.b = random_vector(rng, rows);
  std::vector<BlockObjective> terms;
  for (Index j = 0; j < part.num_blocks(); ++j) {
    terms.push_back(with_l1 && j % 2 == 0 ? BlockObjective::l1() : BlockObjective::half_squared_l2());
  }
  p.objective = SeparableObjective(std::move(terms));
  return p;
}

void schedule_equivalences(Checks& checks) {
  Rng rng(0xACCE1);
  double worst = 0.0;
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const BlockPartition part = toy_partition(rng);
    const Index n = part.num_blocks();
    const Problem p = toy_problem(rng, part, 3 + static_cast<Index>(rng.below(20)), true);
    const double tau = 1.0 + 30.0 * rng.uniform();
    // Same rho for every schedule of a trial.
    const std::uint64_t rho_seed = rng.below(1u << 30);
    auto with_rho = [&](Schedule s) {
      Rng local(rho_seed);
      SolverConfig c;
      c.rho = 0.2 + local.uniform();
      c.policy = tau_uniform(tau, n);
      c.schedule = std::move(s);
      c.stop = StopRule::max_epochs();
      c.max_epochs = 5;
      return run(p, c, testing::no_history()).state;
    };
    const auto compare = [&](const SolverState& a, const SolverState& b) {
      worst = std::max({worst, rel_diff(a.x.values(), b.x.values()), rel_diff(a.y, b.y)});
      ++compared;
    };
    compare(with_rho(Schedule::hybrid(make_contiguous_grouping(part, n))), with_rho(Schedule::gauss_seidel()));
    compare(with_rho(Schedule::hybrid(make_contiguous_grouping(part, 1))), with_rho(Schedule::jacobi()));
    const Grouping two = make_contiguous_grouping(part, 2);
    compare(with_rho(Schedule::two_group(two)), with_rho(Schedule::hybrid(two)));
  }
  checks.expect(worst <= 1e-12, "schedule equivalences over " + std::to_string(compared) +
                                    " pairs, 5 epochs: worst relative difference " + sci(worst) +
                                    " <= 1e-12");
}

void g_norm_nonexpansive(Checks& checks) {
  Rng rng(0xACCE2);
  int violations = 0;
  int epochs_checked = 0;
  double worst_ratio = 0.0;
  bool psd_ok = true;
  int unconverged = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const BlockPartition part = toy_partition(rng);
    const Index cols = part.total_size();
    const Index rows = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(std::max<Index>(cols - 1, 1))));
    const Problem p = toy_problem(rng, part, rows, false);
    const KktPoint kkt = l2_kkt_oracle(p.a, p.b);
    const double rho = 0.1 + rng.uniform();
    const Index groups = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(part.num_blocks())));
    const Grouping g = make_contiguous_grouping(part, groups);
    struct Case {
      Schedule schedule;
      RegularizerPolicy policy;
    };
    const Case cases[] = {
        {Schedule::gauss_seidel(), tau_theory(TauRule::kFadmmTheory, p.a, nullptr, rho, 1.0)},
        {Schedule::hybrid(g), tau_theory(TauRule::kHadmmTheory, p.a, &g, rho, 1.0)}};
    for (const auto& c : cases) {
      SolverConfig config;
      config.rho = rho;
      config.policy = c.policy;
      config.schedule = c.schedule;
      config.stop = StopRule::constraint_residual(1e-20);
      config.max_epochs = 200000;
      RunOptions options;
      options.x_ref = kkt.x;
      options.y_ref = kkt.y;
      const RunReport r = run(p, config, options).report;
      if (!r.converged()) ++unconverged;
      psd_ok = psd_ok && !r.metric_violation;
      for (std::size_t k = 1; k < r.history.size(); ++k) {
        const double prev = r.history[k - 1].g_dist_to_ref;
        const double cur = r.history[k].g_dist_to_ref;
        ++epochs_checked;
        if (prev > 0.0) worst_ratio = std::max(worst_ratio, cur / prev);
        if (cur > prev * (1.0 + 1e-9)) ++violations;
      }
    }
  }
  checks.expect(unconverged == 0, "G-norm runs: all 40 (20 instances x F, H) converge to 1/2||r||^2 <= 1e-20");
  checks.expect(psd_ok, "theoretical tau keeps every G-metric nonnegative");
  checks.expect(violations == 0, "G-norm distance to the KKT oracle nonincreasing in " +
                                     std::to_string(epochs_checked) + " epochs (slack 1e-9): " +
                                     std::to_string(violations) + " violations, max ratio " +
                                     fmt(worst_ratio, 12));
}

double grid_argmin(const std::function<double(double)>& phi) {
  double best_x = 0.0, best = std::numeric_limits<double>::infinity();
  for (int k = -100000; k <= 100000; ++k) {
    const double x = k * 1e-4;
    const double v = phi(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best_x;
}

void subproblem_grid_oracles(Checks& checks) {
  Rng rng(0xACCE3);
  const auto shifted_abs = BlockObjective::custom(
      [](const VectorXd& d, double tau) {
        const VectorXd one = VectorXd::Ones(d.size());
        return VectorXd(prox_l1(d - one, 1.0 / tau) + one);
      },
      0.0);
  struct Kind {
    BlockObjective f;
    std::function<double(double)> value;
  };
  VectorXd w(1), c(1);
  w << 2.5;
  c << -0.7;
  const std::vector<Kind> kinds = {
      {BlockObjective::half_squared_l2(), [](double x) { return 0.5 * x * x; }},
      {BlockObjective::l1(), [](double x) { return std::abs(x); }},
      {BlockObjective::weighted_quadratic(w, c), [](double x) { return 1.25 * (x + 0.7) * (x + 0.7); }},
      {shifted_abs, [](double x) { return std::abs(x - 1.0); }}};
  double worst = 0.0;
  int solved = 0;
  for (const auto& kind : kinds) {
    for (int trial = 0; trial < 25; ++trial) {
      const Index rows = 1 + static_cast<Index>(rng.below(4));
      const VectorXd a = random_vector(rng, rows);
      const VectorXd v = random_vector(rng, rows);
      const double x_old = rng.normal();
      const double rho = 0.1 + rng.uniform();
      const double tau = rho * a.squaredNorm() * (1.0 + rng.uniform()) + 0.05;
      VectorXd xo(1);
      xo << x_old;
      const double got = solve_block_subproblem(kind.f, MatrixBlock{MatrixXd(a)}, xo, v, rho, tau)[0];
      const double expected = grid_argmin([&](double x) {
        const double s = x - x_old;
        return kind.value(x) + 0.5 * rho * (a * s + v).squaredNorm() +
               0.5 * (tau - rho * a.squaredNorm()) * s * s;
      });
      worst = std::max(worst, std::abs(got - expected));
      ++solved;
    }
  }
  checks.expect(worst <= 1e-4, "block subproblems vs 1-D grid search (step 1e-4) over " +
                                   std::to_string(solved) + " cases: worst gap " + sci(worst) +
                                   " <= 1e-4");
}

void coupling_norms(Checks& checks) {
  Rng rng(0xACCE4);
  double worst = 0.0;
  int compared = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const BlockPartition part = toy_partition(rng);
    const Index rows = 2 + static_cast<Index>(rng.below(30));
    const MatrixXd m = random_dense(rng, rows, part.total_size());
    const BlockMatrix a = trial % 2 == 0
                              ? BlockMatrix::from_dense(m, part)
                              : BlockMatrix::from_sparse(m.sparseView(), part);
    auto rel = [](double got, double expected) {
      return expected == 0.0 ? std::abs(got) : std::abs(got - expected) / expected;
    };
    const double blocks = dense_norm(dense_coupling(m, part, identity_grouping(part)));
    worst = std::max(worst, rel(coupling_norm_blocks(a), blocks));
    ++compared;
    const Index groups = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(part.num_blocks())));
    const Grouping g = make_contiguous_grouping(part, groups);
    worst = std::max(worst, rel(coupling_norm_groups(a, g), dense_norm(dense_coupling(m, part, g))));
    ++compared;
  }
  checks.expect(worst <= 1e-8, "coupling norms vs dense SVD over " + std::to_string(compared) +
                                   " operators: worst relative error " + sci(worst) + " <= 1e-8");
}

void kkt_at_convergence(Checks& checks) {
  L2InstanceSpec l2;
  l2.rows = 40;
  l2.num_blocks = 8;
  l2.block_size = 10;
  l2.nnz_per_row = 6;
  l2.hybrid_groups = 4;
  L1InstanceSpec l1;
  l1.rows = 30;
  l1.num_blocks = 8;
  l1.block_size = 10;
  l1.sparsity = 5;
  l1.hybrid_groups = 4;
  double worst_l2 = 0.0, worst_l1 = 0.0, worst_err = 0.0;
  int runs = 0, converged = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Instance inst2 = gen_l2(l2, seed);
    const KktPoint oracle = l2_kkt_oracle(inst2.problem.a, inst2.problem.b);
    for (auto alg : {Algorithm::kJadmm, Algorithm::kHadmm, Algorithm::kFadmm}) {
      SolverConfig c;
      c.rho = inst2.rho;
      c.stop = inst2.stop;
      c.max_epochs = 200000;
      c.schedule = make_schedule(alg, inst2.problem.partition(), inst2.hybrid_groups);
      c.policy = tau_theory(theory_rule(alg), inst2.problem.a, c.schedule.grouping(), inst2.rho, 1.0);
      const RunResult r = run(inst2.problem, c, testing::no_history());
      ++runs;
      if (!r.report.converged()) continue;
      ++converged;
      const MatrixXd a = inst2.problem.a.to_dense();
      const VectorXd& x = r.state.x.values();
      worst_l2 = std::max(worst_l2, (x - a.transpose() * r.state.y).norm() / (1.0 + x.norm()));
      worst_err = std::max(worst_err, rel_diff(x, oracle.x.values()));
    }
    const Instance inst1 = gen_l1(l1, seed);
    for (auto alg : {Algorithm::kJadmm, Algorithm::kHadmm2, Algorithm::kHadmm, Algorithm::kFadmm}) {
      SolverConfig c;
      c.rho = inst1.rho;
      c.stop = inst1.stop;
      c.max_epochs = 200000;
      c.schedule = make_schedule(alg, inst1.problem.partition(), inst1.hybrid_groups);
      c.policy = tau_theory(theory_rule(alg), inst1.problem.a, c.schedule.grouping(), inst1.rho, 1.0);
      const RunResult r = run(inst1.problem, c, testing::no_history());
      ++runs;
      if (!r.report.converged()) continue;
      ++converged;
      const VectorXd aty = inst1.problem.a.to_dense().transpose() * r.state.y;
      const VectorXd& x = r.state.x.values();
      for (Index i = 0; i < x.size(); ++i) {
        // d||x||_1 is {sign(x_i)} off zero and [-1, 1] at zero.
        const double gap = x[i] == 0.0 ? std::max(0.0, std::abs(aty[i]) - 1.0)
                                       : std::abs(aty[i] - std::copysign(1.0, x[i]));
        worst_l1 = std::max(worst_l1, gap);
      }
    }
  }
  checks.expect(converged == runs, "KKT runs: " + std::to_string(converged) + "/" +
                                       std::to_string(runs) + " toy l2/l1 runs converge");
  checks.expect(worst_l2 <= 1e-4, "l2: ||x - A^T y|| / (1 + ||x||) worst " + sci(worst_l2) + " <= 1e-4");
  checks.expect(worst_err <= 1e-3, "l2: relative distance to the KKT oracle worst " + sci(worst_err) + " <= 1e-3");
  checks.expect(worst_l1 <= 1e-4, "l1: A^T y in the subdifferential of ||x||_1, worst gap " + sci(worst_l1) + " <= 1e-4");
}

Checks criterion6(const Context&) {
  Checks checks;
  schedule_equivalences(checks);
  g_norm_nonexpansive(checks);
  subproblem_grid_oracles(checks);
  coupling_norms(checks);
  kkt_at_convergence(checks);
  return checks;
}

struct Criterion {
  int id;
  const char* title;
  std::function<Checks(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reproduction and property acceptance checks"};
  std::vector<int> selected;
  Context ctx;
  std::string out = "acceptance_out";
  ctx.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--criterion", selected, "Criterion number (repeatable); default all")
      ->check(CLI::Range(1, 6));
  app.add_option("--out", out, "Directory for CSV and generated problems");
  app.add_option("--threads", ctx.threads, "Worker threads for sweeps")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  ctx.out_dir = out;

  const std::vector<Criterion> criteria = {
      {1, "Table 1 (l2, theoretical tau)", criterion1},
      {2, "Table 2 (l2, uniform tau sweep)", criterion2},
      {3, "Table 3 (l1, theoretical tau)", criterion3},
      {4, "Table 4 (l1, uniform tau sweep)", criterion4},
      {5, "Figures 1/2 tau-report ordering", criterion5},
      {6, "property suite", criterion6}};
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6};

  std::vector<std::string> verdicts;
  bool all_passed = true;
  for (const auto& c : criteria) {
    if (std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    std::cout << "== criterion " << c.id << ": " << c.title << '\n' << std::flush;
    const auto start = std::chrono::steady_clock::now();
    std::string verdict;
    try {
      const Checks checks = c.run(ctx);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      verdict = "criterion " + std::to_string(c.id) + ": " + (checks.passed() ? "PASS" : "FAIL") +
                " (" + c.title + "; " + std::to_string(checks.failures()) + " failed checks";
      if (!checks.passed()) verdict += ", first: " + checks.first_failure();
      verdict += "; " + fmt(secs, 1) + " s)";
      all_passed = all_passed && checks.passed();
    } catch (const std::exception& e) {
      verdict = "criterion " + std::to_string(c.id) + ": FAIL (" + c.title + "; error: " + e.what() + ")";
      all_passed = false;
    }
    std::cout << verdict << '\n' << std::flush;
    verdicts.push_back(verdict);
  }
  if (verdicts.size() > 1) {
    std::cout << "== summary\n";
    for (const auto& v : verdicts) std::cout << v << '\n';
  }
  return all_passed ? 0 : 1;
}
