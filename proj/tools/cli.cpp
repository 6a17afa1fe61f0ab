#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <ostream>
#include <thread>

#include "blockadmm/engine.hpp"
#include "blockadmm/errors.hpp"
#include "blockadmm/experiments.hpp"
#include "blockadmm/problem_io.hpp"
#include "blockadmm/spectral.hpp"
#include "blockadmm/tau_policy.hpp"
#include "blockadmm/text_format.hpp"

namespace blockadmm::cli {

namespace fs = std::filesystem;

namespace {

/// A command-line combination CLI11 cannot express as a parse rule.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out;
  int threads = std::max(1u, std::thread::hardware_concurrency());
  bool verbose = false;
};

fs::path output_root(const GlobalOptions& g) {
  if (!g.out.empty()) return g.out;
  if (const char* env = std::getenv("BLOCKADMM_OUT"); env != nullptr && *env != '\0') return env;
  return ".";
}

std::ofstream open_file(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

// ---------------------------------------------------------------------------- gen

struct GenOptions {
  std::string family;
  std::optional<Index> rows;
  std::optional<Index> blocks;
  std::optional<Index> block_size;
  std::optional<Index> nnz_per_row;
  std::optional<std::string> row_nnz;
  std::optional<Index> sparsity;
  std::optional<Index> groups;
};

int cmd_gen(const GenOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const Family family = family_from_string(o.family);
  Instance inst;
  if (family == Family::kL2) {
    L2InstanceSpec spec;
    if (o.rows) spec.rows = *o.rows;
    if (o.blocks) spec.num_blocks = *o.blocks;
    if (o.block_size) spec.block_size = *o.block_size;
    if (o.nnz_per_row) spec.nnz_per_row = *o.nnz_per_row;
    if (o.row_nnz) spec.row_nnz = row_nnz_mode_from_string(*o.row_nnz);
    if (o.groups) spec.hybrid_groups = *o.groups;
    if (o.sparsity) throw UsageError("--sparsity applies to l1 instances only");
    inst = gen_l2(spec, g.seed);
  } else {
    L1InstanceSpec spec;
    if (o.rows) spec.rows = *o.rows;
    if (o.blocks) spec.num_blocks = *o.blocks;
    if (o.block_size) spec.block_size = *o.block_size;
    if (o.sparsity) spec.sparsity = *o.sparsity;
    if (o.groups) spec.hybrid_groups = *o.groups;
    if (o.nnz_per_row || o.row_nnz) throw UsageError("--nnz-per-row/--row-nnz apply to l2 only");
    inst = gen_l1(spec, g.seed);
  }
  const fs::path dir = !g.out.empty()
                           ? fs::path(g.out)
                           : output_root(g) / (o.family + "-seed" + std::to_string(g.seed));
  save_problem(to_problem_file(inst), dir);
  if (g.verbose) {
    err << "wrote " << o.family << " instance (m=" << inst.problem.a.rows()
        << ", N=" << inst.problem.a.cols() << ", n=" << inst.problem.num_blocks() << ")\n";
  }
  out << dir.string() << '\n';
  return kExitOk;
}

// -------------------------------------------------------------------------- solve

struct SolveOptions {
  std::string problem_dir;
  std::string alg;
  std::optional<std::string> tau_rule;
  std::optional<double> tau_value;
  std::optional<double> tau_multiplier;
  std::optional<double> rho;
  std::optional<double> gamma;
  std::optional<Index> groups;
  std::optional<double> mu;
  double safety = 1.0;
  std::optional<Index> max_epochs;
  std::optional<double> tol;
  std::string trace;
  std::string report;
  bool g_metric = false;
};

std::string stop_name(StopKind kind) {
  switch (kind) {
    case StopKind::kConstraintResidual:
      return "constraint_residual";
    case StopKind::kRelativeError:
      return "relative_error";
    case StopKind::kMaxEpochs:
      return "max_epochs";
  }
  return "unknown";
}

int cmd_solve(const SolveOptions& o, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const Algorithm alg = algorithm_from_string(o.alg);
  const int tau_choices = (o.tau_rule ? 1 : 0) + (o.tau_value ? 1 : 0) + (o.tau_multiplier ? 1 : 0);
  if (tau_choices != 1) {
    throw UsageError("give exactly one of --tau-rule, --tau-value, --tau-multiplier");
  }
  if (o.tau_rule && *o.tau_rule != "theory") {
    throw UsageError("--tau-rule accepts only 'theory'");
  }

  const ProblemFile file = load_problem(o.problem_dir);
  const Problem& problem = file.problem;

  std::optional<Index> groups;
  if (alg == Algorithm::kHadmm) {
    groups = o.groups ? o.groups : file.groups;
    if (!groups) throw UsageError("--alg hadmm needs --groups");
  } else if (alg == Algorithm::kHadmm2) {
    groups = 2;
    if (o.groups && *o.groups != 2) throw UsageError("hadmm2 always uses two groups");
  } else if (o.groups) {
    throw UsageError("--groups applies to hadmm only");
  }

  SolverConfig config;
  config.rho = o.rho ? *o.rho : file.rho.value_or(1.0);
  config.gamma = o.gamma ? *o.gamma : file.gamma.value_or(1.0);
  config.stop = file.stop.value_or(StopRule::constraint_residual(1e-10));
  if (o.tol) config.stop.tol = *o.tol;
  if (o.max_epochs) config.max_epochs = *o.max_epochs;
  config.threads = g.threads;
  config.track_g_metric = o.g_metric;
  config.schedule = make_schedule(alg, problem.partition(), groups.value_or(1));

  if (o.tau_rule) {
    const double mu = o.mu ? *o.mu : min_strong_convexity(problem.objective);
    config.policy = tau_theory(theory_rule(alg), problem.a, config.schedule.grouping(), config.rho,
                               mu, o.safety);
  } else if (o.tau_value) {
    config.policy = tau_uniform(*o.tau_value, problem.num_blocks());
  } else {
    const double norm = spectral_norm(make_operator(problem.a)).value;
    config.policy = tau_uniform(*o.tau_multiplier * tuned_tau_base(norm, config.rho),
                                problem.num_blocks());
    config.policy.note += " (" + format_double(*o.tau_multiplier) + " * (rho^2/2)||A||^4)";
  }
  if (g.verbose) err << "tau: " << config.policy.note << '\n';

  RunOptions options;
  if (file.x_star) {
    options.x_ref = BlockVector(problem.partition(), *file.x_star);
  }
  const bool all_half_sq = std::all_of(
      problem.objective.terms().begin(), problem.objective.terms().end(),
      [](const BlockObjective& t) { return t.kind() == ObjectiveKind::kHalfSquaredL2; });
  if (o.g_metric && all_half_sq) {
    KktPoint kkt = l2_kkt_oracle(problem.a, problem.b);
    if (kkt.rank_deficient && g.verbose) err << "warning: A A^T is singular; using least squares\n";
    options.x_ref = std::move(kkt.x);
    options.y_ref = std::move(kkt.y);
  }

  const RunResult result = run(problem, config, options);

  RunEcho echo;
  echo.problem = o.problem_dir;
  echo.algorithm = o.alg;
  echo.rho = config.rho;
  echo.gamma = config.gamma;
  echo.groups = groups;
  echo.max_epochs = config.max_epochs;
  echo.stop = stop_name(config.stop.kind);
  echo.stop_tol = config.stop.tol;
  echo.tau_note = config.policy.note;
  echo.tau = config.policy.tau;
  echo.threads = config.threads;
  const std::string json = run_report_json(result.report, echo);
  out << json << '\n';
  if (!o.report.empty()) {
    auto f = open_file(o.report);
    f << json << '\n';
  }
  if (!o.trace.empty()) {
    auto f = open_file(o.trace);
    write_trace_csv(result.report.history, f);
  }
  if (result.report.metric_violation) {
    err << "warning: G-metric went negative; some P_j is not positive semidefinite\n";
  }
  switch (result.report.outcome) {
    case Outcome::kConverged:
      return kExitOk;
    case Outcome::kDiverged:
      return kExitDiverged;
    case Outcome::kMaxEpochs:
      return kExitMaxEpochs;
  }
  return kExitSoftware;
}

// -------------------------------------------------------------------------- sweep

struct SweepOptions {
  std::string config;
  std::optional<Index> runs;
  std::string csv;
};

int cmd_sweep(const SweepOptions& o, const GlobalOptions& g, bool threads_given, std::ostream& out,
              std::ostream& err) {
  SweepSpec spec = load_sweep_config(o.config);
  if (spec.algorithms.empty()) throw UsageError("sweep config lists no algorithms");
  if (o.runs) {
    spec.runs = *o.runs;
    for (auto& alg : spec.algorithms) alg.runs = std::min(alg.runs, *o.runs);
  }
  if (threads_given) spec.threads = g.threads;
  spec.validate();

  fs::path csv_path;
  if (!o.csv.empty()) {
    csv_path = o.csv;
  } else if (!spec.output.empty() && fs::path(spec.output).is_absolute()) {
    csv_path = spec.output;
  } else {
    const std::string name =
        !spec.output.empty() ? spec.output : (spec.name.empty() ? "sweep" : spec.name) + ".csv";
    csv_path = output_root(g) / name;
  }
  auto csv = open_file(csv_path);

  ProgressFn progress;
  if (g.verbose) progress = [&err](const std::string& msg) { err << msg << '\n'; };
  const SweepTable table = run_sweep(spec, progress);
  write_sweep_csv(table, csv);
  if (!csv) throw IoError("failed writing " + csv_path.string());
  if (!spec.name.empty()) out << spec.name << '\n';
  out << format_sweep_table(table);
  if (g.verbose) err << "wrote " << csv_path.string() << '\n';
  return kExitOk;
}

// --------------------------------------------------------------------- tau-report

struct TauReportOptions {
  std::string problem_dir;
  std::optional<Index> groups;
  std::optional<double> rho;
  std::optional<double> mu;
  double safety = 1.0;
  std::string csv;
};

int cmd_tau_report(const TauReportOptions& o, const GlobalOptions& g, std::ostream& out,
                   std::ostream& err) {
  const ProblemFile file = load_problem(o.problem_dir);
  const Problem& problem = file.problem;
  const Index n = problem.num_blocks();
  const double rho = o.rho ? *o.rho : file.rho.value_or(1.0);
  const double objective_mu = min_strong_convexity(problem.objective);
  const double mu = o.mu ? *o.mu : objective_mu;
  const Index groups = std::min(o.groups ? *o.groups : file.groups.value_or(std::min<Index>(n, 10)), n);
  if (groups < 1) throw UsageError("--groups must be >= 1");

  std::vector<TauRule> rules;
  if (objective_mu > 0.0) {
    rules = {TauRule::kJadmmTheory, TauRule::kHadmmTheory, TauRule::kFadmmTheory};
  } else {
    rules = {TauRule::kJadmmTheory, TauRule::kHadmm2Theory};
    if (o.mu) {
      rules.push_back(TauRule::kHadmmTheory);
      rules.push_back(TauRule::kFadmmTheory);
    } else if (g.verbose) {
      err << "objective is merely convex; pass --mu to add the fadmm/hadmm rules\n";
    }
  }
  if (n < 2) {
    std::erase(rules, TauRule::kHadmm2Theory);
  }

  const Grouping hybrid = make_contiguous_grouping(problem.partition(), groups);
  std::optional<Grouping> halves;
  SpectralRequest request;
  request.full_norm = false;
  request.groupings.push_back(hybrid);
  if (std::find(rules.begin(), rules.end(), TauRule::kHadmm2Theory) != rules.end()) {
    halves = make_contiguous_grouping(problem.partition(), 2);
    if (!(*halves == hybrid)) request.groupings.push_back(*halves);
  }
  const SpectralReport spectra = compute_spectral_report(problem.a, request);

  std::ostringstream csv;
  csv << "block_index,rule,tau\n";
  for (TauRule rule : rules) {
    const Grouping* grouping = rule == TauRule::kHadmm2Theory ? &*halves : &hybrid;
    const VectorXd tau = tau_theory_raw(rule, spectra, n, grouping, rho, mu, o.safety);
    for (Index j = 0; j < n; ++j) {
      csv << j + 1 << ',' << to_string(rule) << ','
          << (tau[j] > 0.0 ? format_double(tau[j]) : std::string("degenerate")) << '\n';
    }
  }
  out << csv.str();
  if (!o.csv.empty()) {
    auto f = open_file(o.csv);
    f << csv.str();
  }
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return kExitUsage;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const EstimationFailedError*>(&e)) return kExitSoftware;
  if (dynamic_cast<const Error*>(&e)) return kExitInvalidConfig;
  return kExitSoftware;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block-separable ADMM solvers (F-ADMM, H-ADMM, J-ADMM) and benchmarks", "blockadmm"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Instance seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory (gen default: $BLOCKADMM_OUT or ., plus <family>-seed<N>)");
  auto* threads_opt = app.add_option("--threads", g.threads, "Worker threads")
                          ->check(CLI::PositiveNumber)
                          ->capture_default_str();
  app.add_flag("-v,--verbose", g.verbose, "Progress and notes on stderr");

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an l2 or l1 benchmark instance");
  gen_cmd->add_option("family", gen.family, "l2 or l1")->required()->check(CLI::IsMember({"l2", "l1"}));
  gen_cmd->add_option("--rows", gen.rows, "Rows m");
  gen_cmd->add_option("--blocks", gen.blocks, "Number of blocks n");
  gen_cmd->add_option("--block-size", gen.block_size, "Columns per block");
  gen_cmd->add_option("--nnz-per-row", gen.nnz_per_row, "Nonzeros per row (l2)");
  gen_cmd->add_option("--row-nnz", gen.row_nnz, "exact or bernoulli (l2)")
      ->check(CLI::IsMember({"exact", "bernoulli"}));
  gen_cmd->add_option("--sparsity", gen.sparsity, "Planted nonzeros k (l1)");
  gen_cmd->add_option("--groups", gen.groups, "Default H-ADMM group count stored in meta.json");

  SolveOptions solve;
  auto* solve_cmd = app.add_subcommand("solve", "Run one solver on a problem directory");
  solve_cmd->add_option("problem_dir", solve.problem_dir, "Problem directory")->required();
  solve_cmd->add_option("--alg", solve.alg, "jadmm, fadmm, hadmm or hadmm2")
      ->required()
      ->check(CLI::IsMember({"jadmm", "fadmm", "hadmm", "hadmm2"}));
  solve_cmd->add_option("--tau-rule", solve.tau_rule, "theory");
  solve_cmd->add_option("--tau-value", solve.tau_value, "Uniform tau");
  solve_cmd->add_option("--tau-multiplier", solve.tau_multiplier, "Uniform tau = c (rho^2/2)||A||^4");
  solve_cmd->add_option("--rho", solve.rho, "Penalty parameter");
  solve_cmd->add_option("--gamma", solve.gamma, "Dual step factor in (0, 2)");
  solve_cmd->add_option("--groups", solve.groups, "Group count for hadmm");
  solve_cmd->add_option("--mu", solve.mu, "Strong convexity assumed by the theory rules");
  solve_cmd->add_option("--safety", solve.safety, "Factor >= 1 applied to theoretical tau")
      ->capture_default_str();
  solve_cmd->add_option("--max-epochs", solve.max_epochs, "Epoch budget");
  solve_cmd->add_option("--tol", solve.tol, "Stop tolerance override");
  solve_cmd->add_option("--trace", solve.trace, "Write the per-epoch trace CSV here");
  solve_cmd->add_option("--report", solve.report, "Also write the report JSON here");
  solve_cmd->add_flag("--g-metric", solve.g_metric,
                      "Record G-metric steps (and distance to the KKT point for l2)");

  SweepOptions sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a table sweep from a TOML or JSON config");
  sweep_cmd->add_option("config", sweep.config, "Sweep config file")->required();
  sweep_cmd->add_option("--runs", sweep.runs, "Override runs per cell")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--csv", sweep.csv, "CSV output path");

  TauReportOptions tau;
  auto* tau_cmd = app.add_subcommand("tau-report", "Per-block theoretical tau for every rule");
  tau_cmd->add_option("problem_dir", tau.problem_dir, "Problem directory")->required();
  tau_cmd->add_option("--groups", tau.groups, "Group count for hadmm-theory");
  tau_cmd->add_option("--rho", tau.rho, "Penalty parameter");
  tau_cmd->add_option("--mu", tau.mu, "Strong convexity assumed by fadmm/hadmm rules");
  tau_cmd->add_option("--safety", tau.safety, "Factor >= 1")->capture_default_str();
  tau_cmd->add_option("--csv", tau.csv, "Also write the CSV here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen(gen, g, out, err);
    if (solve_cmd->parsed()) return cmd_solve(solve, g, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, g, threads_opt->count() > 0, out, err);
    if (tau_cmd->parsed()) return cmd_tau_report(tau, g, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitUsage;
}

}  // namespace blockadmm::cli
