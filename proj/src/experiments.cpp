#include "blockadmm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>

#include "blockadmm/errors.hpp"
#include "blockadmm/random.hpp"
#include "blockadmm/spectral.hpp"
#include "blockadmm/text_format.hpp"

namespace blockadmm {

std::string to_string(Family family) { return family == Family::kL2 ? "l2" : "l1"; }

Family family_from_string(const std::string& name) {
  if (name == "l2") return Family::kL2;
  if (name == "l1") return Family::kL1;
  throw InvalidConfigError("unknown instance family '" + name + "' (expected l2 or l1)");
}

std::string to_string(RowNnzMode mode) {
  return mode == RowNnzMode::kExact ? "exact" : "bernoulli";
}

RowNnzMode row_nnz_mode_from_string(const std::string& name) {
  if (name == "exact") return RowNnzMode::kExact;
  if (name == "bernoulli") return RowNnzMode::kBernoulli;
  throw InvalidConfigError("unknown row_nnz mode '" + name + "' (expected exact or bernoulli)");
}

namespace {

/// Sorted columns of one row, each present with probability p.
std::vector<std::int64_t> bernoulli_columns(Rng& rng, Index cols, double p) {
  std::vector<std::int64_t> out;
  if (p >= 1.0) {
    for (Index c = 0; c < cols; ++c) out.push_back(c);
    return out;
  }
  const double log_q = std::log1p(-p);
  double pos = -1.0;
  while (true) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    pos += 1.0 + std::floor(std::log(u) / log_q);
    if (pos >= static_cast<double>(cols)) break;
    out.push_back(static_cast<std::int64_t>(pos));
  }
  return out;
}

}  // namespace

Instance gen_l2(const L2InstanceSpec& spec, std::uint64_t seed) {
  if (spec.rows < 1 || spec.num_blocks < 1 || spec.block_size < 1) {
    throw InvalidConfigError("l2 instance dimensions must be positive");
  }
  const BlockPartition partition = BlockPartition::uniform(spec.num_blocks, spec.block_size);
  const Index cols = partition.total_size();
  if (spec.nnz_per_row < 1 || spec.nnz_per_row > cols) {
    throw InvalidConfigError("nnz_per_row must lie in [1, N]");
  }

  Rng matrix_rng(stream_seed(seed, Stream::kMatrix));
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(spec.rows * spec.nnz_per_row));
  for (Index r = 0; r < spec.rows; ++r) {
    const auto columns =
        spec.row_nnz == RowNnzMode::kExact
            ? matrix_rng.sample_without_replacement(cols, spec.nnz_per_row)
            : bernoulli_columns(matrix_rng, cols,
                                static_cast<double>(spec.nnz_per_row) / static_cast<double>(cols));
    for (auto c : columns) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(c), matrix_rng.normal());
    }
  }
  SparseMatrix a(spec.rows, cols);
  a.setFromTriplets(triplets.begin(), triplets.end());

  Rng solution_rng(stream_seed(seed, Stream::kSolution));
  BlockVector z(partition);
  for (Index c = 0; c < cols; ++c) z.values()[c] = solution_rng.normal();

  Instance inst;
  inst.family = Family::kL2;
  inst.seed = seed;
  inst.problem.a = BlockMatrix::from_sparse(a, partition);
  // Same accumulation order as full_residual, so z has an exactly zero residual.
  inst.problem.b = full_residual(inst.problem.a, z, VectorXd::Zero(spec.rows));
  inst.problem.objective =
      SeparableObjective::uniform(BlockObjective::half_squared_l2(), spec.num_blocks);
  inst.x_star = z.values();
  inst.rho = spec.rho;
  inst.gamma = spec.gamma;
  inst.stop = StopRule::constraint_residual(spec.tol);
  inst.hybrid_groups = std::min(spec.hybrid_groups, spec.num_blocks);
  return inst;
}

Instance gen_l1(const L1InstanceSpec& spec, std::uint64_t seed) {
  if (spec.rows < 1 || spec.num_blocks < 1 || spec.block_size < 1) {
    throw InvalidConfigError("l1 instance dimensions must be positive");
  }
  const BlockPartition partition = BlockPartition::uniform(spec.num_blocks, spec.block_size);
  const Index cols = partition.total_size();
  if (spec.sparsity < 1 || spec.sparsity > cols) {
    throw InvalidConfigError("sparsity k must lie in [1, N]");
  }

  Rng matrix_rng(stream_seed(seed, Stream::kMatrix));
  MatrixXd a(spec.rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < spec.rows; ++r) a(r, c) = matrix_rng.normal();
  }

  Rng solution_rng(stream_seed(seed, Stream::kSolution));
  BlockVector x_star(partition);
  for (auto pos : solution_rng.sample_without_replacement(cols, spec.sparsity)) {
    x_star.values()[pos] = solution_rng.normal();
  }

  Instance inst;
  inst.family = Family::kL1;
  inst.seed = seed;
  inst.problem.a = BlockMatrix::from_dense(a, partition);
  inst.problem.b = full_residual(inst.problem.a, x_star, VectorXd::Zero(spec.rows));
  inst.problem.objective = SeparableObjective::uniform(BlockObjective::l1(), spec.num_blocks);
  const double b_l1 = inst.problem.b.lpNorm<1>();
  inst.rho = b_l1 > 0.0 ? spec.rho_scale / b_l1 : spec.rho_scale;
  inst.gamma = spec.gamma;
  inst.stop = StopRule::relative_error(x_star.values(), spec.tol);
  inst.x_star = x_star.values();
  inst.hybrid_groups = std::min(spec.hybrid_groups, spec.num_blocks);
  return inst;
}

KktPoint l2_kkt_oracle(const BlockMatrix& a, const VectorXd& b) {
  if (b.size() != a.rows()) throw ShapeError("l2_kkt_oracle: b has the wrong length");
  const MatrixXd gram = [&] {
    if (a.is_sparse()) {
      const SparseMatrix s = a.to_sparse();
      return MatrixXd(s * s.transpose());
    }
    const MatrixXd d = a.to_dense();
    MatrixXd g = MatrixXd::Zero(a.rows(), a.rows());
    g.selfadjointView<Eigen::Lower>().rankUpdate(d);
    return MatrixXd(g.selfadjointView<Eigen::Lower>());
  }();

  KktPoint kkt;
  Eigen::LDLT<MatrixXd> ldlt(gram);
  const VectorXd pivots = ldlt.vectorD().cwiseAbs();
  const double scale = pivots.size() > 0 ? pivots.maxCoeff() : 0.0;
  const bool singular = ldlt.info() != Eigen::Success || pivots.size() == 0 ||
                        pivots.minCoeff() <= 1e-12 * std::max(scale, 1.0);
  if (!singular) {
    kkt.y = ldlt.solve(b);
  } else {
    kkt.rank_deficient = true;
    kkt.y = gram.completeOrthogonalDecomposition().solve(b);
  }
  kkt.x = BlockVector(a.partition());
  const auto& part = a.partition();
  for (Index j = 0; j < a.num_blocks(); ++j) {
    a.block(j).apply_transpose(kkt.y, kkt.x.values().segment(part.offset(j), part.size(j)));
  }
  return kkt;
}

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kJadmm:
      return "jadmm";
    case Algorithm::kFadmm:
      return "fadmm";
    case Algorithm::kHadmm:
      return "hadmm";
    case Algorithm::kHadmm2:
      return "hadmm2";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (Algorithm a : {Algorithm::kJadmm, Algorithm::kFadmm, Algorithm::kHadmm, Algorithm::kHadmm2}) {
    if (to_string(a) == name) return a;
  }
  throw InvalidConfigError("unknown algorithm '" + name +
                           "' (expected jadmm, fadmm, hadmm or hadmm2)");
}

std::string display_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kJadmm:
      return "J-ADMM";
    case Algorithm::kFadmm:
      return "F-ADMM";
    case Algorithm::kHadmm:
      return "H-ADMM";
    case Algorithm::kHadmm2:
      return "H-ADMM(l=2)";
  }
  return "unknown";
}

TauRule theory_rule(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kJadmm:
      return TauRule::kJadmmTheory;
    case Algorithm::kFadmm:
      return TauRule::kFadmmTheory;
    case Algorithm::kHadmm:
      return TauRule::kHadmmTheory;
    case Algorithm::kHadmm2:
      return TauRule::kHadmm2Theory;
  }
  return TauRule::kPerBlockManual;
}

Schedule make_schedule(Algorithm algorithm, const BlockPartition& partition, Index groups) {
  switch (algorithm) {
    case Algorithm::kJadmm:
      return Schedule::jacobi();
    case Algorithm::kFadmm:
      return Schedule::gauss_seidel();
    case Algorithm::kHadmm:
      return Schedule::hybrid(make_contiguous_grouping(partition, groups));
    case Algorithm::kHadmm2:
      return Schedule::two_group(make_contiguous_grouping(partition, 2));
  }
  throw InvalidConfigError("unhandled algorithm");
}

void SweepSpec::validate() const {
  if (algorithms.empty()) throw InvalidConfigError("sweep needs at least one algorithm");
  if (runs < 1) throw InvalidConfigError("runs per cell must be >= 1");
  if (!theory_tau && multipliers.empty()) {
    throw InvalidConfigError("a uniform-tau sweep needs at least one multiplier");
  }
  for (double m : multipliers) {
    if (!(m > 0.0)) throw InvalidConfigError("tau multipliers must be positive");
  }
  for (const auto& alg : algorithms) {
    if (alg.runs < 0) throw InvalidConfigError("per-algorithm runs must be >= 0");
    if (alg.groups < 0) throw InvalidConfigError("group count must be >= 0");
  }
  if (max_epochs < 1) throw InvalidConfigError("max_epochs must be >= 1");
  if (threads < 1) throw InvalidConfigError("threads must be >= 1");
  if (assumed_mu && !(*assumed_mu > 0.0)) throw InvalidConfigError("mu must be positive");
  if (!(safety >= 1.0)) throw InvalidConfigError("safety factor must be >= 1");
}

Index SweepCell::count(Outcome outcome) const {
  return static_cast<Index>(std::count_if(samples.begin(), samples.end(),
                                          [&](const RunSample& s) { return s.outcome == outcome; }));
}

double SweepCell::mean_epochs() const {
  double sum = 0.0;
  Index n = 0;
  for (const auto& s : samples) {
    if (s.outcome != Outcome::kConverged) continue;
    sum += static_cast<double>(s.epochs);
    ++n;
  }
  return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double SweepCell::std_epochs() const {
  const double mean = mean_epochs();
  double acc = 0.0;
  Index n = 0;
  for (const auto& s : samples) {
    if (s.outcome != Outcome::kConverged) continue;
    const double d = static_cast<double>(s.epochs) - mean;
    acc += d * d;
    ++n;
  }
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return n > 1 ? std::sqrt(acc / static_cast<double>(n - 1)) : 0.0;
}

double SweepCell::mean_half_sq_residual() const {
  double sum = 0.0;
  Index n = 0;
  for (const auto& s : samples) {
    if (s.outcome != Outcome::kConverged) continue;
    sum += s.half_sq_residual;
    ++n;
  }
  return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double SweepCell::diverged_fraction() const {
  if (samples.empty()) return 0.0;
  return static_cast<double>(count(Outcome::kDiverged)) / static_cast<double>(samples.size());
}

const SweepCell* SweepTable::find(Algorithm algorithm, double multiplier) const {
  for (const auto& cell : cells) {
    if (cell.algorithm.algorithm == algorithm && cell.multiplier == multiplier) return &cell;
  }
  return nullptr;
}

namespace {

Index hybrid_groups_for(const SweepSpec& spec, const AlgorithmSpec& alg) {
  if (alg.groups > 0) return alg.groups;
  return spec.family == Family::kL2 ? spec.l2.hybrid_groups : spec.l1.hybrid_groups;
}

Instance make_instance(const SweepSpec& spec, std::uint64_t seed) {
  return spec.family == Family::kL2 ? gen_l2(spec.l2, seed) : gen_l1(spec.l1, seed);
}

/// Runs every cell scheduled for run index r on one freshly generated instance.
void run_seed(const SweepSpec& spec, Index r, std::vector<SweepCell>& cells) {
  const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(r);
  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (static_cast<Index>(cells[c].samples.size()) > r) active.push_back(c);
  }
  if (active.empty()) return;

  const Instance inst = make_instance(spec, seed);
  const Problem& problem = inst.problem;
  const BlockPartition& partition = problem.partition();

  SpectralRequest request;
  request.block_norms = false;
  request.coupling = false;
  request.full_norm = !spec.theory_tau;
  std::vector<Grouping> groupings(cells.size());
  for (std::size_t c : active) {
    const auto& alg = cells[c].algorithm;
    if (alg.algorithm == Algorithm::kHadmm) {
      groupings[c] = make_contiguous_grouping(partition, hybrid_groups_for(spec, alg));
    } else if (alg.algorithm == Algorithm::kHadmm2) {
      groupings[c] = make_contiguous_grouping(partition, 2);
    }
    if (!spec.theory_tau) continue;
    switch (alg.algorithm) {
      case Algorithm::kFadmm:
        request.coupling = true;
        request.block_norms = true;
        break;
      case Algorithm::kJadmm:
        request.block_norms = true;
        break;
      case Algorithm::kHadmm:
      case Algorithm::kHadmm2:
        if (std::none_of(request.groupings.begin(), request.groupings.end(),
                         [&](const Grouping& g) { return g == groupings[c]; })) {
          request.groupings.push_back(groupings[c]);
        }
        break;
    }
  }
  const SpectralReport spectra = compute_spectral_report(problem.a, request);
  const double mu = spec.assumed_mu ? *spec.assumed_mu : min_strong_convexity(problem.objective);

  for (std::size_t c : active) {
    SweepCell& cell = cells[c];
    const auto& alg = cell.algorithm;
    SolverConfig config;
    config.rho = inst.rho;
    config.gamma = inst.gamma;
    config.stop = inst.stop;
    config.max_epochs = spec.max_epochs;
    const Index groups = alg.algorithm == Algorithm::kHadmm2 ? 2 : hybrid_groups_for(spec, alg);
    config.schedule = make_schedule(alg.algorithm, partition, groups);
    if (spec.theory_tau) {
      const Grouping* g = config.schedule.grouping();
      config.policy = tau_theory(theory_rule(alg.algorithm), spectra, problem.num_blocks(), g,
                                 inst.rho, mu, spec.safety);
    } else {
      config.policy = tau_uniform(cell.multiplier * tuned_tau_base(spectra.full_norm, inst.rho),
                                  problem.num_blocks());
    }
    RunOptions options;
    options.record_history = false;
    const RunResult result = run(problem, config, options);
    RunSample& sample = cell.samples[static_cast<std::size_t>(r)];
    sample.seed = seed;
    sample.outcome = result.report.outcome;
    sample.epochs = result.report.epochs;
    sample.half_sq_residual = result.report.final_half_sq_residual;
    sample.relative_error = result.report.final_relative_error;
    sample.wall_time_seconds = result.report.wall_time_seconds;
  }
}

}  // namespace

SweepTable run_sweep(const SweepSpec& spec, const ProgressFn& progress) {
  spec.validate();
  SweepTable table;
  table.spec = spec;
  const std::vector<double> taus = spec.theory_tau ? std::vector<double>{1.0} : spec.multipliers;
  Index max_runs = 0;
  for (double m : taus) {
    for (const auto& alg : spec.algorithms) {
      SweepCell cell;
      cell.algorithm = alg;
      cell.tau_rule = spec.theory_tau ? to_string(theory_rule(alg.algorithm))
                                      : to_string(TauRule::kUniformManual);
      cell.multiplier = m;
      const Index runs = alg.runs > 0 ? alg.runs : spec.runs;
      cell.samples.resize(static_cast<std::size_t>(runs));
      max_runs = std::max(max_runs, runs);
      table.cells.push_back(std::move(cell));
    }
  }

  std::mutex progress_mutex;
  auto report = [&](Index r) {
    if (!progress) return;
    std::lock_guard<std::mutex> lock(progress_mutex);
    progress("finished run " + std::to_string(r + 1) + "/" + std::to_string(max_runs) +
             " (seed " + std::to_string(spec.base_seed + static_cast<std::uint64_t>(r)) + ")");
  };

#ifdef BLOCKADMM_HAVE_OPENMP
  if (spec.threads > 1) {
    std::exception_ptr failure;
    std::mutex failure_mutex;
#pragma omp parallel for num_threads(spec.threads) schedule(dynamic, 1)
    for (Index r = 0; r < max_runs; ++r) {
      try {
        run_seed(spec, r, table.cells);
        report(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    return table;
  }
#endif
  for (Index r = 0; r < max_runs; ++r) {
    run_seed(spec, r, table.cells);
    report(r);
  }
  return table;
}

void write_sweep_csv(const SweepTable& table, std::ostream& out) {
  out << "family,algorithm,tau_rule,tau_multiplier,runs,mean_epochs,std_epochs,"
         "mean_half_sq_residual,diverged_fraction\n";
  for (const auto& cell : table.cells) {
    out << to_string(table.spec.family) << ',' << to_string(cell.algorithm.algorithm) << ','
        << cell.tau_rule << ',' << format_double(cell.multiplier) << ',' << cell.runs() << ','
        << format_double(cell.mean_epochs()) << ',' << format_double(cell.std_epochs()) << ','
        << format_double(cell.mean_half_sq_residual()) << ','
        << format_double(cell.diverged_fraction()) << '\n';
  }
}

std::string format_sweep_table(const SweepTable& table) {
  const auto& spec = table.spec;
  const std::vector<double> taus = spec.theory_tau ? std::vector<double>{1.0} : spec.multipliers;
  const bool show_residual = spec.family == Family::kL1;
  constexpr int kTauWidth = 26;
  constexpr int kColWidth = 24;

  std::ostringstream os;
  auto pad = [](std::string s, int width) {
    if (static_cast<int>(s.size()) < width) s.insert(0, static_cast<std::size_t>(width) - s.size(), ' ');
    return s;
  };
  os << pad("tau", kTauWidth);
  for (const auto& alg : spec.algorithms) os << pad(display_name(alg.algorithm), kColWidth);
  os << '\n';
  for (double m : taus) {
    std::string label;
    if (spec.theory_tau) {
      label = "theory";
    } else {
      std::ostringstream l;
      l << m << " * (rho^2/2)||A||^4";
      label = l.str();
    }
    os << pad(label, kTauWidth);
    for (const auto& alg : spec.algorithms) {
      const SweepCell* cell = table.find(alg.algorithm, m);
      std::ostringstream entry;
      if (cell == nullptr) {
        entry << "?";
      } else if (cell->diverged()) {
        entry << "--- (" << static_cast<int>(std::lround(100.0 * cell->diverged_fraction()))
              << "% div)";
      } else if (cell->count(Outcome::kConverged) == 0) {
        entry << "no conv";
      } else {
        entry.setf(std::ios::fixed);
        entry.precision(1);
        entry << cell->mean_epochs();
        if (show_residual) {
          entry.unsetf(std::ios::fixed);
          entry.setf(std::ios::scientific);
          entry.precision(2);
          entry << " / " << cell->mean_half_sq_residual();
        }
      }
      os << pad(entry.str(), kColWidth);
    }
    os << '\n';
  }
  if (show_residual) os << "(entries: mean epochs / mean 1/2||r||^2)\n";
  return os.str();
}

}  // namespace blockadmm
