#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blockadmm/engine.hpp"
#include "blockadmm/problem.hpp"

namespace blockadmm {

enum class Family { kL2, kL1 };

/// "l2", "l1".
std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// How many nonzeros each row of the l2 matrix gets.
enum class RowNnzMode {
  kExact,     // exactly nnz_per_row distinct columns
  kBernoulli  // every entry present independently with probability nnz_per_row / N
};

/// "exact", "bernoulli".
std::string to_string(RowNnzMode mode);
RowNnzMode row_nnz_mode_from_string(const std::string& name);

/// minimize 1/2||x||^2 s.t. Ax = b with sparse Gaussian A and b = Az.
struct L2InstanceSpec {
  Index rows = 3000;
  Index num_blocks = 100;
  Index block_size = 100;
  Index nnz_per_row = 20;
  RowNnzMode row_nnz = RowNnzMode::kExact;
  double rho = 0.1;
  double gamma = 1.0;
  double tol = 1e-10;         // on 1/2||Ax - b||^2
  Index hybrid_groups = 10;
};

/// minimize ||x||_1 s.t. Ax = b with dense Gaussian A and a planted sparse x*.
struct L1InstanceSpec {
  Index rows = 300;
  Index num_blocks = 100;
  Index block_size = 10;
  Index sparsity = 60;
  double rho_scale = 10.0;    // rho = rho_scale / ||b||_1
  double gamma = 1.0;
  double tol = 1e-10;         // on ||x - x*|| / ||x*||
  Index hybrid_groups = 25;
};

struct Instance {
  Family family = Family::kL2;
  std::uint64_t seed = 0;
  Problem problem;
  std::optional<VectorXd> x_star;  // planted solution (l1) or generating z (l2)
  double rho = 1.0;
  double gamma = 1.0;
  StopRule stop;
  Index hybrid_groups = 1;
};

/// Each row of A gets exactly nnz_per_row distinct uniformly chosen columns with
/// standard normal values (rows drawn in order from the kMatrix stream); z is
/// standard normal from the kSolution stream and b = Az. In Bernoulli mode the
/// columns of a row are found by geometric skips instead, so the row counts are
/// Binomial(N, nnz_per_row / N).
Instance gen_l2(const L2InstanceSpec& spec, std::uint64_t seed);

/// A is dense standard normal, filled column by column from the kMatrix stream.
/// x* has `sparsity` uniformly placed standard normal entries (kSolution stream)
/// and b = Ax*.
Instance gen_l1(const L1InstanceSpec& spec, std::uint64_t seed);

struct KktPoint {
  BlockVector x;
  VectorXd y;
  bool rank_deficient = false;
};

/// KKT point of min 1/2||x||^2 s.t. Ax = b: solve A A^T y = b, x = A^T y. Falls back
/// to a minimum-norm least-squares solve when A A^T is singular.
KktPoint l2_kkt_oracle(const BlockMatrix& a, const VectorXd& b);

enum class Algorithm { kJadmm, kFadmm, kHadmm, kHadmm2 };

/// "jadmm", "fadmm", "hadmm", "hadmm2".
std::string to_string(Algorithm algorithm);
Algorithm algorithm_from_string(const std::string& name);
/// "J-ADMM", "F-ADMM", "H-ADMM", "H-ADMM(l=2)".
std::string display_name(Algorithm algorithm);

TauRule theory_rule(Algorithm algorithm);

/// jadmm -> jacobi, fadmm -> gauss-seidel, hadmm -> hybrid with `groups` contiguous
/// groups, hadmm2 -> two-group.
Schedule make_schedule(Algorithm algorithm, const BlockPartition& partition, Index groups);

struct AlgorithmSpec {
  Algorithm algorithm = Algorithm::kFadmm;
  Index groups = 0;  // hadmm only; 0 = the family default
  Index runs = 0;    // 0 = the sweep's runs per cell
};

struct SweepSpec {
  std::string name;
  Family family = Family::kL2;
  std::vector<AlgorithmSpec> algorithms;
  bool theory_tau = true;           // false: uniform tau = multiplier * (rho^2/2)||A||^4
  std::vector<double> multipliers;
  Index runs = 20;
  std::uint64_t base_seed = 1;      // run r uses instance seed base_seed + r
  Index max_epochs = 100000;
  std::optional<double> assumed_mu; // mu for the theory rules instead of the objective's
  double safety = 1.0;
  L2InstanceSpec l2;
  L1InstanceSpec l1;
  int threads = 1;
  std::string output;               // CSV path; empty = none

  /// Throws InvalidConfigError.
  void validate() const;
};

struct RunSample {
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::kMaxEpochs;
  Index epochs = 0;
  double half_sq_residual = 0.0;
  std::optional<double> relative_error;
  double wall_time_seconds = 0.0;
};

struct SweepCell {
  AlgorithmSpec algorithm;
  std::string tau_rule;
  double multiplier = 1.0;  // 1 for theory cells
  std::vector<RunSample> samples;

  Index runs() const { return static_cast<Index>(samples.size()); }
  Index count(Outcome outcome) const;
  double mean_epochs() const;   // over converged runs; NaN if none
  double std_epochs() const;    // sample standard deviation over converged runs
  double mean_half_sq_residual() const;
  double diverged_fraction() const;
  /// More than 10% of the runs diverged (shown as "---").
  bool diverged() const { return diverged_fraction() > 0.1; }
};

struct SweepTable {
  SweepSpec spec;
  std::vector<SweepCell> cells;  // ordered by (multiplier, algorithm) as listed in the spec

  const SweepCell* find(Algorithm algorithm, double multiplier) const;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Generates runs seeded instances and runs every (algorithm, tau) cell on each.
/// Independent seeds may run concurrently; the result does not depend on threads.
SweepTable run_sweep(const SweepSpec& spec, const ProgressFn& progress = {});

/// Columns: family, algorithm, tau_rule, tau_multiplier, runs, mean_epochs,
/// std_epochs, mean_half_sq_residual, diverged_fraction.
void write_sweep_csv(const SweepTable& table, std::ostream& out);

/// Aligned text table, one row per tau value and one column per algorithm.
std::string format_sweep_table(const SweepTable& table);

/// Reads a sweep config; ".toml" files are parsed as TOML, anything else as JSON.
SweepSpec load_sweep_config(const std::string& path);
SweepSpec parse_sweep_json(const std::string& text);
SweepSpec parse_sweep_toml(const std::string& text);

}  // namespace blockadmm
