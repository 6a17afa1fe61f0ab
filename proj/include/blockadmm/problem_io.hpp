#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "blockadmm/engine.hpp"
#include "blockadmm/experiments.hpp"
#include "blockadmm/problem.hpp"

namespace blockadmm {

/// A problem directory: meta.json, A.mtx, b.vec and optionally x_star.vec.
struct ProblemFile {
  Problem problem;
  std::string family = "custom";  // "l2", "l1" or "custom"
  std::optional<std::uint64_t> seed;
  std::optional<VectorXd> x_star;
  std::optional<double> rho;
  std::optional<double> gamma;
  std::optional<Index> groups;     // default H-ADMM group count
  std::optional<StopRule> stop;    // a relative-error rule refers to x_star
};

ProblemFile to_problem_file(const Instance& instance);

/// Writes the directory (created if missing). Throws IoError, or
/// UnsupportedObjectiveError for custom prox terms, which cannot be serialized.
void save_problem(const ProblemFile& file, const std::filesystem::path& dir);
/// Throws IoError on missing or malformed files.
ProblemFile load_problem(const std::filesystem::path& dir);

/// MatrixMarket "matrix coordinate real general" for sparse A, "matrix array real
/// general" (column-major) for dense A.
void write_matrix_market(const BlockMatrix& a, std::ostream& out);
/// Reads either layout and splits the columns by `partition`.
BlockMatrix read_matrix_market(std::istream& in, const BlockPartition& partition);

/// One value per line.
void write_vector(const VectorXd& v, std::ostream& out);
VectorXd read_vector(std::istream& in);

/// Settings echoed next to a RunReport.
struct RunEcho {
  std::string problem;
  std::string algorithm;
  double rho = 0.0;
  double gamma = 0.0;
  std::optional<Index> groups;
  Index max_epochs = 0;
  std::string stop;
  double stop_tol = 0.0;
  std::string tau_note;
  VectorXd tau;
  int threads = 1;
};

/// Pretty-printed JSON object with the report fields and the echoed config.
std::string run_report_json(const RunReport& report, const RunEcho& echo);

/// Columns: epoch, half_sq_residual, g_dist_to_ref, g_step.
void write_trace_csv(const std::vector<EpochRecord>& history, std::ostream& out);

}  // namespace blockadmm
