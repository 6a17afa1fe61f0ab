#include "blockadmm/problem_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "blockadmm/errors.hpp"
#include "blockadmm/text_format.hpp"

namespace blockadmm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormatName = "blockadmm-problem";
constexpr int kFormatVersion = 1;

std::string stop_kind_name(StopKind kind) {
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

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::vector<double> to_std(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

json objective_to_json(const BlockObjective& term) {
  json node{{"kind", to_string(term.kind())}, {"mu", term.strong_convexity()}};
  switch (term.kind()) {
    case ObjectiveKind::kHalfSquaredL2:
    case ObjectiveKind::kL1:
      break;
    case ObjectiveKind::kWeightedQuadratic:
      node["params"] = {{"weights", to_std(term.weights())}, {"center", to_std(term.center())}};
      break;
    case ObjectiveKind::kCustomProx:
      throw UnsupportedObjectiveError("custom prox objectives cannot be written to a problem file");
  }
  return node;
}

BlockObjective objective_from_json(const json& node, Index block_size) {
  const ObjectiveKind kind = objective_kind_from_string(node.at("kind").get<std::string>());
  switch (kind) {
    case ObjectiveKind::kHalfSquaredL2:
      return BlockObjective::half_squared_l2();
    case ObjectiveKind::kL1:
      return BlockObjective::l1();
    case ObjectiveKind::kWeightedQuadratic: {
      const auto& params = node.at("params");
      VectorXd w = from_std(params.at("weights").get<std::vector<double>>());
      VectorXd c = from_std(params.at("center").get<std::vector<double>>());
      if (w.size() != block_size || c.size() != block_size) {
        throw IoError("weighted_quadratic parameters do not match the block size");
      }
      return BlockObjective::weighted_quadratic(std::move(w), std::move(c));
    }
    case ObjectiveKind::kCustomProx:
      break;
  }
  throw IoError("objective kind custom_prox cannot be loaded from a file");
}

/// Next line that is neither empty nor a '%' comment.
bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '%') continue;
    return true;
  }
  return false;
}

}  // namespace

ProblemFile to_problem_file(const Instance& instance) {
  ProblemFile file;
  file.problem = instance.problem;
  file.family = to_string(instance.family);
  file.seed = instance.seed;
  if (instance.family == Family::kL1) file.x_star = instance.x_star;
  file.rho = instance.rho;
  file.gamma = instance.gamma;
  file.groups = instance.hybrid_groups;
  file.stop = instance.stop;
  return file;
}

void write_matrix_market(const BlockMatrix& a, std::ostream& out) {
  const auto& part = a.partition();
  if (a.is_sparse()) {
    Index nnz = 0;
    for (Index j = 0; j < a.num_blocks(); ++j) nnz += a.block(j).nonzeros();
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
    for (Index j = 0; j < a.num_blocks(); ++j) {
      const MatrixBlock& block = a.block(j);
      if (const SparseMatrix* s = block.sparse()) {
        for (Index c = 0; c < s->outerSize(); ++c) {
          for (SparseMatrix::InnerIterator it(*s, c); it; ++it) {
            out << it.row() + 1 << ' ' << part.offset(j) + c + 1 << ' '
                << format_double(it.value()) << '\n';
          }
        }
      } else {
        const MatrixXd& d = *block.dense();
        for (Index c = 0; c < d.cols(); ++c) {
          for (Index r = 0; r < d.rows(); ++r) {
            if (d(r, c) == 0.0) continue;
            out << r + 1 << ' ' << part.offset(j) + c + 1 << ' ' << format_double(d(r, c)) << '\n';
          }
        }
      }
    }
    return;
  }
  out << "%%MatrixMarket matrix array real general\n";
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index j = 0; j < a.num_blocks(); ++j) {
    const MatrixXd d = a.block(j).to_dense();
    for (Index c = 0; c < d.cols(); ++c) {
      for (Index r = 0; r < d.rows(); ++r) out << format_double(d(r, c)) << '\n';
    }
  }
}

BlockMatrix read_matrix_market(std::istream& in, const BlockPartition& partition) {
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty MatrixMarket stream");
  std::istringstream hs(header);
  std::string banner, object, layout, field, symmetry;
  hs >> banner >> object >> layout >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix") {
    throw IoError("not a MatrixMarket matrix header: " + header);
  }
  if (field != "real" || symmetry != "general") {
    throw IoError("only real general MatrixMarket matrices are supported");
  }
  std::string line;
  if (!next_data_line(in, line)) throw IoError("MatrixMarket size line missing");
  std::istringstream size_line(line);
  Index rows = 0, cols = 0;
  size_line >> rows >> cols;
  if (!size_line || rows < 0 || cols != partition.total_size()) {
    throw IoError("MatrixMarket shape does not match the block sizes in meta.json");
  }

  if (layout == "coordinate") {
    Index nnz = 0;
    size_line >> nnz;
    if (!size_line) throw IoError("MatrixMarket coordinate size line needs an entry count");
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(nnz));
    for (Index k = 0; k < nnz; ++k) {
      if (!next_data_line(in, line)) throw IoError("MatrixMarket file ends early");
      std::istringstream ls(line);
      Index r = 0, c = 0;
      std::string value;
      ls >> r >> c >> value;
      if (!ls || r < 1 || r > rows || c < 1 || c > cols) {
        throw IoError("bad MatrixMarket entry: " + line);
      }
      triplets.emplace_back(static_cast<int>(r - 1), static_cast<int>(c - 1), parse_double(value));
    }
    SparseMatrix s(rows, cols);
    s.setFromTriplets(triplets.begin(), triplets.end());
    return BlockMatrix::from_sparse(s, partition);
  }
  if (layout == "array") {
    MatrixXd d(rows, cols);
    for (Index c = 0; c < cols; ++c) {
      for (Index r = 0; r < rows; ++r) {
        if (!next_data_line(in, line)) throw IoError("MatrixMarket file ends early");
        d(r, c) = parse_double(line);
      }
    }
    return BlockMatrix::from_dense(d, partition);
  }
  throw IoError("unsupported MatrixMarket layout '" + layout + "'");
}

void write_vector(const VectorXd& v, std::ostream& out) {
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
}

VectorXd read_vector(std::istream& in) {
  std::vector<double> values;
  std::string line;
  while (next_data_line(in, line)) values.push_back(parse_double(line));
  return from_std(values);
}

void save_problem(const ProblemFile& file, const fs::path& dir) {
  file.problem.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const Problem& p = file.problem;
  json meta;
  meta["format"] = kFormatName;
  meta["version"] = kFormatVersion;
  meta["family"] = file.family;
  meta["m"] = p.a.rows();
  meta["block_sizes"] = p.partition().sizes();
  meta["storage"] = p.a.is_sparse() ? "sparse" : "dense";
  json objectives = json::array();
  for (const auto& term : p.objective.terms()) objectives.push_back(objective_to_json(term));
  meta["objectives"] = std::move(objectives);
  meta["seed"] = file.seed ? json(*file.seed) : json(nullptr);
  json defaults = json::object();
  if (file.rho) defaults["rho"] = *file.rho;
  if (file.gamma) defaults["gamma"] = *file.gamma;
  if (file.groups) defaults["groups"] = *file.groups;
  if (file.stop) defaults["stop"] = {{"kind", stop_kind_name(file.stop->kind)}, {"tol", file.stop->tol}};
  meta["defaults"] = std::move(defaults);
  if (file.stop && file.stop->kind == StopKind::kRelativeError && !file.x_star) {
    throw IoError("a relative-error stop rule needs x_star");
  }

  {
    auto out = open_out(dir / "meta.json");
    out << meta.dump(2) << '\n';
  }
  {
    auto out = open_out(dir / "A.mtx");
    write_matrix_market(p.a, out);
  }
  {
    auto out = open_out(dir / "b.vec");
    write_vector(p.b, out);
  }
  if (file.x_star) {
    auto out = open_out(dir / "x_star.vec");
    write_vector(*file.x_star, out);
  }
  for (const char* name : {"meta.json", "A.mtx", "b.vec"}) {
    if (!fs::exists(dir / name)) throw IoError("failed to write " + (dir / name).string());
  }
}

ProblemFile load_problem(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("problem directory not found: " + dir.string());
  json meta;
  try {
    auto in = open_in(dir / "meta.json");
    meta = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("malformed " + (dir / "meta.json").string() + ": " + e.what());
  }

  ProblemFile file;
  try {
    if (meta.value("format", std::string()) != kFormatName) {
      throw IoError((dir / "meta.json").string() + " is not a blockadmm problem file");
    }
    if (meta.at("version").get<int>() != kFormatVersion) {
      throw IoError("unsupported problem file version in " + (dir / "meta.json").string());
    }
    file.family = meta.value("family", std::string("custom"));
    const Index m = meta.at("m").get<Index>();
    const BlockPartition partition(meta.at("block_sizes").get<std::vector<Index>>());
    const auto& objectives = meta.at("objectives");
    if (static_cast<Index>(objectives.size()) != partition.num_blocks()) {
      throw IoError("meta.json lists " + std::to_string(objectives.size()) +
                    " objectives for " + std::to_string(partition.num_blocks()) + " blocks");
    }
    std::vector<BlockObjective> terms;
    for (Index j = 0; j < partition.num_blocks(); ++j) {
      terms.push_back(objective_from_json(objectives[static_cast<std::size_t>(j)], partition.size(j)));
    }
    file.problem.objective = SeparableObjective(std::move(terms));
    if (meta.contains("seed") && !meta.at("seed").is_null()) {
      file.seed = meta.at("seed").get<std::uint64_t>();
    }

    {
      auto in = open_in(dir / "A.mtx");
      file.problem.a = read_matrix_market(in, partition);
    }
    if (file.problem.a.rows() != m) throw IoError("A.mtx row count differs from meta.json m");
    {
      auto in = open_in(dir / "b.vec");
      file.problem.b = read_vector(in);
    }
    if (fs::exists(dir / "x_star.vec")) {
      auto in = open_in(dir / "x_star.vec");
      file.x_star = read_vector(in);
      if (file.x_star->size() != partition.total_size()) {
        throw IoError("x_star.vec length differs from the total block size");
      }
    }

    const json defaults = meta.value("defaults", json::object());
    if (defaults.contains("rho")) file.rho = defaults.at("rho").get<double>();
    if (defaults.contains("gamma")) file.gamma = defaults.at("gamma").get<double>();
    if (defaults.contains("groups")) file.groups = defaults.at("groups").get<Index>();
    if (defaults.contains("stop")) {
      const auto& stop = defaults.at("stop");
      const std::string kind = stop.at("kind").get<std::string>();
      const double tol = stop.at("tol").get<double>();
      if (kind == "constraint_residual") {
        file.stop = StopRule::constraint_residual(tol);
      } else if (kind == "relative_error") {
        if (!file.x_star) throw IoError("relative_error stop rule without x_star.vec");
        file.stop = StopRule::relative_error(*file.x_star, tol);
      } else if (kind == "max_epochs") {
        file.stop = StopRule::max_epochs();
      } else {
        throw IoError("unknown stop rule '" + kind + "' in meta.json");
      }
    }
  } catch (const json::exception& e) {
    throw IoError("malformed " + (dir / "meta.json").string() + ": " + e.what());
  } catch (const ShapeError& e) {
    throw IoError(std::string("inconsistent problem files: ") + e.what());
  } catch (const InvalidParameterError& e) {
    throw IoError(std::string("invalid objective parameters: ") + e.what());
  }
  try {
    file.problem.validate();
  } catch (const ShapeError& e) {
    throw IoError("inconsistent problem in " + dir.string() + ": " + e.what());
  }
  return file;
}

std::string run_report_json(const RunReport& report, const RunEcho& echo) {
  json out;
  out["outcome"] = to_string(report.outcome);
  out["converged"] = report.converged();
  out["diverged"] = report.diverged();
  out["epochs"] = report.epochs;
  out["final_half_sq_residual"] = report.final_half_sq_residual;
  out["final_relative_error"] =
      report.final_relative_error ? json(*report.final_relative_error) : json(nullptr);
  out["tau_rule"] = to_string(report.tau_rule);
  out["schedule"] = to_string(report.schedule);
  out["metric_violation"] = report.metric_violation;
  out["wall_time_seconds"] = report.wall_time_seconds;

  json config;
  config["problem"] = echo.problem;
  config["algorithm"] = echo.algorithm;
  config["rho"] = echo.rho;
  config["gamma"] = echo.gamma;
  config["groups"] = echo.groups ? json(*echo.groups) : json(nullptr);
  config["max_epochs"] = echo.max_epochs;
  config["stop"] = {{"kind", echo.stop}, {"tol", echo.stop_tol}};
  config["tau_note"] = echo.tau_note;
  config["tau"] = to_std(echo.tau);
  config["threads"] = echo.threads;
  out["config"] = std::move(config);
  return out.dump(2);
}

void write_trace_csv(const std::vector<EpochRecord>& history, std::ostream& out) {
  out << "epoch,half_sq_residual,g_dist_to_ref,g_step\n";
  for (const auto& rec : history) {
    out << rec.epoch << ',' << format_double(rec.half_sq_residual) << ','
        << format_double(rec.g_dist_to_ref) << ',' << format_double(rec.g_step) << '\n';
  }
}

}  // namespace blockadmm
