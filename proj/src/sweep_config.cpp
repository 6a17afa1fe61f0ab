#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <toml.hpp>

#include "blockadmm/errors.hpp"
#include "blockadmm/experiments.hpp"

namespace blockadmm {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.contains(key)) {
      throw InvalidConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

AlgorithmSpec parse_algorithm(const json& node) {
  AlgorithmSpec alg;
  if (node.is_string()) {
    alg.algorithm = algorithm_from_string(node.get<std::string>());
    return alg;
  }
  if (!node.is_object() || !node.contains("name")) {
    throw InvalidConfigError("each algorithm must be a name or a table with a 'name' key");
  }
  reject_unknown_keys(node, {"name", "groups", "runs"}, "algorithm entry");
  alg.algorithm = algorithm_from_string(node.at("name").get<std::string>());
  read_if(node, "groups", alg.groups);
  read_if(node, "runs", alg.runs);
  if (alg.groups != 0 && alg.algorithm != Algorithm::kHadmm) {
    throw InvalidConfigError("'groups' only applies to hadmm");
  }
  return alg;
}

void parse_instance(const json& node, SweepSpec& spec) {
  if (!node.is_object()) throw InvalidConfigError("'instance' must be a table");
  if (spec.family == Family::kL2) {
    reject_unknown_keys(node,
                        {"rows", "num_blocks", "block_size", "nnz_per_row", "row_nnz", "rho",
                         "gamma", "tol", "hybrid_groups"},
                        "l2 instance");
    auto& s = spec.l2;
    read_if(node, "rows", s.rows);
    read_if(node, "num_blocks", s.num_blocks);
    read_if(node, "block_size", s.block_size);
    read_if(node, "nnz_per_row", s.nnz_per_row);
    if (node.contains("row_nnz")) {
      s.row_nnz = row_nnz_mode_from_string(node.at("row_nnz").get<std::string>());
    }
    read_if(node, "rho", s.rho);
    read_if(node, "gamma", s.gamma);
    read_if(node, "tol", s.tol);
    read_if(node, "hybrid_groups", s.hybrid_groups);
  } else {
    reject_unknown_keys(node,
                        {"rows", "num_blocks", "block_size", "sparsity", "rho_scale", "gamma", "tol",
                         "hybrid_groups"},
                        "l1 instance");
    auto& s = spec.l1;
    read_if(node, "rows", s.rows);
    read_if(node, "num_blocks", s.num_blocks);
    read_if(node, "block_size", s.block_size);
    read_if(node, "sparsity", s.sparsity);
    read_if(node, "rho_scale", s.rho_scale);
    read_if(node, "gamma", s.gamma);
    read_if(node, "tol", s.tol);
    read_if(node, "hybrid_groups", s.hybrid_groups);
  }
}

SweepSpec parse_sweep_node(const json& root) {
  if (!root.is_object()) throw InvalidConfigError("sweep config must be a table/object");
  reject_unknown_keys(root,
                      {"name", "family", "algorithms", "tau", "multipliers", "runs", "seed",
                       "max_epochs", "mu", "safety", "threads", "output", "instance"},
                      "sweep config");
  SweepSpec spec;
  read_if(root, "name", spec.name);
  if (!root.contains("family")) throw InvalidConfigError("sweep config needs 'family'");
  spec.family = family_from_string(root.at("family").get<std::string>());
  if (!root.contains("algorithms") || !root.at("algorithms").is_array()) {
    throw InvalidConfigError("sweep config needs an 'algorithms' list");
  }
  for (const auto& node : root.at("algorithms")) spec.algorithms.push_back(parse_algorithm(node));

  std::string tau = "theory";
  read_if(root, "tau", tau);
  if (tau == "theory") {
    spec.theory_tau = true;
    if (root.contains("multipliers")) {
      throw InvalidConfigError("'multipliers' needs tau = \"uniform\"");
    }
  } else if (tau == "uniform") {
    spec.theory_tau = false;
    read_if(root, "multipliers", spec.multipliers);
  } else {
    throw InvalidConfigError("tau must be \"theory\" or \"uniform\", got '" + tau + "'");
  }
  read_if(root, "runs", spec.runs);
  read_if(root, "seed", spec.base_seed);
  read_if(root, "max_epochs", spec.max_epochs);
  if (root.contains("mu")) spec.assumed_mu = root.at("mu").get<double>();
  read_if(root, "safety", spec.safety);
  read_if(root, "threads", spec.threads);
  read_if(root, "output", spec.output);
  if (root.contains("instance")) parse_instance(root.at("instance"), spec);
  return spec;
}

}  // namespace

SweepSpec parse_sweep_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidConfigError(std::string("malformed JSON sweep config: ") + e.what());
  }
  try {
    return parse_sweep_node(root);
  } catch (const json::exception& e) {
    throw InvalidConfigError(std::string("bad sweep config: ") + e.what());
  }
}

SweepSpec parse_sweep_toml(const std::string& text) {
  toml::table table;
  try {
    table = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "malformed TOML sweep config: " << e.description() << " at " << e.source().begin;
    throw InvalidConfigError(msg.str());
  }
  std::ostringstream as_json;
  as_json << toml::json_formatter{table};
  return parse_sweep_json(as_json.str());
}

SweepSpec load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open sweep config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const bool is_toml = path.size() >= 5 && path.compare(path.size() - 5, 5, ".toml") == 0;
  return is_toml ? parse_sweep_toml(buf.str()) : parse_sweep_json(buf.str());
}

}  // namespace blockadmm
