#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "blockadmm/engine.hpp"
#include "blockadmm/errors.hpp"
#include "blockadmm/experiments.hpp"
#include "blockadmm/objectives.hpp"
#include "blockadmm/problem_io.hpp"
#include "blockadmm/spectral.hpp"
#include "blockadmm/tau_policy.hpp"

namespace py = pybind11;
using namespace blockadmm;

namespace {

// Python-side instance: a problem plus the run settings that come with it.
using PyInstance = ProblemFile;

PyInstance wrap(const Instance& inst) { return to_problem_file(inst); }

Index default_groups(const PyInstance& inst) {
  return inst.groups.value_or(std::min<Index>(inst.problem.num_blocks(), 10));
}

Grouping grouping_for(Algorithm alg, const PyInstance& inst, std::optional<Index> groups) {
  const Index l = alg == Algorithm::kHadmm2 ? 2 : groups.value_or(default_groups(inst));
  return make_contiguous_grouping(inst.problem.partition(), l);
}

double mu_for(const PyInstance& inst, std::optional<double> mu) {
  return mu ? *mu : min_strong_convexity(inst.problem.objective);
}

VectorXd theory_tau(const PyInstance& inst, const std::string& algorithm,
                    std::optional<Index> groups, std::optional<double> mu, double safety) {
  const Algorithm alg = algorithm_from_string(algorithm);
  const Grouping g = grouping_for(alg, inst, groups);
  const bool grouped = alg == Algorithm::kHadmm || alg == Algorithm::kHadmm2;
  return tau_theory(theory_rule(alg), inst.problem.a, grouped ? &g : nullptr,
                    inst.rho.value_or(1.0), mu_for(inst, mu), safety)
      .tau;
}

py::dict solve(const PyInstance& inst, const std::string& algorithm, std::optional<double> tau_value,
               std::optional<double> tau_multiplier, std::optional<Index> groups,
               std::optional<double> mu, std::optional<double> rho, Index max_epochs,
               std::optional<double> tol, bool history) {
  if (tau_value && tau_multiplier) {
    throw InvalidConfigError("pass at most one of tau_value and tau_multiplier");
  }
  const Algorithm alg = algorithm_from_string(algorithm);
  SolverConfig config;
  config.rho = rho.value_or(inst.rho.value_or(1.0));
  config.gamma = inst.gamma.value_or(1.0);
  config.stop = inst.stop.value_or(StopRule::constraint_residual(1e-10));
  if (tol) config.stop.tol = *tol;
  config.max_epochs = max_epochs;
  const Index l = alg == Algorithm::kHadmm2 ? 2 : groups.value_or(default_groups(inst));
  config.schedule = make_schedule(alg, inst.problem.partition(), l);
  const Index n = inst.problem.num_blocks();
  if (tau_value) {
    config.policy = tau_uniform(*tau_value, n);
  } else if (tau_multiplier) {
    const double norm = spectral_norm(make_operator(inst.problem.a)).value;
    config.policy = tau_uniform(*tau_multiplier * tuned_tau_base(norm, config.rho), n);
  } else {
    config.policy = tau_theory(theory_rule(alg), inst.problem.a, config.schedule.grouping(),
                               config.rho, mu_for(inst, mu));
  }
  RunOptions options;
  options.record_history = history;
  if (inst.x_star && config.stop.kind == StopKind::kRelativeError) {
    options.x_ref = BlockVector(inst.problem.partition(), *inst.x_star);
  }
  RunResult result;
  {
    py::gil_scoped_release release;
    result = run(inst.problem, config, options);
  }
  py::dict out;
  out["outcome"] = to_string(result.report.outcome);
  out["epochs"] = result.report.epochs;
  out["final_half_sq_residual"] = result.report.final_half_sq_residual;
  out["final_relative_error"] = result.report.final_relative_error;
  out["tau"] = config.policy.tau;
  out["x"] = result.state.x.values();
  out["y"] = result.state.y;
  if (history) {
    std::vector<double> residuals;
    for (const auto& rec : result.report.history) residuals.push_back(rec.half_sq_residual);
    out["history"] = residuals;
  }
  return out;
}

py::list sweep(const std::string& config_path, std::optional<Index> runs) {
  SweepSpec spec = load_sweep_config(config_path);
  if (runs) {
    spec.runs = *runs;
    for (auto& alg : spec.algorithms) alg.runs = std::min(alg.runs, *runs);
  }
  SweepTable table;
  {
    py::gil_scoped_release release;
    table = run_sweep(spec);
  }
  py::list cells;
  for (const auto& c : table.cells) {
    py::dict d;
    d["algorithm"] = to_string(c.algorithm.algorithm);
    d["tau_rule"] = c.tau_rule;
    d["tau_multiplier"] = c.multiplier;
    d["runs"] = c.runs();
    d["converged"] = c.count(Outcome::kConverged);
    d["mean_epochs"] = c.mean_epochs();
    d["std_epochs"] = c.std_epochs();
    d["mean_half_sq_residual"] = c.mean_half_sq_residual();
    d["diverged_fraction"] = c.diverged_fraction();
    cells.append(d);
  }
  return cells;
}

}  // namespace

PYBIND11_MODULE(_blockadmm, m) {
  m.doc() = "Block-wise ADMM solvers with Gauss-Seidel, Jacobi and hybrid schedules";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<InvalidParameterError>(m, "InvalidParameterError", base.ptr());
  py::register_exception<InvalidConfigError>(m, "InvalidConfigError", base.ptr());
  py::register_exception<InvalidGroupingError>(m, "InvalidGroupingError", base.ptr());
  py::register_exception<NotStronglyConvexError>(m, "NotStronglyConvexError", base.ptr());
  py::register_exception<DegenerateTauError>(m, "DegenerateTauError", base.ptr());
  py::register_exception<UnsupportedObjectiveError>(m, "UnsupportedObjectiveError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<PyInstance>(m, "Instance")
      .def_readonly("family", &PyInstance::family)
      .def_readonly("seed", &PyInstance::seed)
      .def_readonly("x_star", &PyInstance::x_star)
      .def_readonly("rho", &PyInstance::rho)
      .def_readonly("gamma", &PyInstance::gamma)
      .def_readonly("groups", &PyInstance::groups)
      .def_property_readonly("A", [](const PyInstance& i) { return i.problem.a.to_dense(); })
      .def_property_readonly("b", [](const PyInstance& i) { return i.problem.b; })
      .def_property_readonly("block_sizes", [](const PyInstance& i) { return i.problem.partition().sizes(); })
      .def_property_readonly("num_blocks", [](const PyInstance& i) { return i.problem.num_blocks(); })
      .def("save", [](const PyInstance& i, const std::filesystem::path& dir) { save_problem(i, dir); },
           py::arg("directory"))
      .def("__repr__", [](const PyInstance& i) {
        std::ostringstream s;
        s << "<Instance " << i.family << " m=" << i.problem.a.rows() << " N=" << i.problem.a.cols()
          << " n=" << i.problem.num_blocks() << ">";
        return s.str();
      });

  m.def("gen_l2",
        [](std::uint64_t seed, Index rows, Index num_blocks, Index block_size, Index nnz_per_row,
           const std::string& row_nnz, Index hybrid_groups) {
          L2InstanceSpec s;
          s.rows = rows;
          s.num_blocks = num_blocks;
          s.block_size = block_size;
          s.nnz_per_row = nnz_per_row;
          s.row_nnz = row_nnz_mode_from_string(row_nnz);
          s.hybrid_groups = hybrid_groups;
          return wrap(gen_l2(s, seed));
        },
        py::arg("seed") = 1, py::arg("rows") = 3000, py::arg("num_blocks") = 100,
        py::arg("block_size") = 100, py::arg("nnz_per_row") = 20, py::arg("row_nnz") = "exact",
        py::arg("hybrid_groups") = 10);

  m.def("gen_l1",
        [](std::uint64_t seed, Index rows, Index num_blocks, Index block_size, Index sparsity,
           Index hybrid_groups) {
          L1InstanceSpec s;
          s.rows = rows;
          s.num_blocks = num_blocks;
          s.block_size = block_size;
          s.sparsity = sparsity;
          s.hybrid_groups = hybrid_groups;
          return wrap(gen_l1(s, seed));
        },
        py::arg("seed") = 1, py::arg("rows") = 300, py::arg("num_blocks") = 100,
        py::arg("block_size") = 10, py::arg("sparsity") = 60, py::arg("hybrid_groups") = 25);

  m.def("load_problem", [](const std::filesystem::path& dir) { return load_problem(dir); },
        py::arg("directory"));

  m.def("theory_tau", &theory_tau, py::arg("instance"), py::arg("algorithm"),
        py::arg("groups") = py::none(), py::arg("mu") = py::none(), py::arg("safety") = 1.0,
        "Per-block theoretical tau for jadmm, fadmm, hadmm or hadmm2.");

  m.def("solve", &solve, py::arg("instance"), py::arg("algorithm"), py::kw_only(),
        py::arg("tau_value") = py::none(), py::arg("tau_multiplier") = py::none(),
        py::arg("groups") = py::none(), py::arg("mu") = py::none(), py::arg("rho") = py::none(),
        py::arg("max_epochs") = 100000, py::arg("tol") = py::none(), py::arg("history") = false,
        "Runs one solver. Without tau_value/tau_multiplier the theoretical rule is used.");

  m.def("sweep", &sweep, py::arg("config"), py::arg("runs") = py::none(),
        "Runs a sweep config (JSON or TOML) and returns one dict per cell.");

  m.def("l2_kkt_oracle", [](const PyInstance& inst) {
    const KktPoint k = l2_kkt_oracle(inst.problem.a, inst.problem.b);
    return py::make_tuple(k.x.values(), k.y);
  }, py::arg("instance"));

  m.def("prox_l1", &prox_l1, py::arg("d"), py::arg("lam"));
  m.def("prox_half_sq", &prox_half_sq, py::arg("d"), py::arg("tau"));
}
