import json
import os
import pathlib

import numpy as np
import pytest

import blockadmm


def small_l2(seed=3):
    return blockadmm.gen_l2(seed=seed, rows=60, num_blocks=8, block_size=10,
                            nnz_per_row=6, hybrid_groups=4)


def test_gen_l2_shapes_and_determinism():
    a = small_l2()
    b = small_l2()
    assert a.family == "l2"
    assert a.A.shape == (60, 80)
    assert a.num_blocks == 8
    assert list(a.block_sizes) == [10] * 8
    assert np.array_equal(a.A, b.A)
    x_kkt, _ = blockadmm.l2_kkt_oracle(a)
    assert np.allclose(a.A @ x_kkt, a.b)
    assert np.all((a.A != 0).sum(axis=1) == 6)


def test_gen_l1_planted_solution():
    inst = blockadmm.gen_l1(seed=2, rows=30, num_blocks=10, block_size=5, sparsity=6,
                            hybrid_groups=5)
    assert inst.A.shape == (30, 50)
    assert np.count_nonzero(inst.x_star) == 6
    assert np.allclose(inst.A @ inst.x_star, inst.b)


@pytest.mark.parametrize("algorithm", ["fadmm", "hadmm", "jadmm"])
def test_theory_solve_reaches_kkt_point(algorithm):
    inst = small_l2()
    result = blockadmm.solve(inst, algorithm, tol=1e-20, max_epochs=200000)
    assert result["outcome"] == "converged"
    x_kkt, _ = blockadmm.l2_kkt_oracle(inst)
    assert np.linalg.norm(result["x"] - x_kkt) <= 1e-6 * np.linalg.norm(x_kkt)


def test_jacobi_rule_dominates_gauss_seidel():
    inst = small_l2()
    tau_j = blockadmm.theory_tau(inst, "jadmm")
    tau_f = blockadmm.theory_tau(inst, "fadmm")
    assert tau_j.shape == (8,)
    assert np.all(tau_j > tau_f)


def test_undersized_uniform_tau_diverges_for_jacobi():
    inst = small_l2()
    result = blockadmm.solve(inst, "jadmm", tau_multiplier=0.001, max_epochs=5000)
    assert result["outcome"] == "diverged"


def test_history_is_recorded():
    inst = small_l2()
    result = blockadmm.solve(inst, "fadmm", max_epochs=5, history=True)
    assert result["outcome"] == "max-epochs"
    assert len(result["history"]) == 6


def test_prox_operators():
    d = np.array([-2.0, 0.5, 3.0])
    assert np.allclose(blockadmm.prox_l1(d, 1.0), [-1.0, 0.0, 2.0])
    assert np.allclose(blockadmm.prox_half_sq(d, 1.0), d / 2)


def test_errors_map_to_python_exceptions(tmp_path):
    inst = small_l2()
    with pytest.raises(blockadmm.Error):
        blockadmm.solve(inst, "nope")
    with pytest.raises(blockadmm.InvalidConfigError):
        blockadmm.solve(inst, "fadmm", tau_value=1.0, tau_multiplier=1.0)
    with pytest.raises(blockadmm.IoError):
        blockadmm.load_problem(tmp_path / "missing")
    l1 = blockadmm.gen_l1(seed=1, rows=20, num_blocks=4, block_size=5, sparsity=3, hybrid_groups=2)
    with pytest.raises(blockadmm.NotStronglyConvexError):
        blockadmm.theory_tau(l1, "fadmm")


def test_save_load_round_trip(tmp_path):
    inst = small_l2()
    inst.save(tmp_path / "p")
    back = blockadmm.load_problem(tmp_path / "p")
    assert np.array_equal(back.A, inst.A)
    assert np.array_equal(back.b, inst.b)
    assert back.groups == 4


def test_sweep_from_config(tmp_path):
    config = {
        "name": "py-smoke",
        "family": "l2",
        "algorithms": ["fadmm", "jadmm"],
        "tau": "theory",
        "runs": 2,
        "instance": {"rows": 40, "num_blocks": 6, "block_size": 10, "nnz_per_row": 5,
                     "hybrid_groups": 3},
    }
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(config))
    cells = blockadmm.sweep(str(path))
    assert [c["algorithm"] for c in cells] == ["fadmm", "jadmm"]
    assert all(c["runs"] == 2 and c["converged"] == 2 for c in cells)
    assert all(c["mean_epochs"] > 0 for c in cells)


def test_shipped_config_parses_and_runs_reduced():
    source = pathlib.Path(os.environ.get("BLOCKADMM_SOURCE_DIR",
                                         pathlib.Path(__file__).resolve().parents[2]))
    config = source / "configs" / "table1_l2_theory.json"
    if not config.exists():
        pytest.skip("source configs not available")
    cells = blockadmm.sweep(str(config), runs=1)
    assert {c["algorithm"] for c in cells} == {"jadmm", "hadmm", "fadmm"}
    assert all(c["runs"] == 1 for c in cells)
