import math

import numpy as np
import pytest

from uzawa_afem.analysis import fit_linear_convergence
from uzawa_afem.fem import PressureField
from uzawa_afem.mesh import initial_mesh, uniform_refine
from uzawa_afem.uzawa import (
    AlgorithmConfig,
    ConfigError,
    RunLog,
    index_sequence_ok,
    velocity_loop_bound_violations,
    run,
    step_predicates,
    uzawa_update,
)


@pytest.fixture(scope="module")
def smooth_run():
    # aggressive loop parameters so every transition shows up on a small mesh
    return run(AlgorithmConfig(problem="smooth", vartheta=0.95, kappa2=0.8, kappa3=0.9, max_elements=3000))


def test_defaults_validate():
    cfg = AlgorithmConfig().validate()
    assert cfg.kappa2 < cfg.vartheta


@pytest.mark.parametrize(
    "kw",
    [
        {"kappa2": 0.3, "vartheta": 0.3},
        {"kappa2": 0.0},
        {"kappa3": 1.0},
        {"theta": 0.0},
        {"vartheta": 1.5},
        {"c_mark": 0.5},
        {"solver": "gmres"},
        {"solver": "pcg", "kappa1": 0.0},
        {"degree": 2},
        {"problem": "nope"},
        {"seed": -1},
    ],
)
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        AlgorithmConfig(**kw).validate()


def test_from_mapping_coerces_strings():
    cfg = AlgorithmConfig.from_mapping({"kappa2": "0.05", "max_elements": "1e4", "check_invariants": "no"})
    assert cfg.kappa2 == 0.05 and cfg.max_elements == 10_000 and cfg.check_invariants is False
    with pytest.raises(ConfigError, match="unknown"):
        AlgorithmConfig.from_mapping({"kapa2": "0.1"})
    with pytest.raises(ConfigError, match="bad value"):
        AlgorithmConfig.from_mapping({"theta": "half"})


def test_step_predicates():
    assert step_predicates(1.0, 1.0, 10.0, 0.2, 0.3) == {"while_cond": True, "if_cond": False}
    assert step_predicates(1.0, 5.0, 10.0, 0.1, 0.3) == {"while_cond": False, "if_cond": True}
    assert step_predicates(0.0, 0.0, 0.0, 0.1, 0.3) == {"while_cond": True, "if_cond": True}


def test_uzawa_update():
    _, T0 = initial_mesh("unit_square")
    P = T0.as_partition()
    Q = PressureField(P, np.array([1.0, -1.0]))
    R = PressureField(P, np.array([0.25, -0.25]))
    assert np.allclose(uzawa_update(Q, R).coeffs, [0.75, -0.75])
    other = uniform_refine(T0, 1).as_partition()
    with pytest.raises(ValueError):
        uzawa_update(Q, PressureField.zero(other))


def test_zero_problem_stops_at_once():
    res = run(AlgorithmConfig(problem="zero"))
    assert len(res.log.records) == 1 and res.log.stop_reason == "mu_tol"
    assert res.log.records[0].mu == 0.0


def test_index_sequence_and_velocity_loop_bound(smooth_run):
    log = smooth_run.log
    cfg = log.config
    assert index_sequence_ok(log)
    assert velocity_loop_bound_violations(log, cfg.kappa2, cfg.kappa3) == []
    assert log.stop_reason == "max_elements"
    assert {r.step for r in log.records} >= {"pressure_refine", "uzawa_update", "velocity_refine"}


def test_estimator_envelope(smooth_run):
    mu = np.array(smooth_run.log.column("mu"))
    # mu_m <= C mu_n for m >= n with a moderate constant
    worst = max(mu[n + 1:].max() / mu[n] for n in range(len(mu) - 1))
    assert worst <= 10


def test_pressure_refine_skips_resolve(smooth_run):
    recs = smooth_run.log.records
    for a, b in zip(recs, recs[1:]):
        if a.step == "pressure_refine":
            assert (a.n_elements, a.eta, a.div) == (b.n_elements, b.eta, b.div)


def test_csv_round_trip(tmp_path, smooth_run):
    path = tmp_path / "log.csv"
    smooth_run.log.write_csv(path)
    back = RunLog.read_csv(path, smooth_run.log.config)
    assert back.records == smooth_run.log.records
    assert back.to_csv() == smooth_run.log.to_csv()


def test_runs_are_deterministic():
    cfg = AlgorithmConfig(problem="lshape", max_elements=1500)
    assert run(cfg).log.to_csv() == run(cfg).log.to_csv()


def test_pcg_mode():
    cfg = AlgorithmConfig(problem="smooth", solver="pcg", kappa1=0.1, max_elements=1500)
    log = run(cfg).log
    assert all(r.solver_mode == "pcg" for r in log.records)
    assert index_sequence_ok(log)
    direct = run(AlgorithmConfig(problem="smooth", max_elements=1500)).log
    assert log.records[-1].mu == pytest.approx(direct.records[-1].mu, rel=0.2)


def test_mu_tol_stop():
    log = run(AlgorithmConfig(problem="smooth", mu_tol=1.0, max_elements=10**6)).log
    assert log.stop_reason == "mu_tol" and log.records[-1].mu <= 1.0
    assert all(r.mu > 1.0 for r in log.records[:-1])


@pytest.mark.parametrize("problem", ["lshape_corner", "lshape", "lshape_constant"])
def test_corner_grading(problem):
    T = run(AlgorithmConfig(problem=problem, max_elements=5000)).state.T
    xy = T.forest.coords[T.forest.elements[T.leaves]]
    at_corner = np.any(np.all(np.abs(xy) < 1e-14, axis=2), axis=1)
    diam = np.max(np.linalg.norm(xy - np.roll(xy, 1, axis=1), axis=2), axis=1)
    assert at_corner.any()
    assert diam[at_corner].max() < 0.05 * 2 * math.sqrt(2)


def test_linear_decay_on_a_short_run(smooth_run):
    fit = fit_linear_convergence(smooth_run.log, min_gap=5)
    assert fit.q < 1
