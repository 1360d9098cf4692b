"""The eleven acceptance criteria at their stated tolerances and time budgets.

Every criterion prints one PASS/FAIL line; the lines are repeated in the
terminal summary. Adaptive runs stop at ``RUN_ELEMENTS`` elements.
"""
import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from uzawa_afem import checks
from uzawa_afem.analysis import fit_linear_convergence, fit_rate, summability_diagnostic
from uzawa_afem.uzawa import AlgorithmConfig, run

pytestmark = pytest.mark.slow


def report(number, result, budget):
    within = result.elapsed < budget
    ok = result.passed and within
    line = f"[{number:>2}] {'PASS' if ok else 'FAIL'}  " + result.line().split("  ", 1)[1]
    line += f" budget={budget:.0f}s"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, result.details
    assert within, f"took {result.elapsed:.1f}s, budget {budget}s"


def test_01_mesh_properties():
    report(1, checks.mesh_properties(n_sequences=500), 30)


def test_02_divergence_inequality():
    report(2, checks.divergence_inequality(n_fields=1000, max_elements=5000), 10)


def test_03_schur_contraction():
    res = checks.schur_contraction()
    assert res.details["n_partition"] == 8
    report(3, res, 60)


def test_04_estimator_axioms():
    report(4, checks.estimator_axioms(levels=6, chain_cases=50), 300)


def test_05_doerfler_minimality():
    report(5, checks.doerfler_minimality(n_vectors=100, size=10), 5)


def test_06_binev():
    report(6, checks.binev_checks(n_cases=20, max_bisections=8, bound=10.0), 120)


def test_07_linear_convergence():
    res = checks.linear_convergence(problems=("smooth", "lshape_constant"))
    for prob in ("smooth", "lshape_constant"):
        assert res.details[f"{prob}_elements"] >= 10_000
    report(7, res, 2 * 600)


def test_08_optimal_rate():
    report(8, checks.optimal_rate(), 900)


def test_09_oracle_rate():
    report(9, checks.oracle_rate(n_max=10, band=(0.7, 1.3)), 600)


def test_10_uzawa_contraction():
    report(10, checks.uzawa_contraction(steps=10), 120)


def test_11_determinism():
    report(11, checks.determinism(), 600)


@pytest.mark.parametrize("problem", ["smooth", "lshape_constant"])
def test_summability_matches_geometric_fit(problem):
    """Tail-sum constant of mu against the bound ``C / (1 - q)`` from the geometric fit."""
    log = run(AlgorithmConfig(problem=problem, max_elements=checks.RUN_ELEMENTS)).log
    mu = np.asarray(log.column("mu"))
    fit = fit_linear_convergence(mu)
    tail = summability_diagnostic(mu).tail_ratio
    geometric = fit.C / (1 - fit.q)
    try:
        s_default = f"{fit_rate(log).s:.4g}"
    except Exception as exc:  # reported, not asserted
        s_default = f"n/a ({exc})"
    factor = geometric / tail
    ok = np.isfinite(tail) and 1 / 3 <= factor <= 3
    line = (f"[--] {'PASS' if ok else 'FAIL'}  summability[{problem}] tail_ratio={tail:.4g} "
            f"C/(1-q)={geometric:.4g} factor={factor:.3g} default_params_s={s_default}")
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert np.isfinite(tail)
    assert 1 / 3 <= factor <= 3
