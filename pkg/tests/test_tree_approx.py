import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_refinement
from uzawa_afem.checks import binev_checks, tiny_binev_case
from uzawa_afem.fem import VelocityField, div_norm, geometry, l2_norm, l2_project_div
from uzawa_afem.mesh import (
    ContractError,
    bisect_partition,
    descendants_in,
    initial_mesh,
    is_refinement,
    uniform_refine,
)
from uzawa_afem.tree_approx import (
    ancestors_preserved,
    binev,
    feasible_refinements,
    local_best_error,
    quasi_optimality_audit,
)


@pytest.fixture
def four():
    forest, T0 = initial_mesh("unit_square")
    return T0, uniform_refine(T0, 1)


def center_field(T, vx, vy):
    return VelocityField(T, np.array([[vx, vy]]))


def test_constant_divergence_has_zero_error(four):
    T0, T = four
    V = center_field(T, 0.5, -0.5)
    assert np.allclose(V.divergence(), [-1, -1, 1, 1])
    assert local_best_error(0, V) == 0.0
    assert local_best_error(int(T.leaves[0]), V) == 0.0


def test_plus_minus_one_gives_area(four):
    T0, T = four
    V = center_field(T, 0.5, 0.5)
    kids = descendants_in(T, 0)
    assert sorted(V.divergence()[T.index_of(kids)].tolist()) == [-1.0, 1.0]
    assert local_best_error(0, V) == pytest.approx(0.5, rel=1e-14)


def test_error_matches_an_elementwise_oracle(rng):
    _, T0 = initial_mesh("l_shape")
    T = random_refinement(uniform_refine(T0, 2), rng, 5)
    V = VelocityField(T, rng.standard_normal((geometry(T).n_free, 2)))
    g = geometry(T)
    d = V.divergence()
    for root in T0.leaves.tolist():
        pos = T.index_of(descendants_in(T, root))
        a, dv = g.area[pos], d[pos]
        mean = a @ dv / a.sum()
        assert local_best_error(root, V) == pytest.approx(a @ (dv - mean) ** 2, rel=1e-10, abs=1e-14)


def test_error_ignores_constant_shifts(four):
    _, T = four
    a = local_best_error(0, center_field(T, 0.5, 0.5))
    # adding (t, -t) shifts the divergence on root 0 by a constant
    b = local_best_error(0, center_field(T, 0.5 + 0.3, 0.5 - 0.3))
    assert a == pytest.approx(b, rel=1e-14)


def test_error_requires_a_refining_triangulation(four):
    T0, T = four
    with pytest.raises(ContractError):
        local_best_error(int(uniform_refine(T, 2).leaves[0]), center_field(T, 1, 0))


def test_divergence_free_returns_input(four):
    T0, _ = four
    P = T0.as_partition()
    T = uniform_refine(T0, 3)
    assert binev(P, VelocityField.zero(T), 0.9) == P


def test_small_vartheta_is_vacuous(rng, four):
    T0, _ = four
    T = uniform_refine(T0, 3)
    V = VelocityField(T, rng.standard_normal((geometry(T).n_free, 2)))
    P = T0.as_partition()
    ratio = l2_norm(l2_project_div(P, V)) / div_norm(V)
    res = binev(P, V, 0.5 * ratio, return_state=True)
    assert res.partition == P and res.bisections == 0


def test_worked_example_bisects_both_roots(four):
    T0, T = four
    V = center_field(T, 0.5, 0.5)
    buf = io.StringIO()
    res = binev(T0.as_partition(), V, 0.9, trace=buf, return_state=True)
    assert res.bisections == 2 and res.partition == T.as_partition()
    lines = buf.getvalue().splitlines()
    assert lines[0] == "step,elem_id,e,etilde,crit_lhs,crit_rhs"
    assert [int(r.split(",")[1]) for r in lines[1:]] == [0, 1]
    best, _ = feasible_refinements(T0.as_partition(), V, 0.9, 4)
    assert best == 2
    audit = quasi_optimality_audit(T0.as_partition(), V, 0.9, 0.95, 4)
    assert audit.ratio == 1.0


def test_audit_of_unchanged_partition(four):
    T0, T = four
    audit = quasi_optimality_audit(T0.as_partition(), VelocityField.zero(T), 0.5, 0.6, 4)
    assert audit.greedy_added == 0 and audit.ratio == 1.0


def test_audit_parameter_checks(four):
    T0, T = four
    V = center_field(T, 1, 0)
    with pytest.raises(ValueError):
        quasi_optimality_audit(T0.as_partition(), V, 0.9, 0.8)
    with pytest.raises(ValueError):
        quasi_optimality_audit(T0.as_partition(), V, 0.5, 0.6, 11)
    with pytest.raises(ValueError):
        binev(T0.as_partition(), V, 0.0)


def test_partition_must_be_coarser(four):
    T0, T = four
    P = uniform_refine(T, 1).as_partition()
    with pytest.raises(ContractError):
        binev(P, center_field(T, 1, 0), 0.5)


def test_random_audits():
    res = binev_checks(n_cases=6, seed=11)
    assert res.passed, res.details


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.0))
def test_greedy_invariants(seed, vartheta):
    rng = np.random.default_rng(seed)
    _, T0 = initial_mesh("unit_square" if seed % 2 else "l_shape")
    T = random_refinement(T0, rng, int(rng.integers(1, 8)))
    P = T0.as_partition()
    for _ in range(int(rng.integers(0, 3))):
        cand = [t for t in P.leaves.tolist() if t not in T.leaf_set]
        if cand:
            P = bisect_partition(P, [cand[0]])
    V = VelocityField(T, rng.standard_normal((geometry(T).n_free, 2)))
    res = binev(P, V, vartheta, return_state=True)
    Pn = res.partition
    assert is_refinement(Pn, P) and ancestors_preserved(Pn, T)
    assert vartheta * div_norm(V) <= l2_norm(l2_project_div(Pn, V)) * (1 + 1e-10) + 1e-14
    assert len(Pn) - len(P) == res.bisections


def test_tiny_cases_have_comparators():
    for c in range(5):
        P, T, V = tiny_binev_case(np.random.default_rng(c))
        assert len(T) - len(P) <= 8 and is_refinement(T, P)
