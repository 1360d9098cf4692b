import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_refinement
from uzawa_afem.mesh import (
    ContractError,
    MeshError,
    Partition,
    Triangulation,
    audit_closure_estimate,
    bisect_partition,
    close,
    descendants_in,
    domain_area,
    hanging_nodes,
    initial_mesh,
    is_conforming,
    is_refinement,
    min_angles,
    overlay,
    refine_conforming,
    similarity_key,
    sons_count,
    uniform_refine,
)


def test_unit_square_has_two_triangles_sharing_the_diagonal(square):
    forest, T = square
    assert len(T) == 2 and forest.n_vertices == 4
    edges = [tuple(sorted(forest.elements[t, :2])) for t in T.leaves]
    assert edges[0] == edges[1] == (0, 2)


def test_lshape_counts(lshape):
    forest, T = lshape
    assert len(T) == 6 and forest.n_vertices == 8
    assert domain_area(forest) == pytest.approx(3.0)
    assert is_conforming(T)


def test_custom_mesh_rejects_duplicate_vertices():
    with pytest.raises(MeshError):
        initial_mesh("custom", vertices=[(0, 0), (1, 0), (0, 1)], elements=[(0, 0, 1)])


def test_custom_mesh_rejects_hanging_input():
    verts = [(0, 0), (2, 0), (0, 2), (1, 0), (1, 1)]
    with pytest.raises(MeshError):
        initial_mesh("custom", vertices=verts, elements=[(0, 1, 2), (0, 3, 4)])


def test_unknown_domain():
    with pytest.raises(MeshError):
        initial_mesh("disk")


def test_elements_are_counterclockwise_with_newest_vertex_last(rng, lshape):
    forest, T = lshape
    T = random_refinement(T, rng, 20)
    p = forest.coords[forest.elements[T.leaves]]
    det = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    assert np.all(det > 0)
    for t in T.leaves.tolist():
        par = int(forest.parents[t])
        if par >= 0:
            a, b, _ = forest.elements[par]
            assert forest.midpoint(int(a), int(b)) == forest.elements[t, 2]


def test_bisect_both_roots_gives_four(square):
    _, T = square
    assert len(bisect_partition(T, T.leaves)) == 4


def test_bisect_empty_marking_is_identity(square):
    _, T = square
    assert bisect_partition(T, []) is T


def test_bisect_one_root_leaves_a_hanging_node(square):
    forest, T = square
    P = bisect_partition(T, [0])
    assert len(P) == 3 and not is_conforming(P)
    assert len(hanging_nodes(forest, P.leaves)) == 1


def test_bisect_rejects_non_leaves(square):
    _, T = square
    with pytest.raises(ContractError):
        bisect_partition(T, [7])


def test_close_of_conforming_is_identity(square):
    _, T = square
    assert close(T) is T


def _brute_force_closure(P, extra):
    """Smallest conforming refinement reachable with at most ``extra`` more bisections."""
    best = None
    frontier = [P]
    for _ in range(extra + 1):
        for Q in frontier:
            if is_conforming(Q) and (best is None or len(Q) < len(best)):
                best = Q
        frontier = [bisect_partition(Q, [t]) for Q in frontier for t in Q.leaves.tolist()]
    return best


def test_close_three_element_square_gives_four(square):
    _, T = square
    P = bisect_partition(T, [0])
    C = close(P)
    assert len(C) == 4 and is_conforming(C)
    assert len(_brute_force_closure(P, 3)) == 4


def test_close_is_idempotent_and_coarsest(rng, square):
    _, T = square
    T = random_refinement(T, rng, 4)
    for _ in range(10):
        P = bisect_partition(T, rng.choice(T.leaves, 2, replace=False))
        C = close(P)
        assert is_conforming(C) and is_refinement(C, P)
        assert close(C.as_partition()) == C
    # tiny brute-force comparison
    _, T0 = initial_mesh("unit_square")
    P = bisect_partition(bisect_partition(T0, [0]), [2])
    assert len(close(P)) == len(_brute_force_closure(P, 3))


def test_refine_conforming_empty_marking(square):
    _, T = square
    assert refine_conforming(T, []) is T


def test_refine_one_root_forces_neighbour(square):
    _, T = square
    T1 = refine_conforming(T, [0])
    assert len(T1) == 4 and is_conforming(T1)


def test_sons_at_most_four_on_random_steps(rng, lshape):
    _, T = lshape
    for _ in range(100):
        T1 = random_refinement(T, rng, 1)
        assert sons_count(T, T1).max() <= 4
        T = T1


def test_overlay_identities(rng, square):
    _, T0 = square
    T = random_refinement(T0, rng, 5)
    assert overlay(T, T) == T
    assert overlay(T, T0) == T


def test_overlay_bound_on_random_pairs(rng, lshape):
    forest, T0 = lshape
    T = T0
    for k in range(200):
        A = random_refinement(T, rng, 1)
        P = T0.as_partition()
        for _ in range(int(rng.integers(0, 4))):
            P = bisect_partition(P, rng.choice(P.leaves, 1))
        O = overlay(A, P)
        assert len(O) <= len(A) + len(P) - len(T0)
        assert is_refinement(O, A) and is_refinement(O, P)
        if k % 20 == 0:
            T = A


def test_overlay_rejects_foreign_forests(square):
    _, T = square
    _, S = initial_mesh("unit_square")
    with pytest.raises(ContractError):
        overlay(T, S)


def test_audit_full_refinement_ratio_one(square):
    _, T = square
    assert audit_closure_estimate([(T, T.leaves.tolist())]) == 1.0


def test_audit_empty_markings_ratio_zero(square):
    _, T = square
    assert audit_closure_estimate([(T, []), (T, [])]) == 0.0


def test_audit_fifty_steps_has_no_trend():
    constants, lengths = [], []
    for seed in range(40):
        rng = np.random.default_rng(seed)
        _, T = initial_mesh("unit_square")
        hist = []
        L = 40 + seed
        for _ in range(L):
            M = rng.choice(T.leaves, size=min(int(rng.integers(1, 4)), len(T)), replace=False).tolist()
            hist.append((T, M))
            T = refine_conforming(T, M)
        constants.append(audit_closure_estimate(hist))
        lengths.append(L)
    assert np.isfinite(constants).all()
    assert np.polyfit(lengths, constants, 1)[0] <= 0.01


def test_similarity_classes_are_finite(rng, square):
    forest, T = square
    T = uniform_refine(T, 2)
    keys = set()
    for _ in range(12):
        T = random_refinement(T, rng, 3, max_marks=6)
        keys |= {similarity_key(forest, t) for t in T.leaves.tolist()}
    assert len(keys) <= 8
    assert min_angles(forest, T.leaves).min() >= np.pi / 8 - 1e-12


def test_descendants_in(square):
    forest, T = square
    T2 = uniform_refine(T, 2)
    d = descendants_in(T2, 0)
    assert len(d) == 4
    assert np.isclose(forest.areas(d).sum(), forest.areas([0])[0])


def test_partition_views():
    forest, T = initial_mesh("unit_square")
    P = Partition(forest, [1, 0])
    assert P == T.as_partition() and hash(P) == hash(T.as_partition())
    with pytest.raises(ContractError):
        P.index_of([5])
    with pytest.raises(ContractError):
        Triangulation(forest, bisect_partition(T, [0]).leaves, check=True)


@given(st.lists(st.integers(0, 10_000), min_size=1, max_size=12))
def test_random_marking_sequences_stay_conforming_nested(choices):
    forest, T = initial_mesh("l_shape")
    total_area = domain_area(forest)
    for c in choices:
        Tn = refine_conforming(T, [int(T.leaves[c % len(T)])])
        assert is_conforming(Tn) and is_refinement(Tn, T)
        assert sons_count(T, Tn).max() <= 4
        T = Tn
    assert T.areas.sum() == pytest.approx(total_area, rel=1e-13)


@given(st.lists(st.integers(0, 10_000), min_size=1, max_size=10), st.lists(st.integers(0, 10_000), max_size=10))
def test_overlay_and_closure_properties(a, b):
    forest, T0 = initial_mesh("unit_square")
    P, Q = T0.as_partition(), T0.as_partition()
    for c in a:
        P = bisect_partition(P, [int(P.leaves[c % len(P)])])
    for c in b:
        Q = bisect_partition(Q, [int(Q.leaves[c % len(Q)])])
    O = overlay(P, Q)
    assert len(O) <= len(P) + len(Q) - len(T0)
    C = close(P)
    assert is_conforming(C) and is_refinement(C, P) and close(C) == C
    assert len(C) - len(T0) <= 6 * (len(P) - len(T0)) + 1


def test_three_bisection_levels_of_the_square():
    forest, T = initial_mesh("unit_square")
    T = uniform_refine(T, 3)
    assert len(T) == 16
    assert len(np.unique(forest.elements[T.leaves])) == 13
    assert np.allclose(T.areas, 1 / 16)
