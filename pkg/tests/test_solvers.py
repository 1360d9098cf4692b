import numpy as np
import pytest

from conftest import random_refinement
from uzawa_afem.estimator import estimate
from uzawa_afem.fem import (
    ZERO_FORCE,
    assemble_vector_stiffness,
    PressureField,
    VelocityField,
    energy_norm,
    geometry,
    l2_norm,
    l2_project_div,
    prolongate,
)
from uzawa_afem.mesh import ContractError, bisect_partition, initial_mesh, uniform_refine
from uzawa_afem.problems import SMOOTH_FORCE
from uzawa_afem.solvers import (
    SchurSurrogate,
    galerkin_residual,
    pcg_iterates,
    reduced_stokes_solve,
    richardson_contraction_estimate,
    schur_apply,
    schur_norm_estimate,
    solve_velocity,
    velocity_rhs,
)


@pytest.fixture
def setup(rng):
    _, T0 = initial_mesh("unit_square")
    P = uniform_refine(T0, 2).as_partition()
    T = random_refinement(uniform_refine(T0, 4), rng, 6)
    Q = PressureField(P, rng.standard_normal(len(P))).zero_mean()
    return T0, P, T, Q


def test_zero_data_gives_zero_velocity(setup):
    T0, P, T, _ = setup
    U, rep = solve_velocity(T, PressureField.zero(P), ZERO_FORCE)
    assert np.all(U.dofs == 0)
    assert rep.mode == "direct" and rep.iterations == 0 and rep.criterion_met


def test_direct_solve_residual(setup):
    _, _, T, Q = setup
    U, _ = solve_velocity(T, Q, SMOOTH_FORCE)
    r = galerkin_residual(T, U, Q, SMOOTH_FORCE)
    assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(velocity_rhs(T, Q, SMOOTH_FORCE))


def test_pressure_must_live_below_the_mesh(setup):
    T0, _, _, _ = setup
    fine = uniform_refine(T0, 3).as_partition()
    with pytest.raises(ContractError):
        solve_velocity(T0, PressureField.zero(fine), SMOOTH_FORCE)


def test_galerkin_best_approximation(rng, setup):
    _, _, T, Q = setup
    T_ref = uniform_refine(T, 2)
    # order 8 integrates the degree-6 integrands exactly, so orthogonality is exact
    u_ref, _ = solve_velocity(T_ref, Q, SMOOTH_FORCE, quad_order=8)
    U, _ = solve_velocity(T, Q, SMOOTH_FORCE, quad_order=8)
    err = energy_norm(u_ref - prolongate(U, T_ref))
    n = geometry(T).n_free
    A = assemble_vector_stiffness(T_ref)
    for _ in range(20):
        V = U + VelocityField(T, 0.1 * rng.standard_normal((n, 2)))
        assert err <= energy_norm(u_ref - prolongate(V, T_ref)) * (1 + 1e-12)
        d = (u_ref - prolongate(U, T_ref)).vector
        w = prolongate(V - U, T_ref).vector
        assert abs(d @ (A @ w)) <= 1e-9 * energy_norm(V - U) * max(err, 1e-300) + 1e-12


def test_velocity_is_lipschitz_in_the_pressure(rng, setup):
    _, P, T, _ = setup
    for _ in range(50):
        q = PressureField(P, rng.standard_normal(len(P)))
        r = PressureField(P, rng.standard_normal(len(P)))
        Uq, _ = solve_velocity(T, q, SMOOTH_FORCE)
        Ur, _ = solve_velocity(T, r, SMOOTH_FORCE)
        assert energy_norm(Uq - Ur) <= l2_norm(q - r) * (1 + 1e-12)


def test_pcg_energy_error_is_monotone(setup):
    _, _, T, Q = setup
    U, _ = solve_velocity(T, Q, SMOOTH_FORCE)
    A = assemble_vector_stiffness(T)
    rhs = velocity_rhs(T, Q, SMOOTH_FORCE)
    b = np.concatenate([rhs[:, 0], rhs[:, 1]])
    d = A.diagonal()
    errs = []
    for k, x in enumerate(pcg_iterates(A, b, np.zeros_like(b), 1 / d)):
        e = x - U.vector
        errs.append(np.sqrt(e @ (A @ e)))
        if k > 200 or errs[-1] < 1e-12:
            break
    assert np.all(np.diff(errs) <= 1e-12 * errs[0])


@pytest.mark.parametrize("kappa1", [0.05, 0.2, 0.5])
def test_pcg_stopping_rule_controls_the_algebraic_error(setup, kappa1):
    _, _, T, Q = setup
    hook = lambda V: estimate(T, V, Q, SMOOTH_FORCE).eta  # noqa: E731
    U, rep = solve_velocity(T, Q, SMOOTH_FORCE, "pcg", kappa1, hook)
    exact, _ = solve_velocity(T, Q, SMOOTH_FORCE)
    assert rep.criterion_met and rep.iterations > 0
    assert energy_norm(exact - U) <= kappa1 * hook(U)


def test_pcg_requires_kappa_and_hook(setup):
    _, _, T, Q = setup
    with pytest.raises(ValueError):
        solve_velocity(T, Q, SMOOTH_FORCE, "pcg", 0.0, None)
    with pytest.raises(ValueError):
        solve_velocity(T, Q, SMOOTH_FORCE, "multigrid")


def test_schur_zero_and_identity(rng, setup):
    _, P, _, _ = setup
    s = SchurSurrogate(P)
    Sq, nrm = schur_apply(PressureField.zero(P), s)
    assert nrm == 0 and np.all(Sq.coeffs == 0)
    for _ in range(100):
        q = PressureField(P, rng.standard_normal(len(P)))
        Sq, nrm = schur_apply(q, s)
        pairing = float(Sq.partition.areas @ (Sq.coeffs * q.on(Sq.partition).coeffs))
        assert pairing >= 0
        assert pairing == pytest.approx(nrm**2, rel=1e-10)
        assert nrm <= l2_norm(q) * (1 + 1e-10)


def test_surrogate_grows_with_depth(rng, setup):
    _, P, _, _ = setup
    s3, s4 = SchurSurrogate(P, 3), SchurSurrogate(P, 4)
    rel = []
    for _ in range(10):
        q = PressureField(P, rng.standard_normal(len(P))).zero_mean()
        a, b = s3.norm(q), s4.norm(q)
        assert a <= b * (1 + 1e-12)
        rel.append((b - a) / b)
    print(f"surrogate depth 3 vs 4: max relative difference {max(rel):.3%}")


def test_surrogate_requires_a_refining_mesh(setup):
    T0, P, _, _ = setup
    with pytest.raises(ContractError):
        SchurSurrogate(P, T_ref=T0)


def test_richardson_estimates(setup):
    _, P, _, _ = setup
    s = SchurSurrogate(P)
    assert richardson_contraction_estimate(0.0, s) == 1.0
    est = richardson_contraction_estimate(1.0, s)
    lam = s.spectrum()
    assert 0 < est < 1
    assert est == pytest.approx(np.max(np.abs(1 - lam)), rel=0.02)
    assert schur_norm_estimate(s) <= 1.02
    with pytest.raises(ValueError):
        richardson_contraction_estimate(-1.0, s)


def test_reduced_solution_is_a_fixed_point_of_the_update(rng):
    _, T0 = initial_mesh("l_shape")
    P = bisect_partition(T0.as_partition(), [0, 3])
    s = SchurSurrogate(P)
    U, p = reduced_stokes_solve(s.T_ref, P, SMOOTH_FORCE)
    assert abs(p.mean()) < 1e-13
    assert l2_norm(l2_project_div(P, U)) <= 1e-10 * energy_norm(U)
    U2, _ = solve_velocity(s.T_ref, p, SMOOTH_FORCE)
    assert energy_norm(U2 - U) <= 1e-10 * energy_norm(U)
