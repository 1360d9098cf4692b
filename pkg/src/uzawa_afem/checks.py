"""Verification suites shared by the test suite and ``uzawa-afem verify``.

Every suite is seeded through ``numpy.random.default_rng`` (PCG64) and
returns a :class:`CheckResult` holding the measured quantities.
"""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .estimator import doerfler_mark, doerfler_mark_values, estimate, estimate_subset
from .fem import (
    PressureField,
    VelocityField,
    div_norm,
    energy_norm,
    geometry,
    l2_norm,
    l2_project_div,
    pressure_from_function,
    prolongate,
)
from .analysis import (
    approx_class_oracle,
    fit_linear_convergence,
    fit_power_law,
    fit_rate,
    mesh_changing_points,
    monotonicity_constants,
    summability_diagnostic,
)
from .mesh import (
    audit_closure_estimate,
    bisect_partition,
    close,
    initial_mesh,
    is_refinement,
    overlay,
    refine_conforming,
    sons_count,
    uniform_refine,
)
from .problems import SMOOTH_FORCE
from .solvers import (
    SchurSurrogate,
    reduced_stokes_solve,
    richardson_contraction_estimate,
    schur_norm_estimate,
    solve_velocity,
)
from .tree_approx import binev, quasi_optimality_audit
from .uzawa import AlgorithmConfig, index_sequence_ok, velocity_loop_bound_violations, run

Q_RED = 2 ** (-1 / 3)


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed: float = 0.0

    def line(self) -> str:
        keys = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items() if not isinstance(v, (list, dict)))
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name} ({self.elapsed:.1f}s) {keys}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.elapsed = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2 or np.ptp(x) == 0:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def random_marks(rng, leaves, low=1, high=3):
    k = min(int(rng.integers(low, high + 1)), len(leaves))
    return rng.choice(leaves, size=k, replace=False).tolist()


# -- mesh ---------------------------------------------------------------------------------


@_timed
def mesh_properties(n_sequences=500, min_len=40, max_len=100, seed=0) -> CheckResult:
    """Overlay bound, sons per refinement, closure constants over random sequences."""
    m1_ok = m2_ok = True
    worst_sons = 0
    m3, m4, lengths = [], [], []
    rng_len = np.random.default_rng(seed)
    for s in range(n_sequences):
        rng = np.random.default_rng([seed, s])
        _, T0 = initial_mesh("unit_square" if s % 2 == 0 else "l_shape")
        L = int(rng_len.integers(min_len, max_len + 1))
        T, P = T0, T0.as_partition()
        history = []
        for _ in range(L):
            M = random_marks(rng, T.leaves)
            Tn = refine_conforming(T, M)
            sons = int(sons_count(T, Tn).max())
            worst_sons = max(worst_sons, sons)
            m2_ok &= sons <= 4
            history.append((T, M))
            T = Tn
            P = bisect_partition(P, random_marks(rng, P.leaves))
        n0 = len(T0)
        for A, B in ((T, P), (T, close(P)), (P, T0)):
            m1_ok &= len(overlay(A, B)) <= len(A) + len(B) - n0
        m3.append(audit_closure_estimate(history))
        m4.append((len(close(P)) - n0) / (len(P) - n0))
        lengths.append(L)
    s3, s4 = slope(lengths, m3), slope(lengths, m4)
    passed = m1_ok and m2_ok and np.isfinite(max(m3)) and np.isfinite(max(m4)) and s3 <= 0.01 and s4 <= 0.01
    return CheckResult(
        "mesh_properties",
        bool(passed),
        dict(overlay_bound=m1_ok, max_sons=worst_sons, closure_max=max(m3), closure_slope=s3,
             close_max=max(m4), close_slope=s4, sequences=n_sequences),
    )


# -- divergence bound ------------------------------------------------------------------------


@_timed
def divergence_inequality(n_fields=1000, max_elements=5000, seed=0) -> CheckResult:
    """``||div V|| <= ||grad V||`` for random discrete fields with zero trace."""
    rng = np.random.default_rng(seed)
    meshes = []
    for dom in ("unit_square", "l_shape"):
        _, T = initial_mesh(dom)
        while len(T) < max_elements // 4:
            T = uniform_refine(T)
        meshes.append(T)
        Ta = T
        while len(Ta) < max_elements:
            M = rng.choice(Ta.leaves, size=max(1, len(Ta) // 10), replace=False)
            Tn = refine_conforming(Ta, M)
            if len(Tn) > max_elements:
                break
            Ta = Tn
        meshes.append(Ta)
    worst = math.inf
    for k in range(n_fields):
        T = meshes[k % len(meshes)]
        n = geometry(T).n_free
        scale = 10.0 ** rng.uniform(-3, 3)
        V = VelocityField(T, scale * rng.standard_normal((n, 2)))
        e, d = energy_norm(V), div_norm(V)
        worst = min(worst, (e - d) / e)
    return CheckResult(
        "divergence_inequality",
        bool(worst >= -1e-12),
        dict(min_relative_slack=worst, fields=n_fields, largest_mesh=max(len(m) for m in meshes)),
    )


# -- Schur operator ----------------------------------------------------------------------


@_timed
def schur_contraction(alphas=(0.5, 1.0, 1.5), depth=3, seed=0) -> CheckResult:
    """Power iteration on the Schur surrogate against a dense eigen-solve."""
    _, T0 = initial_mesh("unit_square")
    P = uniform_refine(T0, 2).as_partition()
    s = SchurSurrogate(P, depth=depth)
    lam = s.spectrum()
    norm_pi = schur_norm_estimate(s, iters=400, seed=seed)
    norm_dense = float(lam.max())
    out = dict(n_partition=len(P), reference_elements=len(s.T_ref), schur_norm=norm_pi,
               schur_norm_dense=norm_dense)
    ok = norm_pi <= 1.02 and abs(norm_pi - norm_dense) <= 0.02 * norm_dense
    for a in alphas:
        est = richardson_contraction_estimate(a, s, iters=400, seed=seed)
        dense = float(np.max(np.abs(1 - a * lam)))
        out[f"contraction_{a}"] = est
        out[f"contraction_{a}_dense"] = dense
        ok &= est < 1 and abs(est - dense) <= 0.02 * dense
    return CheckResult("schur_contraction", bool(ok), out)


# -- estimator ---------------------------------------------------------------------------


def _random_pressure(rng, P, scale=1.0):
    return PressureField(P, scale * rng.standard_normal(len(P))).zero_mean()


@_timed
def estimator_axioms(levels=6, pairs=100, chain_cases=50, seed=0, theta=0.5) -> CheckResult:
    """Stability, reduction, discrete reliability, reliability and the divergence chain."""
    rng = np.random.default_rng(seed)
    f = SMOOTH_FORCE
    _, T0 = initial_mesh("unit_square")
    P = uniform_refine(T0, 2).as_partition()
    Q = pressure_from_function(P, f.p_exact).zero_mean()
    T = uniform_refine(T0, 3)
    stab, red, drel, rel = [], [], [], []
    for level in range(levels):
        U, _ = solve_velocity(T, Q, f)
        rep = estimate(T, U, Q, f)
        n = geometry(T).n_free
        worst = 0.0
        for _ in range(pairs):
            s1, s2 = 10.0 ** rng.uniform(-2, 1, size=2)
            V = U + VelocityField(T, s1 * rng.standard_normal((n, 2)))
            W = U + VelocityField(T, s2 * rng.standard_normal((n, 2)))
            Q1 = Q + _random_pressure(rng, P, 10.0 ** rng.uniform(-2, 1))
            Q2 = Q + _random_pressure(rng, P, 10.0 ** rng.uniform(-2, 1))
            lhs = abs(estimate(T, V, Q1, f).eta - estimate(T, W, Q2, f).eta)
            worst = max(worst, lhs / (energy_norm(V - W) + l2_norm(Q1 - Q2)))
        stab.append(worst)
        # effectivity against a twice uniformly refined Galerkin solution
        T_fine = uniform_refine(T, 2)
        U_fine, _ = solve_velocity(T_fine, Q, f)
        rel.append(energy_norm(U_fine - prolongate(U, T_fine)) / rep.eta)
        M = doerfler_mark(rep, theta)
        T_new = refine_conforming(T, M)
        U_new, _ = solve_velocity(T_new, Q, f)
        rep_new = estimate(T_new, U_new, Q, f)
        refined = sorted(T.leaf_set - T_new.leaf_set)
        created = sorted(T_new.leaf_set - T.leaf_set)
        d = energy_norm(U_new - prolongate(U, T_new))
        eta_old = estimate_subset(rep, refined)
        eta_new = estimate_subset(rep_new, created)
        red.append(max(0.0, eta_new - Q_RED * eta_old) / d if d > 0 else 0.0)
        drel.append(d / eta_old)
        T = T_new
    lv = np.arange(levels)
    slopes = {name: slope(lv, _normalised(v)) for name, v in
              (("stability", stab), ("reduction", red), ("discrete_reliability", drel), ("reliability", rel))}
    chain = divergence_chain(chain_cases, seed=seed)
    ok = all(s <= 0.05 for s in slopes.values()) and chain.passed
    details = {f"{k}_slope": v for k, v in slopes.items()}
    details.update(stability_max=max(stab), reduction_max=max(red), discrete_reliability_max=max(drel),
                   reliability_max=max(rel), chain_worst=chain.details["worst_ratio"],
                   constants=dict(stability=stab, reduction=red, discrete_reliability=drel, reliability=rel))
    return CheckResult("estimator_axioms", bool(ok), details)


def _normalised(v):
    v = np.asarray(v, float)
    top = v.max(initial=0.0)
    return v / top if top > 0 else np.zeros_like(v)


@_timed
def divergence_chain(cases=50, seed=0, depth=3, slack=0.03) -> CheckResult:
    """``|Pi div u[Q]| <= |div(u_P - u[Q])| <= |p_P - Q|_P <= C_div |Pi div u[Q]|``."""
    f = SMOOTH_FORCE
    worst = 0.0
    ok = True
    for c in range(cases):
        rng = np.random.default_rng([seed, 1000 + c])
        _, T0 = initial_mesh("unit_square" if c % 2 == 0 else "l_shape")
        P = T0.as_partition()
        for _ in range(int(rng.integers(1, 5))):
            P = bisect_partition(P, random_marks(rng, P.leaves, 1, 2))
        s = SchurSurrogate(P, depth=depth)
        T_ref = s.T_ref
        Q = _random_pressure(rng, P, 10.0 ** rng.uniform(-1, 1))
        u_Q, _ = solve_velocity(T_ref, Q, f)
        u_P, p_P = reduced_stokes_solve(T_ref, P, f)
        a = l2_norm(l2_project_div(P, u_Q))
        b = div_norm(u_P - u_Q)
        c_ = s.norm(p_P - Q)
        d = s.c_div() * a
        for lo, hi in ((a, b), (b, c_), (c_, d)):
            r = lo / hi if hi > 0 else (0.0 if lo == 0 else math.inf)
            worst = max(worst, r)
            ok &= lo <= (1 + slack) * hi
    return CheckResult("divergence_chain", bool(ok), dict(worst_ratio=worst, cases=cases))


# -- marking -----------------------------------------------------------------------------


def brute_force_min_cardinality(values, theta) -> int:
    values = np.asarray(values, float)
    target = theta * values.sum()
    for k in range(len(values) + 1):
        for combo in itertools.combinations(range(len(values)), k):
            if values[list(combo)].sum() >= target:
                return k
    return len(values)


@_timed
def doerfler_minimality(n_vectors=100, size=10, seed=0) -> CheckResult:
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(n_vectors):
        vals = rng.exponential(size=size) ** 2
        theta = float(rng.uniform(0.05, 1.0))
        got = len(doerfler_mark_values(vals, theta))
        mismatches += got != brute_force_min_cardinality(vals, theta)
    return CheckResult("doerfler_minimality", mismatches == 0, dict(mismatches=mismatches, vectors=n_vectors))


# -- greedy tree approximation ----------------------------------------------------------


def tiny_binev_case(rng, max_gap=8):
    """Random ``(P, V)`` with ``#T - #P <= max_gap`` on the unit square."""
    _, T0 = initial_mesh("unit_square")
    T = T0
    for _ in range(int(rng.integers(2, 5))):
        Tn = refine_conforming(T, random_marks(rng, T.leaves, 1, 1))
        if len(Tn) > 14:
            break
        T = Tn
    forest = T.forest
    inner = set()
    for t in T.leaves.tolist():
        inner.update(forest.ancestors(t))
    P = T0.as_partition()
    while len(T) - len(P) > max_gap or rng.random() < 0.5:
        cand = [t for t in P.leaves.tolist() if t in inner]
        if not cand:
            break
        P = bisect_partition(P, [cand[int(rng.integers(len(cand)))]])
    n = geometry(T).n_free
    V = VelocityField(T, rng.standard_normal((n, 2)))
    return P, T, V


@_timed
def binev_checks(n_cases=20, max_bisections=8, seed=0, bound=10.0) -> CheckResult:
    ratios, ok_post, ok_nested, no_comp = [], True, True, 0
    for c in range(n_cases):
        rng = np.random.default_rng([seed, 2000 + c])
        P, T, V = tiny_binev_case(rng, max_bisections)
        vartheta = float(rng.uniform(0.3, 0.9))
        vprime = min(vartheta + 0.05, 0.99)
        res = binev(P, V, vartheta, return_state=True)
        ok_post &= vartheta * res.div <= res.projected_div * (1 + 1e-12)
        ok_nested &= is_refinement(T, res.partition) and is_refinement(res.partition, P)
        audit = quasi_optimality_audit(P, V, vartheta, vprime, max_bisections)
        if audit.ratio is None:
            no_comp += 1
        else:
            ratios.append(audit.ratio)
    worst = max(ratios, default=0.0)
    passed = ok_post and ok_nested and no_comp == 0 and worst <= bound
    return CheckResult("binev", bool(passed), dict(postcondition=ok_post, nested=ok_nested,
                                                   max_ratio=worst, no_comparator=no_comp, cases=n_cases))


# -- exact Uzawa on a fixed partition ------------------------------------------------------


@_timed
def uzawa_contraction(steps=10, depth=3, seed=0, slack=0.03) -> CheckResult:
    f = SMOOTH_FORCE
    rng = np.random.default_rng(seed)
    _, T0 = initial_mesh("unit_square")
    P = uniform_refine(T0, 2).as_partition()
    for _ in range(3):
        P = bisect_partition(P, random_marks(rng, P.leaves, 1, 2))
    s = SchurSurrogate(P, depth=depth)
    _, p_ref = reduced_stokes_solve(s.T_ref, P, f)
    Q = PressureField.zero(P)
    errs = [s.norm(p_ref - Q)]
    for _ in range(steps):
        U, _ = solve_velocity(s.T_ref, Q, f)
        Q = (Q - l2_project_div(P, U)).zero_mean()
        errs.append(s.norm(p_ref - Q))
    errs = np.asarray(errs)
    ratios = errs[1:] / errs[:-1]
    q = float(ratios.max())
    lam = s.spectrum()
    q_theory = float(np.max(np.abs(1 - lam)))
    ok = q < 1 and q <= (1 + slack) * q_theory
    return CheckResult("uzawa_contraction", bool(ok), dict(q=q, q_spectral=q_theory, n_partition=len(P),
                                                           errors=errs.tolist()))


# -- adaptive runs --------------------------------------------------------------------------

RUN_ELEMENTS = 100_000
# the rate experiments use looser loop tolerances than the defaults
RATE_PARAMS = dict(vartheta=0.95, kappa2=0.8, kappa3=0.9)


def _run_log(problem, max_elements, **kw):
    return run(AlgorithmConfig(problem=problem, max_elements=max_elements, **kw)).log


@_timed
def linear_convergence(problems=("smooth", "lshape_constant"), max_elements=RUN_ELEMENTS,
                       q_max=0.99, c_max=1e3, seed=0) -> CheckResult:
    ok = True
    details = {}
    for prob in problems:
        log = _run_log(prob, max_elements)
        fit = fit_linear_convergence(log)
        mu = np.asarray(log.column("mu"))
        summ = summability_diagnostic(mu)
        geo = fit.C / (1 - fit.q) if fit.q < 1 else math.inf
        bad_bound = velocity_loop_bound_violations(log, log.config.kappa2, log.config.kappa3)
        ok &= fit.q <= q_max and fit.C <= c_max and index_sequence_ok(log) and not bad_bound
        details.update({
            f"{prob}_q": fit.q, f"{prob}_C": fit.C, f"{prob}_records": len(log.records),
            f"{prob}_elements": log.records[-1].n_elements,
            f"{prob}_pressure_refines": log.column("step").count("pressure_refine"),
            f"{prob}_tail_ratio": summ.tail_ratio, f"{prob}_geometric_bound": geo,
            f"{prob}_monotonicity": monotonicity_constants(log),
        })
    return CheckResult("linear_convergence", bool(ok), details)


def uniform_rate(log, window=0.5, min_points=5) -> float:
    """Rate of a run with ``theta = 1``; uniform steps double ``#T`` so fewer points exist."""
    x, y = mesh_changing_points(log)
    return fit_power_law(x, y, window, min_points).s


@_timed
def optimal_rate(max_elements=RUN_ELEMENTS, band=(0.42, 0.58), uniform_max=0.40, gap=0.05,
                 params=None, seed=0) -> CheckResult:
    params = RATE_PARAMS if params is None else params
    s_smooth = fit_rate(_run_log("smooth", max_elements, **params)).s
    s_adapt = fit_rate(_run_log("lshape_constant", max_elements, **params)).s
    s_unif = uniform_rate(_run_log("lshape_constant", max_elements, theta=1.0, **params))
    lo, hi = band
    ok = lo <= s_smooth <= hi and lo <= s_adapt <= hi and s_unif <= uniform_max and s_adapt - s_unif >= gap
    return CheckResult("optimal_rate", bool(ok), dict(smooth_s=s_smooth, lshape_s=s_adapt,
                                                      lshape_uniform_s=s_unif, **params))


def matched_counts_fit(log, n_max):
    """Adaptive points ``(N + 1, mu)`` with ``N <= n_max`` extra elements and the fitted rate."""
    x, y = mesh_changing_points(log)
    keep = x <= n_max + 1
    x, y = x[keep], y[keep]
    return x, y, -float(np.polyfit(np.log(x), np.log(y), 1)[0])


@_timed
def oracle_rate(n_max=10, band=(0.7, 1.3), seed=0) -> CheckResult:
    """Envelope decay of the best meshes against the adaptive run at the same sizes."""
    orc = approx_class_oracle("smooth", n_max)
    log = _run_log("smooth", 400)
    x, _, s_adapt = matched_counts_fit(log, n_max)
    env = orc.envelope[(x - 1).astype(int)]
    s_matched = -float(np.polyfit(np.log(x), np.log(env), 1)[0])
    ratio = s_matched / s_adapt
    ok = orc.complete and band[0] <= ratio <= band[1]
    return CheckResult("oracle_rate", bool(ok), dict(
        envelope_s_matched=s_matched, envelope_s_all=orc.s_envelope, adaptive_s=s_adapt,
        ratio=ratio, ratio_all=orc.s_envelope / s_adapt, meshes=orc.meshes,
        class_by_count=orc.class_by_count, class_by_accuracy=orc.class_by_accuracy,
        envelope=orc.envelope.tolist()))


@_timed
def determinism(problem="smooth", max_elements=5000, seed=0) -> CheckResult:
    cfg = dict(problem=problem, max_elements=max_elements, seed=seed)
    a = run(AlgorithmConfig(**cfg)).log.to_csv()
    b = run(AlgorithmConfig(**cfg)).log.to_csv()
    return CheckResult("determinism", a == b, dict(records=a.count("\n") - 1, bytes=len(a)))


SUITES = {
    "mesh_properties": mesh_properties,
    "divergence_chain": divergence_chain,
    "divergence_inequality": divergence_inequality,
    "schur_contraction": schur_contraction,
    "estimator_axioms": estimator_axioms,
    "doerfler_minimality": doerfler_minimality,
    "binev": binev_checks,
    "uzawa_contraction": uzawa_contraction,
}

QUICK = {
    "mesh_properties": dict(n_sequences=60),
    "divergence_inequality": dict(n_fields=100, max_elements=1000),
    "estimator_axioms": dict(levels=4, pairs=20, chain_cases=10),
    "doerfler_minimality": dict(n_vectors=20),
    "binev": dict(n_cases=5),
}


def run_suites(names=None, quick=False, seed=0) -> list[CheckResult]:
    out = []
    for name in names or list(SUITES):
        kwargs = dict(QUICK.get(name, {})) if quick else {}
        kwargs["seed"] = seed
        out.append(SUITES[name](**kwargs))
    return out


__all__ = ["CheckResult", "SUITES", "run_suites"]
