"""Post-processing of run logs: rates, contraction factors, summability and
an exhaustive best-mesh oracle for very small meshes."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .estimator import estimate
from .fem import div_norm
from .mesh import Triangulation, initial_mesh, refine_conforming, uniform_refine
from .problems import get_problem
from .solvers import reduced_stokes_solve, solve_velocity


class AnalysisError(ValueError):
    pass


# -- rates -----------------------------------------------------------------------------


@dataclass
class RateFit:
    x: np.ndarray
    y: np.ndarray
    s: float
    intercept: float
    window: float
    residual: float
    sup_statistic: float
    n_points: int


def mesh_changing_points(log) -> tuple[np.ndarray, np.ndarray]:
    """``(#T - #T_init + 1, mu)`` at the first record after each mesh change."""
    recs = log.records if hasattr(log, "records") else log
    if not recs:
        return np.zeros(0), np.zeros(0)
    n0 = recs[0].n_elements
    xs, ys = [recs[0].n_elements - n0 + 1], [recs[0].mu]
    for a, b in zip(recs, recs[1:]):
        if b.n_elements != a.n_elements:
            xs.append(b.n_elements - n0 + 1)
            ys.append(b.mu)
    return np.asarray(xs, float), np.asarray(ys, float)


def fit_power_law(x, y, window: float = 0.5, min_points: int = 10) -> RateFit:
    """Least-squares fit of ``log y = c - s log x`` on the last ``window`` fraction."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if not 0 < window <= 1:
        raise AnalysisError("window must lie in (0, 1]")
    start = int(math.floor(len(x) * (1 - window)))
    xw, yw = x[start:], y[start:]
    keep = yw > 0
    xw, yw = xw[keep], yw[keep]
    if len(xw) < min_points:
        raise AnalysisError(f"fit window holds {len(xw)} points, need {min_points}")
    A = np.column_stack([np.ones(len(xw)), np.log(xw)])
    coef, res, *_ = np.linalg.lstsq(A, np.log(yw), rcond=None)
    s = -float(coef[1])
    resid = float(np.linalg.norm(A @ coef - np.log(yw)))
    return RateFit(xw, yw, s, float(coef[0]), window, resid, float(np.max(yw * xw**s)), len(xw))


def fit_rate(log, window: float = 0.5) -> RateFit:
    x, y = mesh_changing_points(log)
    if len(x) < 20:
        raise AnalysisError(f"only {len(x)} mesh-changing records, need 20")
    return fit_power_law(x, y, window)


# -- linear convergence ----------------------------------------------------------------


@dataclass
class LinearFit:
    q: float
    C: float
    contractive: bool


def _mu_sequence(seq) -> np.ndarray:
    if hasattr(seq, "records"):
        return np.asarray([r.mu for r in seq.records], float)
    return np.asarray(seq, float)


def fit_linear_convergence(seq, min_gap: int = 20) -> LinearFit:
    """Worst observed per-step factor over gaps of at least ``min_gap`` steps."""
    mu = _mu_sequence(seq)
    if np.all(mu == 0):
        return LinearFit(0.0, 0.0, True)
    if len(mu) < 2 * min_gap:
        raise AnalysisError(f"need at least {2 * min_gap} records, got {len(mu)}")
    if np.any(mu <= 0):
        raise AnalysisError("sequence must be strictly positive")
    lm = np.log(mu)
    n = len(mu)
    q_log = -math.inf
    for gap in range(min_gap, n):
        q_log = max(q_log, float(np.max(lm[gap:] - lm[:-gap])) / gap)
    q = math.exp(q_log)
    # C = max_{n' <= n} mu_n / (q^{n-n'} mu_{n'})
    idx = np.arange(n)
    w = lm - idx * q_log
    C = float(np.exp(np.max(w - np.minimum.accumulate(w))))
    return LinearFit(q, C, q < 1)


@dataclass
class SummabilityReport:
    tail_ratio: float
    half_tail_ratio: float
    growing: bool
    q: float
    C: float


def _tail_ratio(a: np.ndarray) -> float:
    tails = np.cumsum(a[::-1])[::-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(a > 0, tails / np.where(a > 0, a, 1.0), np.where(tails > 0, np.inf, 0.0))
    return float(np.max(r)) if len(r) else 0.0


def summability_diagnostic(a: Sequence[float], min_gap: Optional[int] = None) -> SummabilityReport:
    """Tail-sum constant ``max_l sum_{n>=l} a_n / a_l`` and a geometric fit.

    ``growing`` flags a tail constant that still increases noticeably when
    the sequence is doubled in length.
    """
    a = np.asarray(a, float)
    if np.any(a < 0):
        raise AnalysisError("sequence must be nonnegative")
    full = _tail_ratio(a)
    half = _tail_ratio(a[: max(len(a) // 2, 1)])
    growing = bool(full - half > 0.05 * half)
    gap = min_gap if min_gap is not None else max(1, min(20, len(a) // 2))
    pos = a[a > 0]
    if len(pos) >= 2 * gap:
        fit = fit_linear_convergence(pos, gap)
        q, C = fit.q, fit.C
    else:
        q, C = math.nan, math.nan
    return SummabilityReport(full, half, growing, q, C)


# -- quasi-monotonicity ------------------------------------------------------------------


def monotonicity_constants(log) -> dict:
    """Largest ratio ``mu_next / mu`` for each kind of transition."""
    out: dict = {}
    recs = log.records
    for a, b in zip(recs, recs[1:]):
        if a.mu > 0:
            out[a.step] = max(out.get(a.step, 0.0), b.mu / a.mu)
    return out


def velocity_loop_constants(log, kappa2: float, kappa3: float) -> dict:
    """Check ``eta <= mu <= (1 + 1/kappa3) eta / kappa2`` where the velocity loop continues."""
    bound = (1 + 1 / kappa3) / kappa2
    ratios = [r.mu / r.eta for r in log.records if r.step == "velocity_refine" and r.eta > 0]
    worst = max(ratios, default=1.0)
    return {"bound": bound, "worst": worst, "ok": worst <= bound * (1 + 1e-12) and min(ratios, default=1.0) >= 1.0}


# -- exhaustive best meshes -------------------------------------------------------------


@dataclass
class OracleResult:
    envelope: np.ndarray  # min rho over meshes with at most N extra elements
    counts: np.ndarray  # number of distinct meshes with exactly N extra elements
    complete: bool
    s_envelope: float
    class_by_count: float
    class_by_accuracy: float
    meshes: int
    rho_by_mesh: dict = field(default_factory=dict)


def conforming_refinements(T0: Triangulation, max_added: int, max_meshes: int = 200_000):
    """All conforming refinements of ``T0`` with at most ``max_added`` extra elements.

    Breadth-first search over single-element refinements with closure,
    deduplicated by leaf set. Returns ``(meshes, complete)``.
    """
    n0 = len(T0)
    seen = {T0.leaf_set: T0}
    queue = deque([T0])
    complete = True
    while queue:
        T = queue.popleft()
        for t in T.leaves.tolist():
            Tn = refine_conforming(T, [t])
            if len(Tn) - n0 > max_added or Tn.leaf_set in seen:
                continue
            if len(seen) >= max_meshes:
                complete = False
                continue
            seen[Tn.leaf_set] = Tn
            queue.append(Tn)
    return list(seen.values()), complete


def total_error_proxy(T: Triangulation, force, depth: int = 3, quad_order: int = 4) -> float:
    """``eta(T; U_T[p_T], p_T) + ||div U_T[p_T]||`` with ``p_T`` from a reduced solve."""
    T_ref = uniform_refine(T, depth)
    _, p_T = reduced_stokes_solve(T_ref, T.as_partition(), force, quad_order)
    U, _ = solve_velocity(T, p_T, force, quad_order=quad_order)
    rep = estimate(T, U, p_T, force, quad_order)
    return rep.eta + div_norm(U)


def approx_class_oracle(
    problem: str = "smooth",
    n_max: int = 10,
    s: float = 0.5,
    depth: int = 3,
    max_meshes: int = 200_000,
) -> OracleResult:
    """Lower envelope of the total error over all conforming meshes of bounded size."""
    if n_max > 12:
        raise AnalysisError("enumeration budget is limited to 12 bisections")
    prob = get_problem(problem)
    _, T0 = initial_mesh(prob.domain)
    meshes, complete = conforming_refinements(T0, n_max, max_meshes)
    n0 = len(T0)
    env = np.full(n_max + 1, np.inf)
    counts = np.zeros(n_max + 1, dtype=int)
    rho_by_mesh = {}
    for T in sorted(meshes, key=lambda m: (len(m), tuple(m.leaves.tolist()))):
        N = len(T) - n0
        rho = total_error_proxy(T, prob.force, depth)
        rho_by_mesh[tuple(T.leaves.tolist())] = rho
        counts[N] += 1
        env[N] = min(env[N], rho)
    env = np.minimum.accumulate(env)
    Ns = np.arange(n_max + 1)
    coef = np.polyfit(np.log(Ns + 1.0), np.log(env), 1)
    by_count, by_acc = approx_class_sides(env, s)
    return OracleResult(env, counts, complete, -float(coef[0]), by_count, by_acc, len(meshes), rho_by_mesh)


def approx_class_sides(env: np.ndarray, s: float) -> tuple[float, float]:
    """Both characterisations of the approximation-class constant on a truncated family.

    Only indices after which the envelope still drops are used; beyond the
    last drop the family says nothing about the accuracy-based side.
    """
    env = np.asarray(env, float)
    drops = [N for N in range(len(env) - 1) if env[N + 1] < env[N]]
    by_count = max(((N + 1) ** s * env[N] for N in drops), default=0.0)
    by_acc = 0.0
    for N in drops:
        # epsilon slightly below env[N]: fewest extra elements reaching it
        M = int(np.flatnonzero(env < env[N])[0])
        by_acc = max(by_acc, env[N] * M**s)
    return float(by_count), float(by_acc)
