"""Vector Poisson solves, the reduced Stokes reference solver and the Schur surrogate."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fem import (
    BodyForce,
    PressureField,
    VelocityField,
    assemble_divergence,
    assemble_stiffness,
    assemble_vector_stiffness,
    geometry,
    load_vector,
)
from .mesh import (
    ContractError,
    Partition,
    Triangulation,
    ancestor_map,
    close,
    is_refinement,
    uniform_refine,
)


class SolverError(RuntimeError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class SolveReport:
    mode: str
    iterations: int
    update_norm: float
    criterion_met: bool
    q_pcg: float = float("nan")


def _factor(T: Triangulation):
    lu = T._cache.get("stiffness_lu")
    if lu is None:
        K = assemble_stiffness(T).tocsc()
        if K.shape[0] == 0:
            lu = None
        else:
            lu = spla.splu(K)
        T._cache["stiffness_lu"] = lu
    return lu


def _solve_scalar(T: Triangulation, rhs: np.ndarray) -> np.ndarray:
    if rhs.shape[0] == 0:
        return rhs.copy()
    lu = _factor(T)
    return lu.solve(np.ascontiguousarray(rhs))


def velocity_rhs(T: Triangulation, Q: PressureField, f: BodyForce, quad_order: int = 4):
    """Right-hand side ``<f, V> - b(V, Q)`` as a ``(n_free, 2)`` array."""
    F = load_vector(T, f, quad_order)
    B = assemble_divergence(T, Q.partition)
    n = geometry(T).n_free
    bt = B.T @ Q.coeffs
    return F - np.column_stack([bt[:n], bt[n:]])


def pcg_iterates(A, b, x0, inv_diag) -> Iterator[np.ndarray]:
    """Jacobi-preconditioned CG; yields every iterate after ``x0``."""
    x = np.array(x0, dtype=float)
    r = b - A @ x
    z = inv_diag * r
    d = z.copy()
    rz = r @ z
    while True:
        if rz == 0.0:
            yield x.copy()
            continue
        Ad = A @ d
        alpha = rz / (d @ Ad)
        x = x + alpha * d
        r = r - alpha * Ad
        z = inv_diag * r
        rz_new = r @ z
        d = z + (rz_new / rz) * d
        rz = rz_new
        yield x.copy()


def solve_velocity(
    T: Triangulation,
    Q: PressureField,
    f: BodyForce,
    mode: str = "direct",
    kappa1: float = 0.0,
    estimator_hook: Optional[Callable[[VelocityField], float]] = None,
    warm_start: Optional[VelocityField] = None,
    quad_order: int = 4,
    max_iter: int = 10_000,
) -> tuple[VelocityField, SolveReport]:
    """Galerkin solution of ``a(U, V) = <f, V> - b(V, Q)`` on ``T``.

    ``mode="pcg"`` stops once ``|U_{l+1} - U_l|_V <= kappa1' eta(U_{l+1})`` with
    ``kappa1' = kappa1 (1 - q) / q`` and ``q`` the largest recent ratio of
    successive update norms.
    """
    if not is_refinement(T, Q.partition):
        raise ContractError("triangulation does not refine the pressure partition")
    rhs = velocity_rhs(T, Q, f, quad_order)
    if mode == "direct":
        U = VelocityField(T, _solve_scalar(T, rhs))
        return U, SolveReport("direct", 0, 0.0, True)
    if mode != "pcg":
        raise ValueError(f"unknown solver mode {mode!r}")
    if kappa1 <= 0 or estimator_hook is None:
        raise ValueError("pcg mode needs kappa1 > 0 and an estimator hook")

    A = assemble_vector_stiffness(T)
    diag = A.diagonal()
    inv_diag = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 0.0)
    b = np.concatenate([rhs[:, 0], rhs[:, 1]])
    x0 = warm_start.vector if warm_start is not None else np.zeros_like(b)
    if len(b) == 0:
        return VelocityField.from_vector(T, b), SolveReport("pcg", 0, 0.0, True)

    prev = x0
    prev_step = None
    ratios: list[float] = []
    report = SolveReport("pcg", 0, float("inf"), False)
    for it, x in enumerate(pcg_iterates(A, b, x0, inv_diag), start=1):
        dx = x - prev
        step = float(np.sqrt(max(dx @ (A @ dx), 0.0)))
        if prev_step is not None and prev_step > 0:
            ratios.append(step / prev_step)
        prev, prev_step = x, step
        q = min(max(max(ratios[-5:], default=0.9), 0.5), 0.99)
        kappa1_prime = kappa1 * (1.0 - q) / q
        U = VelocityField.from_vector(T, x)
        report = SolveReport("pcg", it, step, False, q)
        if it >= 2 and step <= kappa1_prime * estimator_hook(U):
            report.criterion_met = True
            return U, report
        if step == 0.0:
            report.criterion_met = True
            return U, report
        if it >= max_iter:
            raise SolverError("PCG did not satisfy the stopping rule", report)
    raise AssertionError("unreachable")


def galerkin_residual(T: Triangulation, U: VelocityField, Q: PressureField, f: BodyForce, quad_order=4):
    """``a(U, phi) - <f, phi> + b(phi, Q)`` for every basis function."""
    K = assemble_stiffness(T)
    return K @ U.dofs - velocity_rhs(T, Q, f, quad_order)


# -- reduced Stokes problem ------------------------------------------------------------


def reduced_stokes_solve(T: Triangulation, P: Partition, f: BodyForce, quad_order: int = 4):
    """Saddle point solve on ``V(T) x P(P)`` with a zero-mean multiplier.

    Used as a reference for the best pressure approximation on ``P``.
    """
    if not is_refinement(T, P):
        raise ContractError("triangulation does not refine the pressure partition")
    A = assemble_vector_stiffness(T)
    B = assemble_divergence(T, P)
    a = P.areas[None, :]
    n, m = A.shape[0], B.shape[0]
    M = sp.bmat(
        [[A, B.T, None], [B, None, sp.csr_matrix(a.T)], [None, sp.csr_matrix(a), None]],
        format="csc",
    )
    F = load_vector(T, f, quad_order)
    rhs = np.concatenate([F[:, 0], F[:, 1], np.zeros(m + 1)])
    sol = spla.splu(M).solve(rhs)
    U = VelocityField.from_vector(T, sol[:n])
    return U, PressureField(P, sol[n : n + m]).zero_mean()


# -- Schur complement surrogate ----------------------------------------------------------


class SchurSurrogate:
    """``S = B A^{-1} B'`` evaluated with velocities on a fixed fine triangulation.

    The reference triangulation is ``depth`` uniform refinements of ``close(P)``.
    """

    def __init__(self, P: Partition, depth: int = 3, T_ref: Optional[Triangulation] = None):
        self.partition = P
        self.depth = depth
        self.T_ref = T_ref if T_ref is not None else uniform_refine(close(P), depth)
        if not is_refinement(self.T_ref, P):
            raise ContractError("reference triangulation does not refine P")
        self._dense = None

    def velocity(self, q: PressureField) -> VelocityField:
        """``w`` with ``a(w, v) = b(v, q)`` for all ``v`` on the reference mesh."""
        B = assemble_divergence(self.T_ref, q.partition)
        rhs = B.T @ q.coeffs
        n = geometry(self.T_ref).n_free
        w = _solve_scalar(self.T_ref, np.column_stack([rhs[:n], rhs[n:]]))
        return VelocityField(self.T_ref, w)

    def apply(self, q: PressureField) -> tuple[PressureField, float]:
        w = self.velocity(q)
        Sq = PressureField(self.T_ref.as_partition(), -w.divergence())
        energy = float(np.sum(w.dofs * (assemble_stiffness(self.T_ref) @ w.dofs)))
        return Sq, float(np.sqrt(max(energy, 0.0)))

    def norm(self, q: PressureField) -> float:
        return self.apply(q)[1]

    def matrix(self) -> np.ndarray:
        """Dense ``B K^{-1} B^T`` on the pressure coefficients of ``P``."""
        if self._dense is None:
            B = assemble_divergence(self.T_ref, self.partition)
            n = geometry(self.T_ref).n_free
            Bt = B.T.toarray()
            X = np.empty_like(Bt)
            X[:n] = _solve_scalar(self.T_ref, Bt[:n])
            X[n:] = _solve_scalar(self.T_ref, Bt[n:])
            S = B @ X
            self._dense = 0.5 * (S + S.T)
        return self._dense

    def spectrum(self) -> np.ndarray:
        """Eigenvalues of ``Pi_P S`` on zero-mean fields of ``P`` (ascending)."""
        S = self.matrix()
        Mw = self.partition.areas
        Z = _zero_mean_basis(Mw)
        lam = sla.eigh(Z.T @ S @ Z, Z.T @ (Mw[:, None] * Z), eigvals_only=True)
        return lam

    def c_div(self) -> float:
        """Smallest constant with ``|q|_Omega <= C |q|_P`` on ``P(P)``."""
        return float(1.0 / np.sqrt(self.spectrum()[0]))


def _zero_mean_basis(weights: np.ndarray) -> np.ndarray:
    n = len(weights)
    Z = np.zeros((n, n - 1))
    Z[: n - 1] = np.eye(n - 1)
    Z[n - 1] = -weights[: n - 1] / weights[n - 1]
    return Z


def schur_apply(q: PressureField, s: SchurSurrogate):
    """Approximate ``S q`` on the reference mesh and ``|q|_P``."""
    return s.apply(q)


def project_to(P: Partition, Q: PressureField) -> PressureField:
    """L2 projection of a pressure on a refinement of ``P`` onto ``P``."""
    pos = ancestor_map(Q.partition, P)
    integ = np.bincount(pos, Q.partition.areas * Q.coeffs, minlength=len(P))
    return PressureField(P, integ / P.areas)


class PowerIterationError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


def _power_norm(apply, P: Partition, iters: int, tol: float, seed: int) -> float:
    rng = np.random.default_rng(seed)
    w = P.areas

    def normalise(c):
        c = c - (w @ c) / w.sum()
        return c / np.sqrt(w @ c**2)

    q = normalise(rng.standard_normal(len(P)))
    trace = []
    for _ in range(iters):
        y = apply(q)
        y = y - (w @ y) / w.sum()
        rho = float(np.sqrt(w @ y**2))
        trace.append(rho)
        if rho == 0.0:
            return 0.0
        q = y / rho
    tail = np.asarray(trace[-5:])
    if np.any(np.diff(tail) < -tol * tail[-1]) or (tail.max() - tail.min()) > tol * tail[-1]:
        raise PowerIterationError("power iteration did not settle", trace)
    return trace[-1]


def richardson_contraction_estimate(
    alpha: float, s: SchurSurrogate, iters: int = 200, tol: float = 1e-3, seed: int = 0
) -> float:
    """Power-iteration estimate of ``|I - alpha Pi_P S|`` on zero-mean fields."""
    if alpha < 0 or iters < 30:
        raise ValueError("need alpha >= 0 and at least 30 iterations")
    if alpha == 0:
        return 1.0
    P = s.partition
    return _power_norm(lambda c: c - alpha * _proj_schur(s, c), P, iters, tol, seed)


def _proj_schur(s: SchurSurrogate, c: np.ndarray) -> np.ndarray:
    Sq, _ = s.apply(PressureField(s.partition, c))
    return project_to(s.partition, Sq).coeffs


def schur_norm_estimate(s: SchurSurrogate, iters: int = 200, tol: float = 1e-3, seed: int = 0) -> float:
    """Power-iteration estimate of ``|Pi_P S|``."""
    return _power_norm(lambda c: _proj_schur(s, c), s.partition, iters, tol, seed)
