"""Residual error indicators and Dörfler marking.

For P1 velocity and P0 pressure the Laplacian and the pressure gradient
vanish elementwise, so the volume residual is just the body force. Edge
jumps of the pseudo traction ``Q n - grad(V) n`` are assembled once per
interior edge and charged to both neighbours.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .fem import (
    BodyForce,
    PressureField,
    VelocityField,
    div_norm,
    geometry,
    l2_norm,
    l2_project_div,
)
from .mesh import ContractError, Partition, Triangulation, ancestor_map, is_refinement
from .quadrature import triangle_rule


@dataclass(eq=False)
class EstimatorReport:
    triangulation: Triangulation
    eta_sq: np.ndarray  # per leaf of the triangulation, in leaf order
    total_sq: float
    div: float
    projected_div: float
    partition: Partition

    @property
    def eta(self) -> float:
        return float(np.sqrt(self.total_sq))

    def dump(self, path) -> None:
        """Write ``elem_id, eta_sq`` rows."""
        lines = ["elem_id,eta_sq"]
        lines += [f"{e},{v!r}" for e, v in zip(self.triangulation.leaves.tolist(), self.eta_sq.tolist())]
        Path(path).write_text("\n".join(lines) + "\n")


def volume_terms(T: Triangulation, f: BodyForce, quad_order: int = 4) -> np.ndarray:
    """``|T| * ||f||_T^2`` per element (cached on the triangulation)."""
    key = ("volume_terms", id(f), quad_order)
    out = T._cache.get(key)
    if out is None:
        g = geometry(T)
        bary, w = triangle_rule(quad_order)
        pts = np.einsum("qk,tkd->tqd", bary, g.xy[g.tri]).reshape(-1, 2)
        fv = f(pts).reshape(len(g.tri), len(w), 2)
        out = g.area**2 * np.einsum("q,tq->t", w, np.sum(fv**2, axis=2))
        T._cache[key] = out
    return out


def edge_jumps(U: VelocityField, Q: PressureField) -> np.ndarray:
    """``|e| |[[Q n - grad(U) n]]|^2`` per edge of the triangulation (0 on the boundary)."""
    T = U.triangulation
    g = geometry(T)
    interior = g.edge_elems[:, 1] >= 0
    e1, e2 = g.edge_elems[interior, 0], g.edge_elems[interior, 1]
    d = g.xy[g.edges[interior, 1]] - g.xy[g.edges[interior, 0]]
    length = np.hypot(d[:, 0], d[:, 1])
    n = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
    q = Q.coeffs[ancestor_map(T, Q.partition)]
    G = U.gradients()
    jump = (q[e1] - q[e2])[:, None] * n - np.einsum("ecd,ed->ec", G[e1] - G[e2], n)
    out = np.zeros(len(g.edges))
    out[interior] = length * np.sum(jump**2, axis=1)
    return out


def estimate(
    T: Triangulation, U: VelocityField, Q: PressureField, f: BodyForce, quad_order: int = 4
) -> EstimatorReport:
    if U.triangulation != T:
        raise ContractError("velocity field does not live on the triangulation")
    if not is_refinement(T, Q.partition):
        raise ContractError("triangulation does not refine the pressure partition")
    g = geometry(T)
    ej = edge_jumps(U, Q)
    interior = g.edge_elems[:, 1] >= 0
    per_elem = np.bincount(g.edge_elems[interior].ravel(), np.repeat(ej[interior], 2), minlength=len(T))
    eta_sq = volume_terms(T, f, quad_order) + np.sqrt(g.area) * per_elem
    return EstimatorReport(
        triangulation=T,
        eta_sq=eta_sq,
        total_sq=float(eta_sq.sum()),
        div=div_norm(U),
        projected_div=l2_norm(l2_project_div(Q.partition, U)),
        partition=Q.partition,
    )


def estimate_subset(report: EstimatorReport, marked: Iterable[int]) -> float:
    """Estimator restricted to the given element ids."""
    ids = np.asarray(sorted(set(int(m) for m in marked)), dtype=np.int64)
    if len(ids) == 0:
        return 0.0
    pos = report.triangulation.index_of(ids)
    return float(np.sqrt(report.eta_sq[pos].sum()))


def doerfler_order(eta_sq: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Positions sorted by indicator descending, then by element id."""
    return np.lexsort((ids, -eta_sq))


def doerfler_mark_values(eta_sq: np.ndarray, theta: float, ids=None) -> np.ndarray:
    """Positions of a minimal set with ``sum >= theta * total``."""
    if not 0 < theta <= 1:
        raise ValueError("theta must lie in (0, 1]")
    eta_sq = np.asarray(eta_sq, dtype=float)
    ids = np.arange(len(eta_sq)) if ids is None else np.asarray(ids)
    total = eta_sq.sum()
    if total <= 0:
        return np.zeros(0, dtype=np.int64)
    order = doerfler_order(eta_sq, ids)
    csum = np.cumsum(eta_sq[order])
    if theta == 1.0:
        # cumsum round-off could otherwise fall short of the total
        k = int(np.count_nonzero(eta_sq > 0))
    else:
        k = int(np.searchsorted(csum, theta * total, side="left")) + 1
    return order[: min(k, len(order))]


def doerfler_mark(report: EstimatorReport, theta: float, c_mark: float = 1.0) -> list[int]:
    """Minimal-cardinality Dörfler set as a sorted list of element ids."""
    if c_mark < 1:
        raise ValueError("c_mark must be >= 1")
    ids = report.triangulation.leaves
    pos = doerfler_mark_values(report.eta_sq, theta, ids)
    return sorted(ids[pos].tolist())
