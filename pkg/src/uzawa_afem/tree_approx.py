"""Greedy tree approximation of the divergence of a velocity field.

Starting from a partition ``P`` the routine bisects, one element at a time,
the element with the largest modified error until the piecewise constant
projection onto the current partition captures a ``vartheta`` fraction of
``||div V||``. Only elements between ``P`` and the velocity triangulation are
ever touched, so no new forest elements are created.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .fem import VelocityField, geometry, l2_norm, l2_project_div
from .mesh import ContractError, Partition, is_refinement


class BinevError(RuntimeError):
    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


def subtree_moments(P: Partition, V: VelocityField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Moments ``sum |t| d_t`` and ``sum |t| d_t^2`` for every element between ``P`` and ``T``.

    Returns forest-indexed arrays ``(S1, S2, is_fine_leaf)``; entries of
    elements outside the band are zero.
    """
    T = V.triangulation
    if not is_refinement(T, P):
        raise ContractError("velocity triangulation does not refine the partition")
    forest = T.forest
    g = geometry(T)
    d = V.divergence()
    n = forest.n_elements
    S1, S2 = np.zeros(n), np.zeros(n)
    in_p = np.zeros(n, dtype=bool)
    in_p[P.leaves] = True
    parents = forest.parents
    cur = T.leaves.copy()
    w1, w2 = g.area * d, g.area * d * d
    while len(cur):
        np.add.at(S1, cur, w1)
        np.add.at(S2, cur, w2)
        keep = ~in_p[cur]
        cur, w1, w2 = parents[cur[keep]], w1[keep], w2[keep]
    fine = np.zeros(n, dtype=bool)
    fine[T.leaves] = True
    return S1, S2, fine


def _errors(S1, S2, fine, areas):
    e = S2 - np.divide(S1 * S1, areas, out=np.zeros_like(S1), where=areas > 0)
    e = np.maximum(e, 0.0)
    e[fine] = 0.0  # the divergence is constant on a velocity element
    return e


def local_best_error(elem: int, V: VelocityField) -> float:
    """Squared L2 distance of ``div V`` on ``elem`` to the constants.

    ``elem`` must be a union of elements of ``V``'s triangulation.
    """
    T = V.triangulation
    forest = T.forest
    gen = forest.generations
    parents = forest.parents
    cur = T.leaves.copy()
    top = gen[elem]
    while np.any(gen[cur] > top):
        cur = np.where(gen[cur] > top, parents[cur], cur)
    inside = np.flatnonzero(cur == elem)
    if len(inside) == 0:
        raise ContractError("the velocity triangulation does not refine the element")
    if len(inside) == 1 and T.leaves[inside[0]] == elem:
        return 0.0
    a = geometry(T).area[inside]
    d = V.divergence()[inside]
    s1, s2 = a @ d, a @ d**2
    return max(float(s2 - s1 * s1 / a.sum()), 0.0)


@dataclass
class GreedyState:
    """Working data of one greedy call (element ids are forest ids)."""

    leaves: set
    error: dict
    modified: dict
    heap: list = field(default_factory=list)
    total_error: float = 0.0
    bisections: int = 0

    def push(self, eid: int) -> None:
        heapq.heappush(self.heap, (-self.modified[eid], eid))

    def pop(self) -> tuple[int, float]:
        while self.heap:
            neg, eid = heapq.heappop(self.heap)
            if eid in self.leaves:
                return eid, -neg
        raise BinevError("heap exhausted", self)


@dataclass
class BinevResult:
    partition: Partition
    bisections: int
    div: float
    projected_div: float
    state: GreedyState


def binev(
    P: Partition,
    V: VelocityField,
    vartheta: float,
    trace: Optional[TextIO] = None,
    return_state: bool = False,
):
    """Coarsest greedy refinement ``P'`` of ``P`` with ``vartheta |div V| <= |Pi_P' div V|``."""
    if not 0 < vartheta <= 1:
        raise ValueError("vartheta must lie in (0, 1]")
    T = V.triangulation
    forest = T.forest
    S1, S2, fine = subtree_moments(P, V)
    areas = forest.areas()
    e_all = _errors(S1, S2, fine, areas)
    div_sq = float(geometry(T).area @ V.divergence() ** 2)
    budget = (1.0 - vartheta**2) * div_sq

    leaves = set(P.leaves.tolist())
    err = {t: float(e_all[t]) for t in leaves}
    state = GreedyState(leaves, err, dict(err))
    for t in sorted(leaves):
        state.push(t)
    state.total_error = math.fsum(err.values())
    if trace is not None:
        trace.write("step,elem_id,e,etilde,crit_lhs,crit_rhs\n")

    while state.total_error > budget:
        eid, mod = state.pop()
        if mod <= 0.0:
            raise BinevError(
                f"all modified errors vanish but {state.total_error!r} > {budget!r}", state
            )
        kids = forest.children(eid)
        if kids is None:
            raise BinevError(f"selected element {eid} has no children", state)
        state.leaves.remove(eid)
        for c in kids:
            ec = float(e_all[c])
            denom = ec + mod
            state.error[c] = ec
            state.modified[c] = 0.0 if denom == 0 else ec * mod / denom
            state.leaves.add(c)
            state.push(c)
        state.total_error += state.error[kids[0]] + state.error[kids[1]] - state.error[eid]
        state.bisections += 1
        if trace is not None:
            lhs = vartheta * math.sqrt(div_sq)
            rhs = math.sqrt(max(div_sq - state.total_error, 0.0))
            trace.write(f"{state.bisections},{eid},{state.error[eid]!r},{mod!r},{lhs!r},{rhs!r}\n")

    Pn = Partition(forest, state.leaves)
    proj = l2_norm(l2_project_div(Pn, V))
    div = math.sqrt(div_sq)
    if vartheta * div > proj * (1 + 1e-10) + 1e-14:
        raise BinevError("postcondition violated", state)
    result = BinevResult(Pn, state.bisections, div, proj, state)
    return result if return_state else Pn


# -- exhaustive comparison -----------------------------------------------------------


@dataclass
class AuditReport:
    greedy_added: int
    best_added: Optional[int]
    ratio: Optional[float]
    explored: int
    note: str = ""


def feasible_refinements(P: Partition, V: VelocityField, vartheta: float, max_bisections: int):
    """Smallest number of bisections of ``P`` meeting the ``vartheta`` criterion.

    Breadth-first over leaf sets; only elements strictly coarser than the
    velocity triangulation are bisected, since refining inside a velocity
    element never changes the projection. Returns ``(count or None, explored)``.
    """
    forest = V.triangulation.forest
    S1, S2, fine = subtree_moments(P, V)
    e_all = _errors(S1, S2, fine, forest.areas())
    div_sq = float(geometry(V.triangulation).area @ V.divergence() ** 2)
    budget = (1.0 - vartheta**2) * div_sq

    def ok(leaves):
        return math.fsum(e_all[t] for t in leaves) <= budget

    level = {frozenset(P.leaves.tolist())}
    explored = 1
    for k in range(max_bisections + 1):
        if any(ok(s) for s in level):
            return k, explored
        if k == max_bisections:
            break
        nxt = set()
        for s in level:
            for t in s:
                if fine[t]:
                    continue
                kids = forest.children(t)
                nxt.add((s - {t}) | set(kids))
        explored += len(nxt)
        level = nxt
    return None, explored


def quasi_optimality_audit(P, V, vartheta, vartheta_prime, max_bisections=10) -> AuditReport:
    if max_bisections > 10:
        raise ValueError("exhaustive search budget is limited to 10 bisections")
    if not vartheta < vartheta_prime < 1:
        raise ValueError("need vartheta < vartheta_prime < 1")
    Pg = binev(P, V, vartheta)
    added = len(Pg) - len(P)
    best, explored = feasible_refinements(P, V, vartheta_prime, max_bisections)
    if best is None:
        return AuditReport(added, None, None, explored, "no comparator")
    if best == 0:
        ratio = 1.0 if added == 0 else math.inf
    else:
        ratio = added / best
    return AuditReport(added, best, ratio, explored)


def ancestors_preserved(P_new: Partition, T) -> bool:
    """True when ``T`` still refines ``P_new`` (no element inside a velocity element was split)."""
    return is_refinement(T, P_new)


__all__ = [
    "BinevError",
    "GreedyState",
    "BinevResult",
    "AuditReport",
    "subtree_moments",
    "local_best_error",
    "binev",
    "feasible_refinements",
    "quasi_optimality_audit",
    "ancestors_preserved",
]
