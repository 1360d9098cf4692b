"""Newest vertex bisection on a single binary forest.

Every partition or triangulation used by the solver is a leaf-set view of one
:class:`MeshForest`.  Elements are stored as ``(a, b, c)`` in counter-clockwise
order with ``c`` the newest vertex, so the refinement edge is always ``(a, b)``.
Bisecting creates the midpoint ``m`` of ``(a, b)`` and the children
``(c, a, m)`` and ``(b, c, m)``.

Elements and vertices are never deleted and their ids are never reused.
"""
from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np


class MeshError(ValueError):
    """Invalid mesh input."""


class ContractError(ValueError):
    """A precondition on a partition or marked set was violated."""


REFINEMENT_EDGE = 2  # local index of the edge opposite the newest vertex


class MeshForest:
    """Binary NVB forest over an initial conforming triangulation."""

    def __init__(self, vertices, elements, refinement_edges=None):
        vertices = np.asarray(vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshError("vertices must have shape (n, 2)")
        self._xy = np.empty((max(16, 2 * len(vertices)), 2))
        self._xy[: len(vertices)] = vertices
        self._nv = len(vertices)
        self._vparent = np.full((len(self._xy), 2), -1, dtype=np.int64)

        cap = max(16, 4 * len(elements))
        self._ev = np.empty((cap, 3), dtype=np.int64)
        self._par = np.full(cap, -1, dtype=np.int64)
        self._ch = np.full((cap, 2), -1, dtype=np.int64)
        self._gen = np.zeros(cap, dtype=np.int64)
        self._root = np.zeros(cap, dtype=np.int64)
        self._ne = 0
        self._midpoint: dict[tuple[int, int], int] = {}

        roots = _orient_roots(vertices, elements, refinement_edges)
        for tri in roots:
            self._add_element(tri, parent=-1, gen=0)
        self.roots = tuple(range(len(roots)))
        _check_conforming_input(vertices, roots)

    # -- storage -----------------------------------------------------------

    @property
    def n_elements(self) -> int:
        return self._ne

    @property
    def n_vertices(self) -> int:
        return self._nv

    @property
    def coords(self) -> np.ndarray:
        return self._xy[: self._nv]

    @property
    def elements(self) -> np.ndarray:
        return self._ev[: self._ne]

    @property
    def parents(self) -> np.ndarray:
        return self._par[: self._ne]

    @property
    def children_array(self) -> np.ndarray:
        return self._ch[: self._ne]

    @property
    def generations(self) -> np.ndarray:
        return self._gen[: self._ne]

    @property
    def root_of(self) -> np.ndarray:
        return self._root[: self._ne]

    @property
    def vertex_parents(self) -> np.ndarray:
        """Parent edge ``(a, b)`` of every vertex; ``(-1, -1)`` for initial vertices."""
        return self._vparent[: self._nv]

    def _add_element(self, tri, parent, gen):
        if self._ne == len(self._ev):
            grow = len(self._ev)
            self._ev = np.concatenate([self._ev, np.empty((grow, 3), dtype=np.int64)])
            self._par = np.concatenate([self._par, np.full(grow, -1, dtype=np.int64)])
            self._ch = np.concatenate([self._ch, np.full((grow, 2), -1, dtype=np.int64)])
            self._gen = np.concatenate([self._gen, np.zeros(grow, dtype=np.int64)])
            self._root = np.concatenate([self._root, np.zeros(grow, dtype=np.int64)])
        eid = self._ne
        self._ev[eid] = tri
        self._par[eid] = parent
        self._gen[eid] = gen
        self._root[eid] = eid if parent < 0 else self._root[parent]
        self._ne += 1
        return eid

    def _add_vertex(self, a, b):
        if self._nv == len(self._xy):
            grow = len(self._xy)
            self._xy = np.concatenate([self._xy, np.empty((grow, 2))])
            self._vparent = np.concatenate(
                [self._vparent, np.full((grow, 2), -1, dtype=np.int64)]
            )
        vid = self._nv
        # midpoints of dyadic points are exact in binary floating point
        self._xy[vid] = 0.5 * (self._xy[a] + self._xy[b])
        self._vparent[vid] = (a, b)
        self._nv += 1
        return vid

    def midpoint(self, a: int, b: int) -> int | None:
        """Vertex id of the midpoint of edge ``(a, b)`` if it exists."""
        return self._midpoint.get((a, b) if a < b else (b, a))

    def bisect(self, eid: int) -> tuple[int, int]:
        """Children of ``eid``, creating them if absent."""
        c1, c2 = self._ch[eid]
        if c1 >= 0:
            return int(c1), int(c2)
        a, b, c = (int(v) for v in self._ev[eid])
        key = (a, b) if a < b else (b, a)
        m = self._midpoint.get(key)
        if m is None:
            m = self._add_vertex(*key)
            self._midpoint[key] = m
        gen = int(self._gen[eid]) + 1
        c1 = self._add_element((c, a, m), eid, gen)
        c2 = self._add_element((b, c, m), eid, gen)
        self._ch[eid] = (c1, c2)
        return c1, c2

    def children(self, eid: int) -> tuple[int, int] | None:
        c1, c2 = self._ch[eid]
        return None if c1 < 0 else (int(c1), int(c2))

    def areas(self, ids=None) -> np.ndarray:
        ev = self.elements if ids is None else self._ev[np.asarray(ids, dtype=np.int64)]
        p = self._xy[ev]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def ancestors(self, eid: int) -> list[int]:
        out = []
        p = int(self._par[eid])
        while p >= 0:
            out.append(p)
            p = int(self._par[p])
        return out

    def initial(self) -> "Triangulation":
        return Triangulation(self, self.roots)


# -- leaf-set views -------------------------------------------------------------


class Partition:
    """Immutable leaf-set view of a forest (possibly with hanging nodes)."""

    conforming = False

    def __init__(self, forest: MeshForest, leaves: Iterable[int]):
        self.forest = forest
        ids = np.unique(np.fromiter(leaves, dtype=np.int64))
        ids.setflags(write=False)
        self.leaves = ids
        self._cache: dict = {}

    def __len__(self) -> int:
        return len(self.leaves)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(#={len(self)})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.forest is other.forest and np.array_equal(self.leaves, other.leaves)

    def __hash__(self) -> int:
        return hash((id(self.forest), self.leaves.tobytes()))

    @property
    def leaf_set(self) -> frozenset:
        if "leaf_set" not in self._cache:
            self._cache["leaf_set"] = frozenset(self.leaves.tolist())
        return self._cache["leaf_set"]

    def index_of(self, ids) -> np.ndarray:
        """Positions of element ids inside ``self.leaves``; raises on foreign ids."""
        ids = np.asarray(ids, dtype=np.int64)
        pos = np.searchsorted(self.leaves, ids)
        pos_c = np.minimum(pos, len(self.leaves) - 1)
        if len(ids) and not np.all(self.leaves[pos_c] == ids):
            bad = ids[self.leaves[pos_c] != ids]
            raise ContractError(f"elements {bad[:5].tolist()} are not leaves of this view")
        return pos_c

    @property
    def areas(self) -> np.ndarray:
        if "areas" not in self._cache:
            self._cache["areas"] = self.forest.areas(self.leaves)
        return self._cache["areas"]

    def as_partition(self) -> "Partition":
        return Partition(self.forest, self.leaves)


class Triangulation(Partition):
    """Conforming leaf-set view."""

    conforming = True

    def __init__(self, forest: MeshForest, leaves: Iterable[int], check: bool = False):
        super().__init__(forest, leaves)
        if check and hanging_nodes(forest, self.leaves):
            raise ContractError("leaf set is not conforming")


def as_triangulation(P: Partition) -> Triangulation:
    """Reinterpret ``P`` as conforming after checking it has no hanging nodes."""
    if isinstance(P, Triangulation):
        return P
    return Triangulation(P.forest, P.leaves, check=True)


# -- basic queries ----------------------------------------------------------------


def _edges_of(ev_row):
    a, b, c = ev_row
    return ((a, b), (b, c), (c, a))


def hanging_nodes(forest: MeshForest, leaves) -> list[tuple[int, int]]:
    """``(leaf, vertex)`` pairs where ``vertex`` lies inside an edge of ``leaf``."""
    leaves = np.asarray(leaves, dtype=np.int64)
    used = np.zeros(forest.n_vertices, dtype=bool)
    used[forest.elements[leaves].ravel()] = True
    out = []
    mid = forest._midpoint
    for t, row in zip(leaves.tolist(), forest.elements[leaves].tolist()):
        for a, b in _edges_of(row):
            m = mid.get((a, b) if a < b else (b, a))
            if m is not None and used[m]:
                out.append((t, m))
    return out


def is_conforming(P: Partition) -> bool:
    return not hanging_nodes(P.forest, P.leaves)


def ancestor_map(fine: Partition, coarse: Partition) -> np.ndarray:
    """For every leaf of ``fine`` the position of its ancestor leaf in ``coarse``."""
    if fine.forest is not coarse.forest:
        raise ContractError("views belong to different forests")
    key = ("ancestor_map", id(coarse), coarse.leaves.tobytes())
    cached = fine._cache.get(key)
    if cached is not None:
        return cached
    forest = fine.forest
    in_coarse = np.zeros(forest.n_elements, dtype=bool)
    in_coarse[coarse.leaves] = True
    par = forest.parents
    cur = fine.leaves.copy()
    while True:
        todo = ~in_coarse[cur]
        if not todo.any():
            break
        up = par[cur[todo]]
        if np.any(up < 0):
            raise ContractError("view is not a refinement of the given partition")
        cur[todo] = up
    pos = np.searchsorted(coarse.leaves, cur)
    fine._cache[key] = pos
    return pos


def is_refinement(fine: Partition, coarse: Partition) -> bool:
    """Whether ``fine`` lies in the set of NVB refinements of ``coarse``."""
    try:
        ancestor_map(fine, coarse)
    except ContractError:
        return False
    return True


def min_angles(forest: MeshForest, ids) -> np.ndarray:
    p = forest.coords[forest.elements[np.asarray(ids, dtype=np.int64)]]
    out = np.full(len(p), np.pi)
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cos = np.einsum("ij,ij->i", u, v) / np.linalg.norm(u, axis=1) / np.linalg.norm(v, axis=1)
        out = np.minimum(out, np.arccos(np.clip(cos, -1.0, 1.0)))
    return out


def similarity_key(forest: MeshForest, eid: int, digits: int = 9) -> tuple:
    """Sorted normalised side lengths, a key for the similarity class of an element."""
    p = forest.coords[forest.elements[eid]]
    sides = sorted(np.linalg.norm(p[[1, 2, 0]] - p, axis=1))
    return tuple(round(s / sides[-1], digits) for s in sides)


# -- refinement -------------------------------------------------------------------


def bisect_partition(P: Partition, marked: Iterable[int]) -> Partition:
    """One bisection of every marked leaf, without closure."""
    marked = np.unique(np.fromiter(marked, dtype=np.int64))
    if len(marked) == 0:
        return P
    forest = P.forest
    keep = np.delete(P.leaves, P.index_of(marked))
    new = [c for t in marked.tolist() for c in forest.bisect(t)]
    return Partition(forest, np.concatenate([keep, np.asarray(new, dtype=np.int64)]))


def close(P: Partition) -> Triangulation:
    """Coarsest conforming refinement of ``P``.

    Worklist fixpoint: a leaf carrying a hanging node on any of its edges is
    bisected in every conforming refinement of ``P``, so bisecting exactly those
    leaves until none is left yields the coarsest one. Setup is vectorized;
    only leaves touched by the closure are visited in Python.
    """
    if isinstance(P, Triangulation):
        return P
    forest = P.forest
    L = P.leaves
    ev0 = forest.elements[L]
    nv0 = forest.n_vertices
    count = np.bincount(ev0.ravel(), minlength=nv0)
    extra_count: dict[int, int] = defaultdict(int)  # vertices created during closure

    def cnt(v):
        return int(count[v]) if v < nv0 else extra_count[v]

    def bump(v, d):
        if v < nv0:
            count[v] += d
        else:
            extra_count[v] += d

    # initial edges, sorted by key, for neighbour lookups
    lo = np.minimum(ev0, np.roll(ev0, -1, axis=1)).ravel()
    hi = np.maximum(ev0, np.roll(ev0, -1, axis=1)).ravel()
    big = np.int64(max(nv0, 1))
    keys = lo * big + hi
    order = np.argsort(keys, kind="stable")
    skeys = keys[order]
    sowner = np.repeat(L, 3)[order]
    added_edges: dict[tuple[int, int], set] = defaultdict(set)

    leaves = set(L.tolist())

    def edge_neighbours(a, b):
        out = set(added_edges.get((a, b), ()))
        if a < nv0 and b < nv0:
            k = np.int64(a) * big + b
            i0, i1 = np.searchsorted(skeys, [k, k + 1])
            out.update(sowner[i0:i1].tolist())
        return [t for t in out if t in leaves]

    # leaves owning the parent edge of a used vertex carry a hanging node
    vpar = forest.vertex_parents[:nv0]
    used = np.flatnonzero((count > 0) & (vpar[:, 0] >= 0))
    pk = np.minimum(vpar[used, 0], vpar[used, 1]) * big + np.maximum(vpar[used, 0], vpar[used, 1])
    pk = np.sort(pk)
    pos = np.minimum(np.searchsorted(pk, keys), max(len(pk) - 1, 0))
    hit = pk[pos] == keys if len(pk) else np.zeros(len(keys), dtype=bool)
    stack = sorted(set(np.repeat(L, 3)[hit].tolist()), reverse=True)

    mid = forest._midpoint

    def has_hanging(t):
        for a, b in _edges_of(forest._ev[t].tolist()):
            m = mid.get((a, b) if a < b else (b, a))
            if m is not None and cnt(m) > 0:
                return True
        return False

    def add(t):
        row = forest._ev[t].tolist()
        for v in row:
            bump(v, 1)
        for a, b in _edges_of(row):
            added_edges[(a, b) if a < b else (b, a)].add(t)

    while stack:
        t = stack.pop()
        if t not in leaves or not has_hanging(t):
            continue
        c1, c2 = forest.bisect(t)
        leaves.discard(t)
        for v in forest._ev[t].tolist():
            bump(v, -1)
        m = int(forest._ev[c1, 2])
        fresh = cnt(m) == 0
        for c in (c1, c2):
            leaves.add(c)
            add(c)
        if fresh:
            a, b = forest._vparent[m].tolist()
            stack.extend(edge_neighbours(a, b))
        stack.extend((c1, c2))
    return Triangulation(forest, leaves)


def refine_conforming(T: Triangulation, marked: Iterable[int]) -> Triangulation:
    """``close(bisect(T, M))``."""
    marked = list(marked)
    if not marked:
        return T
    return close(bisect_partition(T, marked))


def uniform_refine(T: Triangulation, times: int = 1) -> Triangulation:
    for _ in range(times):
        T = refine_conforming(T, T.leaves)
    return T


def _subtree_closure(forest: MeshForest, leaves) -> set:
    seen: set = set()
    par = forest.parents
    for t in np.asarray(leaves).tolist():
        while t >= 0 and t not in seen:
            seen.add(t)
            t = int(par[t])
    return seen


def overlay(P: Partition, Q: Partition) -> Partition:
    """Coarsest common refinement of two views of the same forest."""
    if P.forest is not Q.forest:
        raise ContractError("overlay of views from different forests")
    forest = P.forest
    nodes = _subtree_closure(forest, P.leaves) | _subtree_closure(forest, Q.leaves)
    ch = forest.children_array
    leaves = [t for t in nodes if ch[t, 0] < 0 or ch[t, 0] not in nodes]
    if P.conforming and Q.conforming:
        return Triangulation(forest, leaves)
    return Partition(forest, leaves)


def descendants_in(T: Partition, eid: int) -> np.ndarray:
    """Leaves of ``T`` contained in the forest element ``eid``."""
    forest = T.forest
    par = forest.parents
    out = []
    for t in T.leaves.tolist():
        s = t
        while s >= 0 and s != eid:
            s = int(par[s])
        if s == eid:
            out.append(t)
    return np.asarray(out, dtype=np.int64)


def sons_count(T: Triangulation, T_new: Triangulation) -> np.ndarray:
    """Number of leaves of ``T_new`` inside each leaf of ``T``."""
    pos = ancestor_map(T_new, T)
    return np.bincount(pos, minlength=len(T))


def audit_closure_estimate(history: Sequence[tuple[Triangulation, Iterable[int]]]) -> float:
    """Measured closure constant ``max_J (#T_J - #T_init) / sum_{j<J} #M_j``.

    ``history`` holds the pairs ``(T_j, M_j)`` with ``T_{j+1} = refine(T_j, M_j)``;
    the mesh after the last marking is recomputed.  ``0/0`` counts as 0.
    """
    if not history:
        raise ValueError("empty refinement history")
    n_init = len(history[0][0].forest.roots)
    sizes = [len(T) for T, _ in history[1:]]
    last_T, last_M = history[-1]
    sizes.append(len(refine_conforming(last_T, last_M)))
    marked = np.cumsum([len(list(M)) for _, M in history])
    worst = 0.0
    for nT, nM in zip(sizes, marked):
        if nM == 0:
            if nT != n_init:
                return float("inf")
            continue
        worst = max(worst, (nT - n_init) / nM)
    return worst


# -- initial meshes -------------------------------------------------------------------


def _orient_roots(vertices, elements, refinement_edges):
    roots = []
    for k, el in enumerate(elements):
        el = [int(v) for v in el]
        if len(el) != 3:
            raise MeshError(f"element {k} does not have 3 vertices")
        if len(set(el)) != 3:
            raise MeshError(f"element {k} has duplicate vertex ids {el}")
        if min(el) < 0 or max(el) >= len(vertices):
            raise MeshError(f"element {k} references unknown vertices {el}")
        p = vertices[el]
        det = (p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[1, 1] - p[0, 1]) * (p[2, 0] - p[0, 0])
        if abs(det) <= 1e-14 * max(1.0, float(np.abs(p).max()) ** 2):
            raise MeshError(f"element {k} is degenerate")
        if det < 0:
            el = [el[0], el[2], el[1]]
        if refinement_edges is None:
            # opposite vertex of the longest edge; ties by smallest vertex id
            q = vertices[el]
            lens = [np.sum((q[(i + 1) % 3] - q[(i + 2) % 3]) ** 2) for i in range(3)]
            longest = max(lens)
            cands = [i for i in range(3) if lens[i] >= longest * (1 - 1e-12)]
            opp = min(cands, key=lambda i: el[i])
        else:
            opp = int(refinement_edges[k])
            if det < 0:
                opp = {0: 0, 1: 2, 2: 1}[opp]
        # rotate so the opposite vertex sits at position 2
        shift = (opp + 1) % 3
        el = el[shift:] + el[:shift]
        roots.append(tuple(el))
    return roots


def _check_conforming_input(vertices, roots):
    edge_count: dict = defaultdict(list)
    for k, tri in enumerate(roots):
        for a, b in _edges_of(tri):
            edge_count[(a, b) if a < b else (b, a)].append(k)
    for (a, b), owners in edge_count.items():
        if len(owners) > 2:
            raise MeshError(f"edge ({a}, {b}) is shared by elements {owners}")
    used = sorted({v for tri in roots for v in tri})
    for (a, b), owners in edge_count.items():
        pa, pb = vertices[a], vertices[b]
        d = pb - pa
        L2 = float(d @ d)
        for v in used:
            if v in (a, b):
                continue
            w = vertices[v] - pa
            t = float(w @ d) / L2
            cross = d[0] * w[1] - d[1] * w[0]
            if 0 < t < 1 and abs(cross) <= 1e-12 * L2:
                raise MeshError(f"vertex {v} hangs on an edge of element {owners[0]}")


def initial_mesh(domain="unit_square", vertices=None, elements=None, refinement_edges=None):
    """Forest and initial triangulation for a named or custom domain."""
    if domain == "unit_square":
        vertices = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
        elements = [(0, 1, 2), (0, 2, 3)]
    elif domain == "l_shape":
        vertices = [
            (-1.0, -1.0), (0.0, -1.0), (-1.0, 0.0), (0.0, 0.0),
            (1.0, 0.0), (-1.0, 1.0), (0.0, 1.0), (1.0, 1.0),
        ]
        # three unit squares, each split along a diagonal through the corner
        elements = [(0, 1, 3), (0, 3, 2), (2, 3, 5), (3, 6, 5), (3, 4, 7), (3, 7, 6)]
    elif domain == "custom":
        if vertices is None or elements is None:
            raise MeshError("custom domain needs vertices and elements")
    else:
        raise MeshError(f"unknown domain {domain!r}")
    forest = MeshForest(vertices, elements, refinement_edges)
    return forest, forest.initial()


def domain_area(forest: MeshForest) -> float:
    return float(forest.areas(forest.roots).sum())
