"""Discrete spaces, assembly, projections and norms for P1 velocity / P0 pressure.

Velocity fields are continuous piecewise linear with zero trace; pressure
fields are piecewise constant on a (possibly non-conforming) partition.
Velocity degrees of freedom are ordered component-wise: all x values of the
free nodes, then all y values.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .mesh import ContractError, Partition, Triangulation, ancestor_map
from .quadrature import triangle_rule

VELOCITY_DEGREE = 1


@dataclass(frozen=True)
class BodyForce:
    """Volume force ``f(xy) -> (n, 2)`` with an optional manufactured solution."""

    f: Callable[[np.ndarray], np.ndarray]
    u_exact: Optional[Callable[[np.ndarray], np.ndarray]] = None
    p_exact: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "custom"

    def __call__(self, xy):
        return np.asarray(self.f(xy), dtype=float).reshape(-1, 2)


ZERO_FORCE = BodyForce(lambda xy: np.zeros((len(xy), 2)), name="zero")


@dataclass(eq=False)
class Geometry:
    """Node numbering and element geometry of a conforming triangulation."""

    nodes: np.ndarray  # forest vertex ids, sorted
    tri: np.ndarray  # (N, 3) local node indices
    xy: np.ndarray  # (nn, 2)
    area: np.ndarray  # (N,)
    grad: np.ndarray  # (N, 3, 2) gradients of barycentric coordinates
    free: np.ndarray  # local indices of interior nodes
    free_index: np.ndarray  # (nn,) position among free nodes or -1
    edges: np.ndarray  # (E, 2) local node pairs
    edge_elems: np.ndarray  # (E, 2) element positions, -1 on the boundary

    @property
    def n_free(self) -> int:
        return len(self.free)


def geometry(T: Triangulation) -> Geometry:
    g = T._cache.get("geometry")
    if g is not None:
        return g
    forest = T.forest
    ev = forest.elements[T.leaves]
    nodes, tri = np.unique(ev, return_inverse=True)
    tri = tri.reshape(-1, 3)
    xy = forest.coords[nodes]
    p = xy[tri]
    x, y = p[..., 0], p[..., 1]
    det = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    grad = np.empty((len(tri), 3, 2))
    grad[:, 0, 0] = y[:, 1] - y[:, 2]
    grad[:, 0, 1] = x[:, 2] - x[:, 1]
    grad[:, 1, 0] = y[:, 2] - y[:, 0]
    grad[:, 1, 1] = x[:, 0] - x[:, 2]
    grad[:, 2, 0] = y[:, 0] - y[:, 1]
    grad[:, 2, 1] = x[:, 1] - x[:, 0]
    grad /= det[:, None, None]

    loc = np.stack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]], axis=1).reshape(-1, 2)
    loc.sort(axis=1)
    edges, inv, counts = np.unique(loc, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    if np.any(counts > 2):
        raise ContractError("triangulation has an edge shared by more than two elements")
    owner = np.repeat(np.arange(len(tri)), 3)
    order = np.argsort(inv, kind="stable")
    edge_elems = np.full((len(edges), 2), -1, dtype=np.int64)
    first = np.searchsorted(inv[order], np.arange(len(edges)))
    edge_elems[:, 0] = owner[order[first]]
    second = first + 1
    has2 = counts == 2
    edge_elems[has2, 1] = owner[order[second[has2]]]

    boundary = np.zeros(len(nodes), dtype=bool)
    boundary[edges[~has2].ravel()] = True
    free = np.flatnonzero(~boundary)
    free_index = np.full(len(nodes), -1, dtype=np.int64)
    free_index[free] = np.arange(len(free))
    g = Geometry(nodes, tri, xy, 0.5 * det, grad, free, free_index, edges, edge_elems)
    T._cache["geometry"] = g
    return g


# -- fields ---------------------------------------------------------------------------


@dataclass(eq=False)
class VelocityField:
    """Continuous P1 vector field; only interior node values are stored."""

    triangulation: Triangulation
    dofs: np.ndarray  # (n_free, 2)
    degree: int = VELOCITY_DEGREE

    def __post_init__(self):
        g = geometry(self.triangulation)
        self.dofs = np.asarray(self.dofs, dtype=float).reshape(g.n_free, 2)

    @classmethod
    def zero(cls, T: Triangulation) -> "VelocityField":
        return cls(T, np.zeros((geometry(T).n_free, 2)))

    @classmethod
    def from_vector(cls, T: Triangulation, vec) -> "VelocityField":
        n = geometry(T).n_free
        vec = np.asarray(vec, dtype=float)
        return cls(T, np.column_stack([vec[:n], vec[n:]]))

    @classmethod
    def interpolate(cls, T: Triangulation, func) -> "VelocityField":
        g = geometry(T)
        vals = np.asarray(func(g.xy[g.free]), dtype=float).reshape(-1, 2)
        return cls(T, vals)

    @property
    def vector(self) -> np.ndarray:
        return self.dofs.T.ravel()

    @property
    def nodal(self) -> np.ndarray:
        g = geometry(self.triangulation)
        out = np.zeros((len(g.nodes), 2))
        out[g.free] = self.dofs
        return out

    def gradients(self) -> np.ndarray:
        """Elementwise gradient ``G[t, c, d] = d V_c / d x_d``."""
        g = geometry(self.triangulation)
        vals = self.nodal[g.tri]  # (N, 3, 2)
        return np.einsum("tkc,tkd->tcd", vals, g.grad)

    def divergence(self) -> np.ndarray:
        G = self.gradients()
        return G[:, 0, 0] + G[:, 1, 1]

    def __add__(self, other):
        _same_mesh(self, other)
        return VelocityField(self.triangulation, self.dofs + other.dofs)

    def __sub__(self, other):
        _same_mesh(self, other)
        return VelocityField(self.triangulation, self.dofs - other.dofs)

    def __mul__(self, s):
        return VelocityField(self.triangulation, self.dofs * float(s))

    __rmul__ = __mul__


def _same_mesh(a, b):
    if a.triangulation != b.triangulation:
        raise ContractError("velocity fields live on different triangulations")


@dataclass(eq=False)
class PressureField:
    """Piecewise constant pressure on a partition, one coefficient per leaf."""

    partition: Partition
    coeffs: np.ndarray
    degree: int = VELOCITY_DEGREE - 1

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(len(self.partition))

    @classmethod
    def zero(cls, P: Partition) -> "PressureField":
        return cls(P, np.zeros(len(P)))

    def integral(self) -> float:
        return float(self.partition.areas @ self.coeffs)

    def mean(self) -> float:
        return self.integral() / float(self.partition.areas.sum())

    def zero_mean(self) -> "PressureField":
        return PressureField(self.partition, self.coeffs - self.mean())

    def on(self, P: Partition) -> "PressureField":
        """The same function represented on a refinement ``P``."""
        if P == self.partition:
            return self
        return PressureField(P, self.coeffs[ancestor_map(P, self.partition)])

    def __add__(self, other):
        _same_partition(self, other)
        return PressureField(self.partition, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_partition(self, other)
        return PressureField(self.partition, self.coeffs - other.coeffs)

    def __neg__(self):
        return PressureField(self.partition, -self.coeffs)

    def __mul__(self, s):
        return PressureField(self.partition, self.coeffs * float(s))

    __rmul__ = __mul__


def _same_partition(a, b):
    if a.partition != b.partition:
        raise ContractError("pressure fields live on different partitions")


def pressure_from_function(P: Partition, func, quad_order: int = 4) -> PressureField:
    """Elementwise L2 projection of a scalar function onto P0 on ``P``."""
    forest = P.forest
    p = forest.coords[forest.elements[P.leaves]]
    bary, w = triangle_rule(quad_order)
    pts = np.einsum("qk,tkd->tqd", bary, p)
    vals = np.asarray(func(pts.reshape(-1, 2)), dtype=float).reshape(len(P), len(w))
    return PressureField(P, vals @ w)


# -- assembly ----------------------------------------------------------------------


def assemble_stiffness(T: Triangulation) -> sp.csr_matrix:
    """Scalar P1 stiffness matrix restricted to interior nodes.

    The vector Laplacian is block diagonal with two copies of this matrix.
    """
    K = T._cache.get("stiffness")
    if K is not None:
        return K
    g = geometry(T)
    local = np.einsum("tid,tjd->tij", g.grad, g.grad) * g.area[:, None, None]
    rows = np.repeat(g.tri, 3, axis=1).ravel()
    cols = np.tile(g.tri, (1, 3)).ravel()
    nn = len(g.nodes)
    full = sp.csr_matrix((local.ravel(), (rows, cols)), shape=(nn, nn))
    K = full[g.free][:, g.free].tocsr()
    K.sum_duplicates()
    T._cache["stiffness"] = K
    return K


def assemble_vector_stiffness(T: Triangulation) -> sp.csr_matrix:
    K = T._cache.get("vstiffness")
    if K is None:
        K = sp.block_diag((assemble_stiffness(T), assemble_stiffness(T)), format="csr")
        T._cache["vstiffness"] = K
    return K


def assemble_divergence(T: Triangulation, P: Partition) -> sp.csr_matrix:
    """Matrix of ``b(V, Q) = -(div V, Q)``: ``(B @ V.vector) @ Q.coeffs``."""
    key = ("divergence", P.leaves.tobytes())
    B = T._cache.get(key)
    if B is not None:
        return B
    g = geometry(T)
    owner = ancestor_map(T, P)
    fi = g.free_index[g.tri]  # (N, 3)
    rows, cols, vals = [], [], []
    nf = g.n_free
    for c in range(2):
        for k in range(3):
            ok = fi[:, k] >= 0
            rows.append(owner[ok])
            cols.append(fi[ok, k] + c * nf)
            vals.append(-g.area[ok] * g.grad[ok, k, c])
    B = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(P), 2 * nf),
    )
    T._cache[key] = B
    return B


def load_vector(T: Triangulation, f: BodyForce, quad_order: int = 4) -> np.ndarray:
    """``<f, phi>`` for every free basis function, shape ``(n_free, 2)``."""
    if quad_order < 1:
        raise ValueError("quad_order must be >= 1")
    key = ("load", id(f), quad_order)
    cached = T._cache.get(key)
    if cached is not None:
        return cached
    g = geometry(T)
    bary, w = triangle_rule(quad_order)
    pts = np.einsum("qk,tkd->tqd", bary, g.xy[g.tri])
    fv = f(pts.reshape(-1, 2)).reshape(len(g.tri), len(w), 2)
    # local[t, k, c] = |T| sum_q w_q bary_qk f_c(x_q)
    local = np.einsum("q,qk,tqc->tkc", w, bary, fv) * g.area[:, None, None]
    out = np.zeros((len(g.nodes), 2))
    for c in range(2):
        out[:, c] = np.bincount(g.tri.ravel(), local[:, :, c].ravel(), minlength=len(g.nodes))
    out = out[g.free]
    T._cache[key] = out
    return out


def l2_project_div(P: Partition, V: VelocityField) -> PressureField:
    """Elementwise mean of ``div V`` over the leaves of ``P``."""
    T = V.triangulation
    owner = ancestor_map(T, P)
    g = geometry(T)
    integ = np.bincount(owner, g.area * V.divergence(), minlength=len(P))
    Q = PressureField(P, integ / P.areas)
    scale = np.sqrt(P.areas @ Q.coeffs**2)
    if abs(Q.mean()) > 1e-13 * max(scale, 1e-300):
        Q = Q.zero_mean()
    return Q


# -- norms -----------------------------------------------------------------------------


def energy_norm(V: VelocityField) -> float:
    G = V.gradients()
    return float(np.sqrt(geometry(V.triangulation).area @ np.sum(G**2, axis=(1, 2))))


def div_norm(V: VelocityField) -> float:
    return float(np.sqrt(geometry(V.triangulation).area @ V.divergence() ** 2))


def l2_norm(Q: PressureField) -> float:
    return float(np.sqrt(Q.partition.areas @ Q.coeffs**2))


def norms(field) -> dict:
    """Norms of a velocity field (energy, div) or a pressure field (l2)."""
    if isinstance(field, VelocityField):
        return {"energy": energy_norm(field), "div": div_norm(field)}
    if isinstance(field, PressureField):
        return {"l2": l2_norm(field)}
    raise TypeError(f"unsupported field type {type(field).__name__}")


def prolongate(V: VelocityField, T_fine: Triangulation) -> VelocityField:
    """Represent a P1 field exactly on a conforming refinement."""
    Tc = V.triangulation
    if T_fine == Tc:
        return V
    forest = Tc.forest
    gc, gf = geometry(Tc), geometry(T_fine)
    vals = np.zeros((forest.n_vertices, 2))
    known = np.zeros(forest.n_vertices, dtype=bool)
    vals[gc.nodes] = V.nodal
    known[gc.nodes] = True
    # boundary vertices of the fine mesh stay zero; new vertices are edge midpoints
    need = gf.nodes[gf.free]
    vpar = forest.vertex_parents
    for v in np.sort(need).tolist():
        _fill(v, vals, known, vpar)
    return VelocityField(T_fine, vals[need])


def _fill(v, vals, known, vpar):
    stack = [v]
    while stack:
        u = stack[-1]
        if known[u]:
            stack.pop()
            continue
        a, b = vpar[u]
        if a < 0:
            known[u] = True  # an initial vertex outside the coarse mesh cannot occur
            stack.pop()
            continue
        if known[a] and known[b]:
            vals[u] = 0.5 * (vals[a] + vals[b])
            known[u] = True
            stack.pop()
        else:
            stack.extend(x for x in (a, b) if not known[x])
