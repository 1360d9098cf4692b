"""Plain-text mesh and field serialization (``nvb-mesh v1``).

Layout::

    nvb-mesh v1
    vertices <n>
    v <x> <y>                                   (one line per vertex)
    elements <m>
    e <v0> <v1> <v2> <refedge> <parent> <gen>   (one line per element)
    view <name> <conforming|partition> <count>
    <leaf ids, space separated>
    pfield <name> <view> <count>
    <coefficients>
    vfield <name> <view> <count>
    <x y> pairs for the free nodes

Coordinates are written with ``float.hex`` so reading is exact.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

import numpy as np

from .fem import PressureField, VelocityField
from .mesh import REFINEMENT_EDGE, MeshError, MeshForest, Partition, Triangulation

HEADER = "nvb-mesh v1"


def dumps(
    forest: MeshForest,
    views: Optional[dict] = None,
    pfields: Optional[dict] = None,
    vfields: Optional[dict] = None,
) -> str:
    views = dict(views or {})
    lines = [HEADER, f"vertices {forest.n_vertices}"]
    lines += [f"v {float(x).hex()} {float(y).hex()}" for x, y in forest.coords.tolist()]
    lines.append(f"elements {forest.n_elements}")
    for (a, b, c), p, g in zip(
        forest.elements.tolist(), forest.parents.tolist(), forest.generations.tolist()
    ):
        lines.append(f"e {a} {b} {c} {REFINEMENT_EDGE} {p} {g}")

    def view_name(P):
        for name, V in views.items():
            if V == P:
                return name
        name = f"_view{len(views)}"
        views[name] = P
        return name

    body = []
    for name, F in (pfields or {}).items():
        vn = view_name(F.partition)
        body.append(f"pfield {name} {vn} {len(F.coeffs)}")
        body.append(" ".join(float(c).hex() for c in F.coeffs))
    for name, U in (vfields or {}).items():
        vn = view_name(U.triangulation)
        body.append(f"vfield {name} {vn} {len(U.dofs)}")
        body.append(" ".join(f"{float(x).hex()} {float(y).hex()}" for x, y in U.dofs.tolist()))
    for name, P in views.items():
        _check_name(name)
        kind = "conforming" if P.conforming else "partition"
        lines.append(f"view {name} {kind} {len(P)}")
        lines.append(" ".join(str(t) for t in P.leaves.tolist()))
    return "\n".join(lines + body) + "\n"


def _check_name(name: str) -> None:
    if not name or any(ch.isspace() for ch in name):
        raise ValueError(f"invalid view or field name {name!r}")


def loads(text: str):
    """Inverse of :func:`dumps`; returns ``(forest, views, pfields, vfields)``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != HEADER:
        raise MeshError("missing 'nvb-mesh v1' header")
    pos = 1

    def expect(keyword):
        nonlocal pos
        parts = lines[pos].split()
        if parts[0] != keyword:
            raise MeshError(f"line {pos + 1}: expected {keyword!r}")
        pos += 1
        return parts[1:]

    nv = int(expect("vertices")[0])
    xy = np.empty((nv, 2))
    for k in range(nv):
        tag, x, y = lines[pos].split()
        if tag != "v":
            raise MeshError(f"line {pos + 1}: expected a vertex")
        xy[k] = (float.fromhex(x), float.fromhex(y))
        pos += 1
    ne = int(expect("elements")[0])
    rows = []
    for _ in range(ne):
        parts = lines[pos].split()
        if parts[0] != "e" or len(parts) != 7:
            raise MeshError(f"line {pos + 1}: expected an element")
        rows.append([int(v) for v in parts[1:]])
        pos += 1
    rows = np.asarray(rows, dtype=np.int64).reshape(-1, 6)
    if np.any(rows[:, 3] != REFINEMENT_EDGE):
        raise MeshError("unsupported refinement-edge designation")
    roots = np.flatnonzero(rows[:, 4] < 0)
    if not np.array_equal(roots, np.arange(len(roots))):
        raise MeshError("root elements must come first")
    n_init_v = int(rows[roots, :3].max()) + 1
    forest = MeshForest(xy[:n_init_v], rows[roots, :3], [REFINEMENT_EDGE] * len(roots))
    # replay bisections in creation order; ids then coincide
    for eid in range(len(roots), ne, 2):
        forest.bisect(int(rows[eid, 4]))
    if forest.n_elements != ne or not np.array_equal(forest.elements, rows[:, :3]):
        raise MeshError("element records are inconsistent with bisection replay")
    if not np.array_equal(forest.generations, rows[:, 5]) or forest.n_vertices != nv:
        raise MeshError("generation or vertex records are inconsistent")
    if not np.array_equal(forest.coords, xy):
        raise MeshError("vertex coordinates differ from the bisection midpoints")

    views, pfields, vfields = {}, {}, {}
    while pos < len(lines):
        parts = lines[pos].split()
        kind = parts[0]
        if kind == "view":
            name, flavour, count = parts[1], parts[2], int(parts[3])
            ids = [int(t) for t in lines[pos + 1].split()] if count else []
            if len(ids) != count:
                raise MeshError(f"view {name}: expected {count} ids")
            views[name] = (Triangulation(forest, ids, check=True) if flavour == "conforming"
                           else Partition(forest, ids))
            pos += 2 if count else 1
        elif kind in ("pfield", "vfield"):
            name, vn, count = parts[1], parts[2], int(parts[3])
            raw = [float.fromhex(t) for t in lines[pos + 1].split()] if count else []
            pos += 2 if count else 1
            if kind == "pfield":
                pfields[name] = (vn, np.asarray(raw))
            else:
                vfields[name] = (vn, np.asarray(raw).reshape(-1, 2))
        else:
            raise MeshError(f"line {pos + 1}: unknown block {kind!r}")
    pf = {k: PressureField(views[vn], c) for k, (vn, c) in pfields.items()}
    vf = {k: VelocityField(views[vn], c) for k, (vn, c) in vfields.items()}
    return forest, views, pf, vf


def save(path, forest, views=None, pfields=None, vfields=None) -> None:
    Path(path).write_text(dumps(forest, views, pfields, vfields))


def load(path):
    return loads(Path(path).read_text())
