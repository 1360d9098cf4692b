"""Library of test problems: a domain name plus a body force."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _corner_solution as corner
from .fem import ZERO_FORCE, BodyForce


def _smooth_velocity(xy):
    x, y = xy[:, 0], xy[:, 1]
    u1 = 2 * x**2 * y * (x - 1) ** 2 * (y - 1) * (2 * y - 1)
    u2 = -2 * x * y**2 * (x - 1) * (2 * x - 1) * (y - 1) ** 2
    return np.column_stack([u1, u2])


def _smooth_pressure(xy):
    return xy[:, 0] ** 3 + xy[:, 1] ** 3 - 0.5


def _smooth_force(xy):
    # -Laplace(u) + grad(p) for the stream function x^2 (1-x)^2 y^2 (1-y)^2
    x, y = xy[:, 0], xy[:, 1]
    f1 = (
        -24 * x**4 * y + 12 * x**4 + 48 * x**3 * y - 24 * x**3 - 48 * x**2 * y**3
        + 72 * x**2 * y**2 - 48 * x**2 * y + 15 * x**2 + 48 * x * y**3 - 72 * x * y**2
        + 24 * x * y - 8 * y**3 + 12 * y**2 - 4 * y
    )
    f2 = (
        48 * x**3 * y**2 - 48 * x**3 * y + 8 * x**3 - 72 * x**2 * y**2 + 72 * x**2 * y
        - 12 * x**2 + 24 * x * y**4 - 48 * x * y**3 + 48 * x * y**2 - 24 * x * y
        + 4 * x - 12 * y**4 + 24 * y**3 - 9 * y**2
    )
    return np.column_stack([f1, f2])


def _ones(xy):
    return np.ones((len(xy), 2))


def _rotation(xy):
    return np.column_stack([-xy[:, 1], xy[:, 0]])


def _polar(xy):
    x, y = xy[:, 0], xy[:, 1]
    r = np.hypot(x, y)
    phi = np.mod(np.arctan2(y, x), 2 * np.pi)
    return x, y, r, phi


def _corner_field(xy, inner, annulus, width):
    """Piecewise evaluation: singular part near the corner, cut-off in the annulus, zero outside."""
    x, y, r, phi = _polar(np.asarray(xy, float))
    out = np.zeros((len(x), width))
    near = (r > 0) & (r <= corner.R0)
    mid = (r > corner.R0) & (r < corner.R1)
    if inner is not None and near.any():
        out[near] = np.column_stack(np.broadcast_arrays(*inner(x[near], y[near], r[near], phi[near])))
    if mid.any():
        out[mid] = np.column_stack(np.broadcast_arrays(*annulus(x[mid], y[mid], r[mid], phi[mid])))
    return out


def _corner_velocity(xy):
    return _corner_field(xy, corner._inner_velocity, corner._annulus_velocity, 2)


def _corner_pressure(xy):
    # singular at the corner itself; the value there is irrelevant for quadrature
    return _corner_field(xy, corner._inner_pressure, corner._annulus_pressure, 1)[:, 0]


def _corner_force(xy):
    return _corner_field(xy, None, corner._annulus_force, 2)


SMOOTH_FORCE = BodyForce(_smooth_force, _smooth_velocity, _smooth_pressure, name="smooth")
CONSTANT_FORCE = BodyForce(_ones, name="constant")
ROTATION_FORCE = BodyForce(_rotation, name="rotation")
CORNER_FORCE = BodyForce(_corner_force, _corner_velocity, _corner_pressure, name="corner")


@dataclass(frozen=True)
class Problem:
    name: str
    domain: str
    force: BodyForce


PROBLEMS = {
    "zero": Problem("zero", "unit_square", ZERO_FORCE),
    "smooth": Problem("smooth", "unit_square", SMOOTH_FORCE),
    # (1, 1) is a gradient: velocity vanishes and the pressure is x + y
    "lshape_constant": Problem("lshape_constant", "l_shape", CONSTANT_FORCE),
    # a force with nonzero curl drives a flow that sees the reentrant corner
    "lshape": Problem("lshape", "l_shape", ROTATION_FORCE),
    # exact solution: the reentrant-corner singular flow with a smooth radial cut-off
    "lshape_corner": Problem("lshape_corner", "l_shape", CORNER_FORCE),
}


def get_problem(name: str) -> Problem:
    try:
        return PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
