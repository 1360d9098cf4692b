"""Triangle quadrature in barycentric coordinates (weights sum to one)."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


def _orbit3(a):
    b = 1.0 - 2.0 * a
    return [(a, a, b), (a, b, a), (b, a, a)]


# Dunavant rules of degree 1, 2, 4, 5 (all weights positive)
_DUNAVANT = {
    1: ([(1 / 3, 1 / 3, 1 / 3)], [1.0]),
    2: (_orbit3(1 / 6), [1 / 3] * 3),
    4: (
        _orbit3(0.445948490915965) + _orbit3(0.091576213509771),
        [0.223381589678011] * 3 + [0.109951743655322] * 3,
    ),
    5: (
        [(1 / 3, 1 / 3, 1 / 3)] + _orbit3(0.470142064105115) + _orbit3(0.101286507323456),
        [0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3,
    ),
}


@lru_cache(maxsize=None)
def triangle_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Rule exact for polynomials of total degree ``order``.

    Degrees up to 5 use symmetric Dunavant rules; higher degrees fall back to
    a collapsed Gauss-Legendre product rule.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    for deg in sorted(_DUNAVANT):
        if deg >= order:
            bary, w = _DUNAVANT[deg]
            return np.array(bary), np.array(w)
    n = (order + 3) // 2
    x, wx = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * wx
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu, wu) * (1.0 - U) * 2.0
    xs = U.ravel()
    ys = (V * (1.0 - U)).ravel()
    bary = np.column_stack([1.0 - xs - ys, xs, ys])
    return bary, W.ravel()
