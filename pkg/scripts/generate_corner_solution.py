"""Generate ``uzawa_afem/_corner_solution.py``.

Stokes flow in the L-shape driven only by the reentrant corner: the classical
singular stream function ``r^(1+lam) psi(phi)`` with its pressure, multiplied
by a C^3 radial cut-off that is 1 for ``r <= R0`` and 0 for ``r >= R1``. The
body force vanishes outside the annulus ``R0 < r < R1`` and is computed there
symbolically.

Run from the repository root::

    python3 scripts/generate_corner_solution.py
"""
import math
from pathlib import Path

import sympy as sp
from scipy.optimize import brentq

OMEGA = 3 * sp.pi / 2
R0, R1 = sp.Rational(1, 4), sp.Rational(9, 10)


def corner_exponent() -> float:
    """Smallest positive root of ``sin(t w)^2 = t^2 sin(w)^2`` for the 3/2 pi corner."""
    w = float(OMEGA)
    return brentq(lambda t: math.sin(t * w) ** 2 - t**2 * math.sin(w) ** 2, 0.5, 0.6)


def main() -> None:
    lam = sp.Float(corner_exponent(), 30)
    x, y, r, phi = sp.symbols("x y r phi", real=True)
    t = sp.Symbol("t", real=True)
    cw = sp.cos(lam * OMEGA)
    psi = (sp.sin((1 + lam) * t) * cw / (1 + lam) - sp.cos((1 + lam) * t)
           - sp.sin((1 - lam) * t) * cw / (1 - lam) + sp.cos((1 - lam) * t))
    d1, d3 = sp.diff(psi, t), sp.diff(psi, t, 3)

    rr = sp.sqrt(x**2 + y**2)
    th = sp.atan2(y, x)
    stream = rr ** (1 + lam) * psi.subs(t, th)
    pres = -rr ** (lam - 1) * ((1 + lam) ** 2 * d1 + d3).subs(t, th) / (1 - lam)

    s = (rr - R0) / (R1 - R0)
    cut = 1 - (35 * s**4 - 84 * s**5 + 70 * s**6 - 20 * s**7)
    Phi = cut * stream
    P = cut * pres
    u1, u2 = sp.diff(Phi, y), -sp.diff(Phi, x)
    lap = lambda g: sp.diff(g, x, 2) + sp.diff(g, y, 2)  # noqa: E731
    f1 = -lap(u1) + sp.diff(P, x)
    f2 = -lap(u2) + sp.diff(P, y)

    # singular parts (r <= R0) without the cut-off
    v1, v2 = sp.diff(stream, y), -sp.diff(stream, x)

    def polar(e):
        return e.subs(sp.atan2(y, x), phi).subs(sp.sqrt(x**2 + y**2), r)

    blocks = {
        "_annulus_velocity": [u1, u2],
        "_annulus_pressure": [P],
        "_annulus_force": [f1, f2],
        "_inner_velocity": [v1, v2],
        "_inner_pressure": [pres],
    }
    out = [
        '"""Generated by scripts/generate_corner_solution.py; do not edit."""',
        "from numpy import cos, pi, sin  # noqa: F401",
        "",
        f"EXPONENT = {float(lam)!r}",
        f"R0 = {float(R0)!r}",
        f"R1 = {float(R1)!r}",
        "",
    ]
    for name, exprs in blocks.items():
        exprs = [polar(e) for e in exprs]
        repl, red = sp.cse(exprs, optimizations="basic")
        out.append(f"def {name}(x, y, r, phi):")
        for sym, e in repl:
            out.append(f"    {sym} = {sp.pycode(e, fully_qualified_modules=False)}")
        vals = ", ".join(sp.pycode(e, fully_qualified_modules=False) for e in red)
        out.append(f"    return ({vals},)")
        out.append("")
    target = Path(__file__).resolve().parents[1] / "src" / "uzawa_afem" / "_corner_solution.py"
    target.write_text("\n".join(out))
    print(f"wrote {target}")


if __name__ == "__main__":
    main()
