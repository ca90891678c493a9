"""Adaptive Simpson quadrature for smooth, bounded integrands."""

from __future__ import annotations

import sys
from typing import Callable


_EPS = 64.0 * sys.float_info.epsilon


class QuadratureError(RuntimeError):
    pass


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Bisects until the Richardson error estimate |S2 - S1|/15 drops below the
    local share of ``tol``; the extrapolated value is returned.
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_simpson(f, b, a, tol, max_depth)

    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _recurse(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    # below roundoff the estimate is noise; accept rather than bisect forever
    if abs(delta) <= 15.0 * max(tol, _EPS * abs(left + right)):
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(f"no convergence on [{a}, {b}] (error estimate {abs(delta) / 15:.3g})")
    return _recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + _recurse(
        f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1
    )
