"""Bracketed golden-section minimisation for one strictly convex quartic family.

The objective f(s) = (s^2 + a)^2 + (b s + c)^2 with a >= 0 has a monotone
increasing derivative, hence a unique minimiser.  The derivative sign gives
a bracket by doubling; golden-section then narrows it to the requested
width.  No derivatives of the caller's data are needed beyond this family.
"""

from __future__ import annotations

import math

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def quartic_value(s: float, a: float, b: float, c: float) -> float:
    t = s * s + a
    u = b * s + c
    return t * t + u * u


def _quartic_slope(s: float, a: float, b: float, c: float) -> float:
    return 4.0 * s**3 + (4.0 * a + 2.0 * b * b) * s + 2.0 * b * c


def bracket_minimum(a: float, b: float, c: float, max_doublings: int = 200) -> tuple:
    """Interval [lo, hi] with slope(lo) <= 0 <= slope(hi)."""
    if a < 0:
        raise ValueError("quartic family requires a >= 0")
    lo, hi = -1.0, 1.0
    n = 0
    while _quartic_slope(lo, a, b, c) > 0.0:
        lo *= 2.0
        n += 1
        if n > max_doublings:
            raise RuntimeError("failed to bracket the minimiser (objective is coercive; "
                               "this indicates non-finite inputs)")
    n = 0
    while _quartic_slope(hi, a, b, c) < 0.0:
        hi *= 2.0
        n += 1
        if n > max_doublings:
            raise RuntimeError("failed to bracket the minimiser (objective is coercive; "
                               "this indicates non-finite inputs)")
    return lo, hi


def golden_section(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Minimise a unimodal f on [lo, hi] to interval width ``tol``."""
    if hi < lo:
        lo, hi = hi, lo
    c = hi - (hi - lo) * _INV_PHI
    d = lo + (hi - lo) * _INV_PHI
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - (hi - lo) * _INV_PHI
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + (hi - lo) * _INV_PHI
            fd = f(d)
    return 0.5 * (lo + hi)


def minimize_convex_quartic(a: float, b: float, c: float, tol: float = 1e-12) -> tuple:
    """Unique minimiser and minimum of (s^2 + a)^2 + (b s + c)^2.

    Returns (s_min, f_min).
    """
    if b * c == 0.0:
        # slope 4s^3 + (4a + 2b^2)s + 2bc vanishes at 0 and is increasing
        return 0.0, quartic_value(0.0, a, b, c)
    lo, hi = bracket_minimum(a, b, c)
    s = golden_section(lambda t: quartic_value(t, a, b, c), lo, hi, tol)
    return s, quartic_value(s, a, b, c)
