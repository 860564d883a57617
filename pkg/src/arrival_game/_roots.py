"""Root location for the boundary equations.

Two families: functions known to be linear between given knots (solved
exactly, in whatever number type the function returns) and general continuous
functions (grid scan for the sign change, then Brent's method).
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq


def _cross(a, b, fa, fb):
    # zero of the chord through (a, fa), (b, fb); exact for linear pieces
    return a + (0 - fa) * (b - a) / (fb - fa)


def first_nonneg_pl(g: Callable, knots: Sequence):
    """inf{t in [knots[0], knots[-1]] : g(t) >= 0} for g linear between knots.

    Returns ``None`` when g < 0 on the whole range.
    """
    vals = [g(k) for k in knots]
    if vals[0] >= 0:
        return knots[0]
    for a, b, fa, fb in zip(knots, knots[1:], vals, vals[1:]):
        if fb >= 0:
            return b if fb == 0 else _cross(a, b, fa, fb)
    return None


def last_nonneg_pl(g: Callable, knots: Sequence):
    """sup{t in [knots[0], knots[-1]] : g(t) >= 0} for g linear between knots."""
    vals = [g(k) for k in knots]
    if vals[-1] >= 0:
        return knots[-1]
    for i in range(len(knots) - 1, 0, -1):
        a, b, fa, fb = knots[i - 1], knots[i], vals[i - 1], vals[i]
        if fa >= 0:
            return a if fa == 0 else _cross(a, b, fa, fb)
    return None


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    m = max(int(np.ceil((hi - lo) / step)), 1)
    return lo + (hi - lo) * np.arange(m + 1) / m


def first_nonneg(g: Callable[[float], float], lo: float, hi: float, step: float = 1e-2, xtol: float = 1e-14):
    """inf{t : g(t) >= 0} on [lo, hi] for continuous g, resolved to ``xtol``."""
    xs = _grid(lo, hi, step)
    prev = None
    for x in xs:
        v = g(x)
        if v >= 0:
            if prev is None:
                return float(x)
            if v == 0:
                return float(x)
            return brentq(g, prev, x, xtol=xtol, rtol=4 * np.finfo(float).eps)
        prev = x
    return None


def last_nonneg(g: Callable[[float], float], lo: float, hi: float, step: float = 1e-2, xtol: float = 1e-14):
    """sup{t : g(t) >= 0} on [lo, hi] for continuous g, resolved to ``xtol``."""
    xs = _grid(lo, hi, step)[::-1]
    prev = None
    for x in xs:
        v = g(x)
        if v >= 0:
            if prev is None or v == 0:
                return float(x)
            return brentq(g, x, prev, xtol=xtol, rtol=4 * np.finfo(float).eps)
        prev = x
    return None
