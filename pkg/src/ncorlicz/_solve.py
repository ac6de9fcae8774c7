"""Scalar bracketing solvers shared by the norm and conjugation code."""
from __future__ import annotations

import math
from typing import Callable

from .errors import BracketFailure

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def expand_bracket(pred: Callable[[float], bool], start: float, factor: float = 2.0,
                   max_steps: int = 2100) -> float:
    """Multiply ``start`` by ``factor`` until ``pred`` holds; return that point."""
    x = start
    for _ in range(max_steps):
        if pred(x):
            return x
        x *= factor
        if x == 0.0 or not math.isfinite(x):
            break
    raise BracketFailure(f"no valid bracket end reached from {start!r}")


def bisect_decreasing(f: Callable[[float], float], target: float, lo: float, hi: float,
                      tol: float, max_iter: int = 400):
    """Locate ``f(lam) = target`` for nonincreasing ``f`` with ``f(lo) >= target >= f(hi)``.

    Safeguarded false position in ``log lam``: an interpolation step is taken
    only after a step that at least halved the bracket, otherwise the
    midpoint (geometric while the bracket spans more than a factor two).
    Returns ``(lam, f(lam), lo, hi, iterations)``; when the residual test never
    fires the upper end (where ``f <= target``) is returned.
    """
    f_lo, f_hi = f(lo), f(hi)
    interpolate = True
    it = 0
    while it < max_iter:
        it += 1
        width = hi - lo
        mid = None
        if interpolate and lo > 0.0 and math.isfinite(f_lo) and f_lo > f_hi:
            a, b = math.log(lo), math.log(hi)
            cand = math.exp(a + (f_lo - target) / (f_lo - f_hi) * (b - a))
            if lo < cand < hi:
                mid = cand
        if mid is None:
            mid = math.sqrt(lo * hi) if (lo > 0.0 and hi > 2.0 * lo) else 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        f_mid = f(mid)
        if abs(f_mid - target) <= tol * max(1.0, abs(target)):
            return mid, f_mid, lo, hi, it
        if f_mid > target:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
        interpolate = (hi - lo) <= 0.5 * width
    return hi, f_hi, lo, hi, it


def golden_min(f: Callable[[float], float], a: float, b: float, xtol: float = 1e-12,
               max_iter: int = 200):
    """Golden-section search for the minimum of a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), iterations)`` with the best point seen.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    best = (c, fc) if fc <= fd else (d, fd)
    it = 0
    while abs(b - a) > xtol * max(1.0, abs(a), abs(b)) and it < max_iter:
        it += 1
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
            if fc < best[1]:
                best = (c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
            if fd < best[1]:
                best = (d, fd)
    return best[0], best[1], it
