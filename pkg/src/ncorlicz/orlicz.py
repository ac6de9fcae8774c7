"""Orlicz functions, their complementary functions and Delta_2 diagnostics.

An Orlicz function here is a convex, nondecreasing gauge ``phi`` on
``[0, inf)`` with ``phi(0) = 0`` that is finite on ``[0, domain_max]`` and
``+inf`` beyond.  Four concrete kinds are provided (:class:`Power`,
:class:`ExpMinusOne`, :class:`PowerLog`, :class:`Tabulated`).  All of them
evaluate elementwise on numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._solve import INV_PHI
from .errors import (
    ConjugateDiverges,
    DegenerateGrid,
    InvalidOrliczFunction,
    NegativeArgument,
    OutOfDomain,
    Unreachable,
)

INF = math.inf

DEFAULT_CONJUGATE_GRID = (1e-6, 1e6, 512)
DEFAULT_DELTA2_GRID = (1e-3, 1e3, 200)


@dataclass(frozen=True)
class Delta2Hint:
    """Asserted Delta_2 status; ``k`` is the constant in ``phi(2u) <= k phi(u)``."""

    status: str  # "holds" | "fails" | "unknown"
    k: float | None = None


def _as_array(u):
    arr = np.asarray(u, dtype=float)
    if np.any(np.isnan(arr)):
        raise NegativeArgument("argument is NaN")
    if np.any(arr < 0):
        raise NegativeArgument(f"Orlicz functions take nonnegative arguments, got {u!r}")
    return arr


def _out(arr, scalar):
    return float(arr) if scalar else arr


class OrliczFunction:
    """Common evaluation logic; subclasses supply ``_value``, ``_slope`` and ``_inverse``."""

    kind = "abstract"
    domain_max: float = INF

    # -- subclass hooks, all act on float arrays inside [0, domain_max] ------
    def _value(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _slope(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _inverse(self, y: np.ndarray) -> np.ndarray:
        return _bisect_inverse(self, y)

    @property
    def slope_at_infinity(self) -> float:
        return INF

    @property
    def delta2_hint(self) -> Delta2Hint:
        return Delta2Hint("unknown")

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    # -- public API -----------------------------------------------------------
    def __call__(self, u):
        scalar = np.ndim(u) == 0
        arr = _as_array(u)
        out = np.full(arr.shape, INF)
        inside = arr <= self.domain_max
        if np.any(inside):
            with np.errstate(over="ignore"):
                out[inside] = self._value(arr[inside])
        return _out(out, scalar)

    def derivative(self, u):
        """Right derivative; raises :class:`OutOfDomain` at or past ``domain_max``."""
        scalar = np.ndim(u) == 0
        arr = _as_array(u)
        if np.any(arr >= self.domain_max):
            raise OutOfDomain(f"right derivative requested at u >= domain_max={self.domain_max}")
        with np.errstate(over="ignore"):
            return _out(np.asarray(self._slope(arr), dtype=float), scalar)

    def inverse(self, y):
        """Generalized inverse ``inf{u >= 0 : phi(u) >= y}``."""
        scalar = np.ndim(y) == 0
        arr = _as_array(y)
        if math.isfinite(self.domain_max):
            top = float(self._value(np.array([self.domain_max]))[0])
            if np.any(arr > top):
                raise Unreachable(f"level {y!r} exceeds sup phi = {top} on the domain")
        out = np.zeros(arr.shape)
        pos = arr > 0
        if np.any(pos):
            out[pos] = self._inverse(arr[pos])
        return _out(out, scalar)

    def conjugate(self, grid=DEFAULT_CONJUGATE_GRID) -> "Tabulated":
        return conjugate(self, grid)


@dataclass(frozen=True)
class Power(OrliczFunction):
    """``scale * u**p`` with ``p >= 1``."""

    p: float
    scale: float = 1.0
    domain_max: float = INF
    kind = "power"

    def __post_init__(self):
        if not (self.p >= 1.0 and math.isfinite(self.p)):
            raise InvalidOrliczFunction(f"power exponent must be >= 1, got {self.p}")
        if not self.scale > 0:
            raise InvalidOrliczFunction(f"scale must be positive, got {self.scale}")
        if not self.domain_max > 0:
            raise InvalidOrliczFunction("domain_max must be positive")

    def _value(self, u):
        return self.scale * np.power(u, self.p)

    def _slope(self, u):
        if self.p == 1.0:
            return np.full(np.shape(u), self.scale)
        return self.scale * self.p * np.power(u, self.p - 1.0)

    def _inverse(self, y):
        return np.power(y / self.scale, 1.0 / self.p)

    @property
    def slope_at_infinity(self):
        return self.scale if self.p == 1.0 else INF

    @property
    def delta2_hint(self):
        return Delta2Hint("holds", 2.0 ** self.p)

    def conjugate_exact(self) -> "Power":
        """Literal Legendre conjugate ``sup_v (uv - scale v**p)``, again a power."""
        if self.p == 1.0 or math.isfinite(self.domain_max):
            raise ConjugateDiverges("no finite closed-form conjugate for this power function")
        q = self.p / (self.p - 1.0)
        a = self.scale * self.p
        return Power(q, a ** (1.0 - q) / q)

    def to_dict(self):
        d: dict[str, Any] = {"kind": "power", "p": self.p, "scale": self.scale}
        if math.isfinite(self.domain_max):
            d["domain_max"] = self.domain_max
        return d


@dataclass(frozen=True)
class ExpMinusOne(OrliczFunction):
    """``exp(u) - 1``; the standard example outside Delta_2."""

    domain_max: float = INF
    kind = "expm1"

    def _value(self, u):
        return np.expm1(u)

    def _slope(self, u):
        return np.exp(u)

    def _inverse(self, y):
        return np.log1p(y)

    @property
    def delta2_hint(self):
        return Delta2Hint("fails")

    def to_dict(self):
        d: dict[str, Any] = {"kind": "expm1"}
        if math.isfinite(self.domain_max):
            d["domain_max"] = self.domain_max
        return d


@dataclass(frozen=True)
class PowerLog(OrliczFunction):
    """``u**p * log(1 + u)`` with ``p >= 1``."""

    p: float
    domain_max: float = INF
    kind = "powerlog"

    def __post_init__(self):
        if not (self.p >= 1.0 and math.isfinite(self.p)):
            raise InvalidOrliczFunction(f"powerlog exponent must be >= 1, got {self.p}")

    def _value(self, u):
        return np.power(u, self.p) * np.log1p(u)

    def _slope(self, u):
        return self.p * np.power(u, self.p - 1.0) * np.log1p(u) + np.power(u, self.p) / (1.0 + u)

    @property
    def delta2_hint(self):
        # ratio 2^p log(1+2u)/log(1+u) decreases from 2^(p+1) to 2^p
        return Delta2Hint("holds", 2.0 ** (self.p + 1.0))

    def to_dict(self):
        d: dict[str, Any] = {"kind": "powerlog", "p": self.p}
        if math.isfinite(self.domain_max):
            d["domain_max"] = self.domain_max
        return d


@dataclass(frozen=True, eq=False)
class Tabulated(OrliczFunction):
    """Convex piecewise-linear interpolant through knots, extended by the last slope.

    ``tab_error`` carries the estimated tabulation error when the table was
    produced by :func:`conjugate` (0 for user supplied tables).
    """

    u: tuple[float, ...]
    values: tuple[float, ...]
    tab_error: float = 0.0
    domain_max: float = INF
    _uk: np.ndarray = field(init=False, repr=False)
    _vk: np.ndarray = field(init=False, repr=False)
    _sk: np.ndarray = field(init=False, repr=False)
    kind = "tabulated"

    def __post_init__(self):
        uk = np.asarray(self.u, dtype=float)
        vk = np.asarray(self.values, dtype=float)
        if uk.ndim != 1 or uk.shape != vk.shape or uk.size < 2:
            raise InvalidOrliczFunction("need at least two (u, phi) knots of matching length")
        if not (np.all(np.isfinite(uk)) and np.all(np.isfinite(vk))):
            raise InvalidOrliczFunction("knots must be finite")
        if uk[0] != 0.0 or vk[0] != 0.0:
            raise InvalidOrliczFunction("first knot must be (0, 0)")
        if np.any(np.diff(uk) <= 0):
            raise InvalidOrliczFunction("knot abscissae must be strictly increasing")
        sk = np.diff(vk) / np.diff(uk)
        slack = 1e-9 * np.maximum(1.0, np.abs(sk))
        if np.any(sk < -slack):
            raise InvalidOrliczFunction("tabulated function must be nondecreasing")
        if np.any(np.diff(sk) < -np.maximum(slack[1:], slack[:-1])):
            raise InvalidOrliczFunction("tabulated function must be convex")
        sk = np.maximum.accumulate(np.maximum(sk, 0.0))
        if sk[-1] <= 0:
            raise InvalidOrliczFunction("last slope must be positive so that phi -> inf")
        for name, arr in (("_uk", uk), ("_vk", vk), ("_sk", sk)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_knots(cls, knots, **kw) -> "Tabulated":
        pts = [(float(a), float(b)) for a, b in knots]
        if not pts or pts[0][0] != 0.0:
            pts.insert(0, (0.0, 0.0))
        return cls(tuple(p[0] for p in pts), tuple(p[1] for p in pts), **kw)

    @property
    def knots(self):
        return list(zip(self.u, self.values))

    def __eq__(self, other):
        if not isinstance(other, Tabulated):
            return NotImplemented
        return (self.u, self.values, self.domain_max) == (other.u, other.values, other.domain_max)

    def __hash__(self):
        return hash((self.u, self.values, self.domain_max))

    def _value(self, u):
        uk, vk = self._uk, self._vk
        out = np.interp(u, uk, vk)
        beyond = u > uk[-1]
        if np.any(beyond):
            out = np.where(beyond, vk[-1] + self._sk[-1] * (u - uk[-1]), out)
        return out

    def _slope(self, u):
        idx = np.searchsorted(self._uk, u, side="right") - 1
        return self._sk[np.clip(idx, 0, self._sk.size - 1)]

    def _inverse(self, y):
        uk, vk, sk = self._uk, self._vk, self._sk
        i = np.searchsorted(vk, y, side="left")
        out = np.empty_like(y)
        beyond = i >= vk.size
        out[beyond] = uk[-1] + (y[beyond] - vk[-1]) / sk[-1]
        j = i[~beyond]
        yy = y[~beyond]
        lo = np.clip(j - 1, 0, None)
        span = vk[j] - vk[lo]
        frac = np.where(span > 0, (yy - vk[lo]) / np.where(span > 0, span, 1.0), 0.0)
        out[~beyond] = np.where(j == 0, 0.0, uk[lo] + frac * (uk[j] - uk[lo]))
        return out

    @property
    def slope_at_infinity(self):
        return float(self._sk[-1])

    def to_dict(self):
        d: dict[str, Any] = {"kind": "tabulated", "knots": [[a, b] for a, b in self.knots]}
        if math.isfinite(self.domain_max):
            d["domain_max"] = self.domain_max
        return d


def _bisect_inverse(phi: OrliczFunction, y: np.ndarray) -> np.ndarray:
    hi = np.ones_like(y)
    dm = phi.domain_max
    for _ in range(2100):
        short = phi._value(np.minimum(hi, dm)) < y
        if not np.any(short):
            break
        hi = np.where(short, hi * 2.0, hi)
    hi = np.minimum(hi, dm)
    lo = np.zeros_like(y)
    for _ in range(2200):
        mid = np.where(lo > 0, np.where(hi > 2 * lo, np.sqrt(lo * hi), 0.5 * (lo + hi)), 0.5 * hi)
        done = ~((lo < mid) & (mid < hi))
        if np.all(done):
            break
        reach = phi._value(mid) >= y
        hi = np.where(~done & reach, mid, hi)
        lo = np.where(~done & ~reach, mid, lo)
    return hi


def from_dict(doc: dict[str, Any]) -> OrliczFunction:
    """Build an Orlicz function from a tagged record such as ``{"kind": "power", "p": 2}``."""
    kind = doc.get("kind")
    dm = float(doc.get("domain_max", INF))
    if kind == "power":
        return Power(float(doc["p"]), float(doc.get("scale", 1.0)), dm)
    if kind == "expm1":
        return ExpMinusOne(dm)
    if kind == "powerlog":
        return PowerLog(float(doc["p"]), dm)
    if kind == "tabulated":
        return Tabulated.from_knots(doc["knots"], domain_max=dm)
    raise InvalidOrliczFunction(f"unknown Orlicz function kind {kind!r}")


# -- module-level operations --------------------------------------------------

def evaluate(phi: OrliczFunction, u):
    return phi(u)


def right_derivative(phi: OrliczFunction, u):
    return phi.derivative(u)


def inverse(phi: OrliczFunction, y):
    return phi.inverse(y)


def conjugate_values(phi: OrliczFunction, u) -> np.ndarray:
    """Evaluate ``psi(u) = sup_{v >= 0} (u v - phi(v))`` pointwise.

    The maximizer is bracketed through the stationarity condition
    ``u = phi'(v+)`` and then polished by a golden-section search on the
    concave objective inside the bracket.
    """
    scalar = np.ndim(u) == 0
    us = np.atleast_1d(_as_array(u)).astype(float)
    slope_inf = phi.slope_at_infinity
    if np.any(us > slope_inf):
        bad = float(us[us > slope_inf][0])
        raise ConjugateDiverges(f"sup is infinite at u={bad}: phi grows with slope {slope_inf} at infinity")
    out = np.zeros_like(us)
    act = us > float(phi._slope(np.zeros(1))[0])
    if not np.any(act):
        return _out(out[0] if scalar else out, scalar)
    ua = us[act]
    dm = phi.domain_max
    v_cap = float(np.nextafter(dm, 0.0)) if math.isfinite(dm) else INF

    hi = np.minimum(np.ones_like(ua), v_cap)
    for _ in range(2100):
        short = (phi._slope(hi) < ua) & (hi < v_cap)
        if not np.any(short):
            break
        hi = np.where(short, np.minimum(hi * 2.0, v_cap), hi)
    pinned = phi._slope(hi) < ua  # maximizer sits on the domain boundary
    lo = np.where(pinned, hi, 0.0)

    for _ in range(400):
        mid = np.where(lo > 0, np.where(hi > 2 * lo, np.sqrt(lo * hi), 0.5 * (lo + hi)), 0.5 * hi)
        live = (hi - lo > 1e-8 * hi) & (lo < mid) & (mid < hi)
        if not np.any(live):
            break
        up = phi._slope(mid) >= ua
        hi = np.where(live & up, mid, hi)
        lo = np.where(live & ~up, mid, lo)

    def gain(v):
        return ua * v - phi._value(v)

    a, b = lo.copy(), hi.copy()
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = gain(c), gain(d)
    best = np.maximum(np.maximum(gain(lo), gain(hi)), np.maximum(fc, fd))
    for _ in range(80):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        new_c = b - INV_PHI * (b - a)
        new_d = a + INV_PHI * (b - a)
        c_next = np.where(left, new_c, d)
        d_next = np.where(left, c, new_d)
        fc_next = np.where(left, gain(new_c), fd)
        fd_next = np.where(left, fc, gain(new_d))
        c, d, fc, fd = c_next, d_next, fc_next, fd_next
        best = np.maximum(best, np.maximum(fc, fd))
    out[act] = np.maximum(best, 0.0)
    return _out(out[0] if scalar else out, scalar)


def conjugate(phi: OrliczFunction, grid=DEFAULT_CONJUGATE_GRID) -> Tabulated:
    """Tabulate the complementary function of ``phi`` on a log-spaced grid.

    ``grid = (u_min, u_max, count)``.  The returned table carries
    ``tab_error``: the largest gap, at the midpoints of a doubled grid, between
    the interpolated table and directly computed values, normalized by
    ``max(1, psi)``.
    """
    u_min, u_max, count = grid
    count = int(count)
    if not (0 < u_min < u_max) or count < 2:
        raise DegenerateGrid(f"invalid conjugation grid {grid!r}")
    fine = np.geomspace(u_min, u_max, 2 * count - 1)
    coarse = fine[::2]
    vals = conjugate_values(phi, fine)
    knots_u = np.concatenate([[0.0], coarse])
    knots_v = np.concatenate([[0.0], vals[::2]])
    # roundoff can break monotone convexity by a few ulps; re-impose it on slopes
    knots_v = _convex_repair(knots_u, knots_v)
    table = Tabulated(tuple(knots_u.tolist()), tuple(knots_v.tolist()))
    mids = fine[1::2]
    exact = vals[1::2]
    err = float(np.max(np.abs(table._value(mids) - exact) / np.maximum(1.0, exact)))
    return Tabulated(table.u, table.values, tab_error=err)


def _convex_repair(uk: np.ndarray, vk: np.ndarray) -> np.ndarray:
    sk = np.maximum.accumulate(np.maximum(np.diff(vk) / np.diff(uk), 0.0))
    return np.concatenate([[0.0], np.cumsum(sk * np.diff(uk))])


def power_pair(p: float, normalized: bool = False) -> tuple[Power, Power]:
    """Complementary power pair for ``1/p + 1/q = 1``.

    ``normalized=False`` gives the exact Legendre pair ``(u^p/p, v^q/q)``;
    ``normalized=True`` gives ``(u^p, v^q)``, which is complementary only up to
    constants.
    """
    if p <= 1.0:
        raise ConjugateDiverges("power pairs need p > 1")
    q = p / (p - 1.0)
    if normalized:
        return Power(p), Power(q)
    return Power(p, 1.0 / p), Power(q, 1.0 / q)


@dataclass(frozen=True)
class Delta2Report:
    verdict: str  # "Holds" | "FailsEmpirically"
    k_estimate: float
    witness_u: float
    grid_spec: tuple[float, float, int]
    threshold: float

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "k_estimate": self.k_estimate,
            "witness_u": self.witness_u,
            "grid": list(self.grid_spec),
            "threshold": self.threshold,
        }


def delta2_ratios(phi: OrliczFunction, us: np.ndarray) -> np.ndarray:
    num = phi(2.0 * us)
    den = phi(us)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    r = np.where(np.isinf(num), INF, r)
    r = np.where((den == 0) & (num > 0), INF, r)
    return r  # NaN only where both vanish


def delta2_probe(phi: OrliczFunction, grid=DEFAULT_DELTA2_GRID, threshold: float = 1e6) -> Delta2Report:
    """Empirical Delta_2 test on ``phi(2u)/phi(u)`` over a log grid.

    ``Holds`` requires the sampled ratio to stay below ``threshold`` and to be
    non-increasing over the top decade of the grid.  A finite probe can only
    refute, hence ``FailsEmpirically``.
    """
    u_min, u_max, count = grid
    count = int(count)
    if not (0 < u_min < u_max) or count < 2 or not threshold > 1:
        raise DegenerateGrid(f"invalid Delta_2 grid {grid!r} / threshold {threshold!r}")
    us = np.geomspace(u_min, u_max, count)
    r = delta2_ratios(phi, us)
    valid = ~np.isnan(r)
    if not np.any(valid):
        raise DegenerateGrid("phi vanishes on the whole probe grid")
    rv = np.where(valid, r, -INF)
    i = int(np.argmax(rv))
    k = float(rv[i])
    top = r[(us >= u_max / 10.0) & valid]
    tail_ok = bool(np.all(top[1:] <= top[:-1] * (1.0 + 1e-9))) if top.size > 1 else True
    verdict = "Holds" if (k <= threshold and tail_ok) else "FailsEmpirically"
    return Delta2Report(verdict, k, float(us[i]), (float(u_min), float(u_max), count), float(threshold))


def young_gap(phi: OrliczFunction, psi: OrliczFunction, u: float, v: float) -> float:
    """``phi(u) + psi(v) - u v``; nonnegative up to tabulation error of ``psi``."""
    if u < 0 or v < 0:
        raise NegativeArgument("young_gap needs u, v >= 0")
    return float(phi(u) + psi(v) - u * v)
