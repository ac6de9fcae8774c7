"""Finite block model of a semifinite von Neumann algebra with a weighted trace.

An element is a tuple of square complex matrices, one per block, and the
trace is ``tau(x) = sum_k c_k Tr(x_k)``.  All blocks with dimension one give
an atomic commutative algebra; larger blocks give the noncommutative case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NumericalFailure, RankTooLarge, ShapeMismatch

MERGE_RTOL = 1e-12


@dataclass(frozen=True)
class AlgebraShape:
    """Block dimensions ``n_k`` with trace weights ``c_k > 0``."""

    blocks: tuple[tuple[int, float], ...]

    def __post_init__(self):
        norm = []
        for n, c in self.blocks:
            if int(n) != n or n < 1:
                raise ValueError(f"block dimension must be a positive integer, got {n!r}")
            c = float(c)
            if not (c > 0 and math.isfinite(c)):
                raise ValueError(f"trace weight must be positive and finite, got {c!r}")
            norm.append((int(n), c))
        if not norm:
            raise ValueError("an algebra needs at least one block")
        object.__setattr__(self, "blocks", tuple(norm))

    @classmethod
    def atomic(cls, weights: Iterable[float]) -> "AlgebraShape":
        return cls(tuple((1, w) for w in weights))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.blocks)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(c for _, c in self.blocks)

    @property
    def total_trace(self) -> float:
        return float(sum(n * c for n, c in self.blocks))

    def __len__(self):
        return len(self.blocks)

    def direct_sum(self, other: "AlgebraShape") -> "AlgebraShape":
        return AlgebraShape(self.blocks + other.blocks)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.complex128)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SingularValueProfile:
    """Decreasing right-continuous step function ``t -> mu_t(x)``.

    ``levels`` are strictly decreasing and positive, ``widths`` positive; the
    function equals ``levels[j]`` on ``[W_{j-1}, W_j)`` with ``W`` the
    cumulative widths, and vanishes beyond ``total_width``.
    """

    levels: np.ndarray
    widths: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float).copy()
        wd = np.asarray(self.widths, dtype=float).copy()
        if lv.shape != wd.shape or lv.ndim != 1:
            raise ValueError("levels and widths must be 1-d arrays of equal length")
        if np.any(wd <= 0) or np.any(lv <= 0) or np.any(np.diff(lv) >= 0):
            raise ValueError("profile needs positive widths and strictly decreasing positive levels")
        cum = np.cumsum(wd)
        for name, arr in (("levels", lv), ("widths", wd), ("_cum", cum)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_spectrum(cls, sigma, weights, rtol: float = MERGE_RTOL) -> "SingularValueProfile":
        sigma = np.asarray(sigma, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if sigma.size == 0:
            return cls(np.empty(0), np.empty(0))
        order = np.argsort(-sigma, kind="stable")
        s, w = sigma[order], weights[order]
        tol = rtol * max(float(s[0]), 0.0)
        keep = s > tol
        s, w = s[keep], w[keep]
        if s.size == 0:
            return cls(np.empty(0), np.empty(0))
        new_group = np.concatenate([[True], (s[:-1] - s[1:]) > tol])
        gid = np.cumsum(new_group) - 1
        levels = s[new_group]
        widths = np.bincount(gid, weights=w)
        return cls(levels, widths)

    @property
    def steps(self) -> list[tuple[float, float]]:
        return [(float(a), float(b)) for a, b in zip(self.levels, self.widths)]

    @property
    def total_width(self) -> float:
        return float(self._cum[-1]) if self._cum.size else 0.0

    @property
    def breakpoints(self) -> np.ndarray:
        return self._cum

    @property
    def sup(self) -> float:
        return float(self.levels[0]) if self.levels.size else 0.0

    def __len__(self):
        return int(self.levels.size)

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("mu_t is defined for t >= 0")
        idx = np.searchsorted(self._cum, t, side="right")
        padded = np.concatenate([self.levels, [0.0]])
        out = padded[idx]
        return float(out) if scalar else out

    def distribution(self, s) -> float:
        """``tau(e_(s, inf)(|x|))``: total width of levels strictly above ``s``."""
        # read from the cumulative widths so that mu_{d(s)} <= s holds without rounding slack
        k = int(np.count_nonzero(self.levels > s))
        return float(self._cum[k - 1]) if k else 0.0

    def integral(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """``int_0^inf f(mu_t) dt`` for ``f`` with ``f(0) = 0`` (an exact finite sum)."""
        if not self.levels.size:
            return 0.0
        return float(np.sum(self.widths * f(self.levels)))

    def scaled(self, alpha: float) -> "SingularValueProfile":
        a = abs(alpha)
        if a == 0 or not self.levels.size:
            return SingularValueProfile(np.empty(0), np.empty(0))
        return SingularValueProfile(self.levels * a, self.widths)


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """Element of ``M_{n_1} + ... + M_{n_K}``; immutable."""

    shape: AlgebraShape
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(_frozen(b) for b in self.blocks)
        if len(mats) != len(self.shape):
            raise ShapeMismatch(f"{len(mats)} matrices for {len(self.shape)} blocks")
        for k, (m, n) in enumerate(zip(mats, self.shape.dims)):
            if m.shape != (n, n):
                raise ShapeMismatch(f"block {k}: expected {(n, n)}, got {m.shape}")
            if not np.all(np.isfinite(m)):
                raise ValueError(f"block {k} has non-finite entries")
        object.__setattr__(self, "blocks", mats)

    # -- constructors ---------------------------------------------------------
    @classmethod
    def from_blocks(cls, matrices: Sequence, weights: Sequence[float] | None = None) -> "BlockOperator":
        mats = [np.atleast_2d(np.asarray(m, dtype=np.complex128)) for m in matrices]
        if weights is None:
            weights = [1.0] * len(mats)
        return cls(AlgebraShape(tuple((m.shape[0], w) for m, w in zip(mats, weights))), tuple(mats))

    @classmethod
    def single_block(cls, matrix, weight: float = 1.0) -> "BlockOperator":
        return cls.from_blocks([matrix], [weight])

    @classmethod
    def atomic(cls, values: Sequence[complex], weights: Sequence[float] | None = None) -> "BlockOperator":
        """Commutative element: one 1x1 block per value."""
        values = list(values)
        if weights is None:
            weights = [1.0] * len(values)
        if len(weights) != len(values):
            raise ShapeMismatch("one weight per value expected")
        return cls.from_blocks([[[v]] for v in values], weights)

    @classmethod
    def zeros(cls, shape: AlgebraShape) -> "BlockOperator":
        return cls(shape, tuple(np.zeros((n, n)) for n in shape.dims))

    @classmethod
    def identity(cls, shape: AlgebraShape) -> "BlockOperator":
        return cls(shape, tuple(np.eye(n) for n in shape.dims))

    # -- arithmetic -------------------------------------------------------------
    def _check(self, other: "BlockOperator"):
        if not isinstance(other, BlockOperator):
            raise TypeError(f"expected BlockOperator, got {type(other).__name__}")
        if other.shape != self.shape:
            raise ShapeMismatch("operators live on different algebra shapes")

    def _map(self, f) -> "BlockOperator":
        return BlockOperator(self.shape, tuple(f(b) for b in self.blocks))

    def __add__(self, other):
        self._check(other)
        return BlockOperator(self.shape, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        self._check(other)
        return BlockOperator(self.shape, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self):
        return self._map(lambda b: -b)

    def __mul__(self, alpha):
        if isinstance(alpha, BlockOperator):
            return NotImplemented
        return self._map(lambda b: alpha * b)

    __rmul__ = __mul__

    def __truediv__(self, alpha):
        return self._map(lambda b: b / alpha)

    def __matmul__(self, other):
        self._check(other)
        return BlockOperator(self.shape, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def adjoint(self) -> "BlockOperator":
        return self._map(lambda b: b.conj().T)

    @property
    def H(self) -> "BlockOperator":
        return self.adjoint()

    def __eq__(self, other):
        if not isinstance(other, BlockOperator):
            return NotImplemented
        return self.shape == other.shape and all(
            np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks)
        )

    __hash__ = None

    def abs(self) -> "BlockOperator":
        """``|x| = (x* x)^(1/2)`` block by block via a Hermitian eigendecomposition."""
        out = []
        for b in self.blocks:
            g = b.conj().T @ b
            g = 0.5 * (g + g.conj().T)
            try:
                lam, v = np.linalg.eigh(g)
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure(str(exc)) from exc
            r = (v * np.sqrt(np.clip(lam, 0.0, None))) @ v.conj().T
            scale = np.linalg.norm(b) ** 2
            if np.linalg.norm(r @ r - g) > 1e-8 * max(scale, 1e-300):
                raise NumericalFailure("square root of x*x failed its residual check")
            out.append(r)
        return BlockOperator(self.shape, tuple(out))

    def hermitian_calculus(self, f: Callable[[np.ndarray], np.ndarray]) -> "BlockOperator":
        """``f(x)`` for Hermitian ``x`` (uses the Hermitian part of each block)."""
        out = []
        for b in self.blocks:
            h = 0.5 * (b + b.conj().T)
            try:
                lam, v = np.linalg.eigh(h)
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure(str(exc)) from exc
            out.append((v * f(lam)) @ v.conj().T)
        return BlockOperator(self.shape, tuple(out))

    def abs_calculus(self, f: Callable[[np.ndarray], np.ndarray]) -> "BlockOperator":
        """``f(|x|)`` through the eigendecomposition of ``x* x``."""
        out = []
        for b in self.blocks:
            g = b.conj().T @ b
            try:
                lam, v = np.linalg.eigh(0.5 * (g + g.conj().T))
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure(str(exc)) from exc
            out.append((v * f(np.sqrt(np.clip(lam, 0.0, None)))) @ v.conj().T)
        return BlockOperator(self.shape, tuple(out))

    def trace(self) -> complex:
        return complex(sum(c * np.trace(b) for c, b in zip(self.shape.weights, self.blocks)))

    def direct_sum(self, other: "BlockOperator") -> "BlockOperator":
        return BlockOperator(self.shape.direct_sum(other.shape), self.blocks + other.blocks)

    def norm_inf(self) -> float:
        """Operator norm ``max_k ||x_k||``."""
        return float(max(np.linalg.norm(b, 2) for b in self.blocks))

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        return all(np.allclose(b, b.conj().T, rtol=0, atol=atol) for b in self.blocks)

    def is_psd(self, atol: float = 1e-10) -> bool:
        if not self.is_hermitian(atol):
            return False
        return all(np.linalg.eigvalsh(0.5 * (b + b.conj().T)).min() >= -atol for b in self.blocks)

    def is_projection(self, atol: float = 1e-12) -> bool:
        return all(
            np.allclose(b @ b, b, rtol=0, atol=atol) and np.allclose(b, b.conj().T, rtol=0, atol=atol)
            for b in self.blocks
        )

    # -- spectral data (cached) -------------------------------------------------
    @cached_property
    def spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        return spectrum_abs(self)

    @cached_property
    def profile(self) -> SingularValueProfile:
        return SingularValueProfile.from_spectrum(*self.spectrum)


def spectrum_abs(x: BlockOperator, check: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Weighted singular values: arrays ``(sigma, weight)`` over all blocks.

    With ``check=True`` every singular pair is verified through the residual
    ``||x* x v - sigma^2 v|| <= 1e-8 ||x||^2``.
    """
    sig, wts = [], []
    for b, c in zip(x.blocks, x.shape.weights):
        try:
            if check:
                _, s, vh = np.linalg.svd(b)
            else:
                s = np.linalg.svd(b, compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(str(exc)) from exc
        if check:
            g = b.conj().T @ b
            v = vh.conj().T
            res = np.linalg.norm(g @ v - v * s**2, axis=0)
            bound = 1e-8 * max(float(s[0]) ** 2, 1e-300) if s.size else 0.0
            if np.any(res > bound):
                raise NumericalFailure("singular vector residual check failed")
        sig.append(s)
        wts.append(np.full(s.shape, c))
    return np.concatenate(sig), np.concatenate(wts)


def singular_value_profile(x: BlockOperator) -> SingularValueProfile:
    return x.profile


def distribution(x: BlockOperator, s: float) -> float:
    if s < 0:
        raise ValueError("distribution level must be nonnegative")
    return x.profile.distribution(s)


def mu_at(x: BlockOperator, t):
    return x.profile(t)


def measure_gauge(x: BlockOperator, y: BlockOperator, eps: float) -> float:
    """``tau(e_(eps, inf)(|x - y|))``; a sequence converges in measure iff this tends to 0 for every eps."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if x.shape != y.shape:
        raise ShapeMismatch("measure_gauge needs operators on the same algebra")
    return distribution(x - y, eps)


# -- random generation ----------------------------------------------------------

def spawn_rng(seed: int, *index: int) -> np.random.Generator:
    """Independent stream for (seed, index...), hashed by SeedSequence."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, index)]))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _ginibre(rng, n, m=None):
    m = n if m is None else m
    return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / math.sqrt(2.0)


def random_unitary(n: int, seed=None) -> np.ndarray:
    rng = _rng(seed)
    q, r = np.linalg.qr(_ginibre(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_shape(seed=None, max_blocks: int = 4, max_dim: int = 8,
                 weight_range: tuple[float, float] = (0.1, 3.0)) -> AlgebraShape:
    rng = _rng(seed)
    k = int(rng.integers(1, max_blocks + 1))
    dims = rng.integers(1, max_dim + 1, size=k)
    lo, hi = weight_range
    weights = np.exp(rng.uniform(math.log(lo), math.log(hi), size=k))
    return AlgebraShape(tuple((int(n), float(w)) for n, w in zip(dims, weights)))


ENSEMBLES = ("diagonal_uniform", "gaussian", "hermitian", "wishart", "projection")


def random_operator(shape: AlgebraShape, ensemble: str = "gaussian", seed=None, *,
                    low: float = 0.0, high: float = 1.0, sigma: float = 1.0,
                    ranks: int | Sequence[int] | None = None) -> BlockOperator:
    """Draw a block operator; identical ``seed`` gives identical output.

    Ensembles: ``diagonal_uniform`` (real diagonal, entries in ``[low, high)``),
    ``gaussian`` (complex Ginibre times ``sigma``), ``hermitian``, ``wishart``
    (``G* G / n``, PSD) and ``projection`` (orthogonal projections of the
    given rank per block).
    """
    rng = _rng(seed)
    blocks = []
    if ensemble == "projection":
        if ranks is None:
            ranks = [1] * len(shape)
        elif isinstance(ranks, (int, np.integer)):
            ranks = [int(ranks)] * len(shape)
        if len(ranks) != len(shape):
            raise ShapeMismatch("one rank per block expected")
    for k, n in enumerate(shape.dims):
        if ensemble == "diagonal_uniform":
            blocks.append(np.diag(rng.uniform(low, high, size=n)))
        elif ensemble == "gaussian":
            blocks.append(sigma * _ginibre(rng, n))
        elif ensemble == "hermitian":
            g = _ginibre(rng, n)
            blocks.append(sigma * 0.5 * (g + g.conj().T))
        elif ensemble == "wishart":
            g = _ginibre(rng, n)
            w = g.conj().T @ g / n
            blocks.append(0.5 * (w + w.conj().T))
        elif ensemble == "projection":
            r = int(ranks[k])
            if r < 0 or r > n:
                raise RankTooLarge(f"rank {r} requested in a block of dimension {n}")
            q, _ = np.linalg.qr(_ginibre(rng, n))
            p = q[:, :r] @ q[:, :r].conj().T
            blocks.append(0.5 * (p + p.conj().T))
        else:
            raise ValueError(f"unknown ensemble {ensemble!r}; choose from {ENSEMBLES}")
    return BlockOperator(shape, tuple(blocks))
