"""Operator sequences ``x_n -> x`` used by the theorem checks.

Every family yields ``(n, x_n, x)`` for ``n = 1..length``.  The reference
``x`` is yielded with each term because spike families append a block whose
trace weight depends on ``n``; ``x`` is then padded with a zero block so that
``x_n - x`` is defined.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import FamilyGenerationFailure
from .operators import AlgebraShape, BlockOperator, random_operator, random_unitary, spawn_rng

KINDS = ("constant", "spike", "shrinking_noise", "monotone_down", "monotone_up", "vanishing", "explicit")


def decay(n: int, scale: float, rate: float) -> float:
    return scale * float(n) ** (-rate)


@dataclass(frozen=True, eq=False)
class SequenceFamily:
    """A named recipe for ``x_n``.

    ``params`` by kind (defaults in brackets):

    * ``spike``: ``x_n = x + a_n e_n`` with ``e_n`` a projection of trace
      ``t_n`` orthogonal to ``x``.  ``a_n = amp_scale * n**amp_exponent``
      [1, 0.25]; ``t_n = n**-trace_exponent`` [2], or ``t_n = spike_modular /
      phi(a_n)`` when ``spike_modular`` is set (``phi`` passed to ``terms``).
    * ``shrinking_noise``: ``x_n = x + eps_n U_n G V_n`` with
      ``eps_n = noise_scale * n**-rate`` [1, 1], ``G`` drawn once from
      ``ensemble`` [gaussian] and scaled to ``||G||_inf = 1``, and fresh
      blockwise Haar unitaries ``U_n, V_n`` (``V_n = U_n*`` for Hermitian
      ``G``).  The rotations keep the singular values of the noise fixed,
      so ``||x_n - x||`` decreases exactly like ``eps_n`` for every norm.
      ``rotate`` [True] set to False keeps ``U_n = V_n = 1``; then each
      eigenvalue of ``x_n`` moves analytically in ``eps_n``, which pointwise
      profile checks need.
    * ``monotone_down``: ``x_n = x + theta_n D`` decreasing to ``x`` with
      ``theta_n = scale * n**-rate`` [1, 1]; ``mode`` picks ``D``: ``shift``
      (identity), ``scale`` (``x`` itself) or ``wishart`` (random PSD).
    * ``monotone_up``: ``x_n = g_n(x)`` for PSD ``x`` increasing to ``x``;
      ``mode`` ``scale`` (``(1 - theta_n) x``), ``clip``
      (``min(x, (1 - theta_n) ||x||)``) or ``truncate`` (drop eigenvalues
      below ``theta_n ||x||``).
    * ``vanishing``: PSD ``x_n`` decreasing to ``x = 0`` built from
      ``params["source"]``; ``mode`` ``scale``, ``clip`` or ``spectral``
      (keep eigenvalues at most ``theta_n ||source||``).
    * ``explicit``: ``params["terms"]`` is the list ``[x_1, ..., x_N]``.
    """

    kind: str
    base: BlockOperator
    length: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FamilyGenerationFailure(f"unknown family kind {self.kind!r}")
        if self.length < 1:
            raise FamilyGenerationFailure("family length must be positive")
        if self.kind == "explicit" and len(self.params.get("terms", ())) != self.length:
            raise FamilyGenerationFailure("explicit family needs exactly `length` terms")
        if self.kind == "monotone_up" and not self.base.is_psd():
            raise FamilyGenerationFailure("monotone_up needs a PSD base")

    def _theta(self, n):
        return decay(n, self.params.get("scale", 1.0), self.params.get("rate", 1.0))

    def terms(self, phi=None) -> Iterator[tuple[int, BlockOperator, BlockOperator]]:
        x = self.base
        p = self.params
        kind = self.kind
        direction = None
        if kind == "monotone_down" and p.get("mode", "shift") == "wishart":
            direction = random_operator(x.shape, "wishart", spawn_rng(self.seed, 0))
        if kind == "shrinking_noise":
            template = random_operator(x.shape, p.get("ensemble", "gaussian"), spawn_rng(self.seed, 0))
            template = template / template.norm_inf()
        if kind == "vanishing":
            src = p["source"]
            top = src.norm_inf()
        for n in range(1, self.length + 1):
            if kind == "constant":
                yield n, x, x
            elif kind == "spike":
                a = p.get("amp_scale", 1.0) * float(n) ** p.get("amp_exponent", 0.25)
                if p.get("spike_modular") is not None:
                    if phi is None:
                        raise FamilyGenerationFailure("spike_modular needs the Orlicz function")
                    t = p["spike_modular"] / float(phi(a))
                else:
                    t = float(n) ** (-p.get("trace_exponent", 2.0))
                if not (t > 0 and np.isfinite(t)):
                    raise FamilyGenerationFailure(f"spike trace {t!r} at n={n}")
                extra = AlgebraShape(((1, t),))
                yield n, x.direct_sum(BlockOperator(extra, (np.array([[a]]),))), x.direct_sum(BlockOperator.zeros(extra))
            elif kind == "shrinking_noise":
                if p.get("rotate", True):
                    rng = spawn_rng(self.seed, n)
                    us = [random_unitary(d, rng) for d in x.shape.dims]
                    vs = [u.conj().T for u in us] if template.is_hermitian() else [random_unitary(d, rng) for d in x.shape.dims]
                    g = BlockOperator(x.shape, tuple(u @ b @ v for u, b, v in zip(us, template.blocks, vs)))
                else:
                    g = template
                eps = decay(n, p.get("noise_scale", 1.0), p.get("rate", 1.0))
                yield n, x + eps * g, x
            elif kind == "monotone_down":
                mode = p.get("mode", "shift")
                d = {"shift": BlockOperator.identity(x.shape), "scale": x, "wishart": direction}[mode]
                yield n, x + self._theta(n) * d, x
            elif kind == "monotone_up":
                th = self._theta(n)
                mode = p.get("mode", "scale")
                top = x.norm_inf()
                if mode == "scale":
                    xn = (1.0 - th) * x
                elif mode == "clip":
                    xn = x.hermitian_calculus(lambda lam: np.minimum(lam, (1.0 - th) * top))
                elif mode == "truncate":
                    xn = x.hermitian_calculus(lambda lam: np.where(lam >= th * top, lam, 0.0))
                else:
                    raise FamilyGenerationFailure(f"unknown monotone_up mode {mode!r}")
                yield n, xn, x
            elif kind == "vanishing":
                th = self._theta(n)
                mode = p.get("mode", "scale")
                if mode == "scale":
                    xn = th * src
                elif mode == "clip":
                    xn = src.hermitian_calculus(lambda lam: np.minimum(np.clip(lam, 0, None), th * top))
                elif mode == "spectral":
                    xn = src.hermitian_calculus(lambda lam: np.where(lam <= th * top, np.clip(lam, 0, None), 0.0))
                else:
                    raise FamilyGenerationFailure(f"unknown vanishing mode {mode!r}")
                yield n, xn, x
            else:  # explicit
                yield n, p["terms"][n - 1], x

    def validate_order(self, atol: float = 1e-10) -> None:
        """Check the PSD order relations promised by monotone kinds."""
        if self.kind not in ("monotone_down", "monotone_up", "vanishing"):
            return
        prev = None
        for n, xn, x in self.terms():
            if self.kind == "monotone_up":
                ok = xn.is_psd(atol) and (x - xn).is_psd(atol) and (prev is None or (xn - prev).is_psd(atol))
            else:
                ok = (xn - x).is_psd(atol) and (prev is None or (prev - xn).is_psd(atol))
                if self.kind == "vanishing":
                    ok = ok and xn.is_psd(atol)
            if not ok:
                raise FamilyGenerationFailure(f"{self.kind} family breaks its order relation at n={n}")
            prev = xn
