"""Randomized battery for the rearrangement inequalities used by the proofs.

All operators are scaled to ``||x||_inf = 1`` before comparison, so the
reported violations are absolute numbers on a common scale.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .norms import modular
from .operators import BlockOperator, SingularValueProfile, random_operator, random_shape, random_unitary, spawn_rng
from .orlicz import ExpMinusOne, OrliczFunction, Power

CHECKS = (
    "subadditivity",
    "unitary_invariance",
    "convexity_integral",
    "convexity_majorization",
    "trace_formula",
    "scaling",
    "monotonicity",
    "distribution_galois",
)

DEFAULT_PHIS = (Power(1.5), Power(2.0), Power(3.0), ExpMinusOne())


def _normalized(x: BlockOperator) -> BlockOperator:
    top = x.norm_inf()
    return x / top if top > 0 else x


def _left_ends(prof: SingularValueProfile) -> np.ndarray:
    return np.concatenate([[0.0], prof.breakpoints[:-1]])


def _union_steps(*profs: SingularValueProfile) -> tuple[np.ndarray, np.ndarray]:
    """Left endpoints and lengths of the common refinement of several step functions."""
    pts = np.unique(np.concatenate([[0.0], *[p.breakpoints for p in profs]]))
    return pts[:-1], np.diff(pts)


def _midpoints(*profs: SingularValueProfile) -> np.ndarray:
    left, length = _union_steps(*profs)
    # slivers come from summing equal widths in different orders
    keep = length > 1e-12 * max(1.0, float(left[-1] + length[-1])) if left.size else []
    return left[keep] + 0.5 * length[keep] if np.any(keep) else np.array([0.0])


def subadditivity_violation(x: BlockOperator, y: BlockOperator) -> float:
    """``max(mu_{t+s}(x+y) - mu_t(x) - mu_s(y))`` over all step left endpoints."""
    px, py, pz = x.profile, y.profile, (x + y).profile
    t = _left_ends(px) if len(px) else np.array([0.0])
    s = _left_ends(py) if len(py) else np.array([0.0])
    tt, ss = np.meshgrid(t, s, indexing="ij")
    # right-continuity: nudge t+s off a rounding-level jump of mu(x+y)
    eta = 1e-12 * max(x.shape.total_trace, 1.0)
    lhs = pz(tt + ss + eta)
    rhs = px(tt) + py(ss)
    return float(max(0.0, np.max(lhs - rhs)))


def random_block_unitary(shape, rng) -> BlockOperator:
    return BlockOperator(shape, tuple(random_unitary(d, rng) for d in shape.dims))


def unitary_invariance_violation(x: BlockOperator, u: BlockOperator, v: BlockOperator) -> float:
    px, pz = x.profile, (u @ x @ v).profile
    t = _midpoints(px, pz)
    return float(np.max(np.abs(px(t) - pz(t))))


def convexity_integral_violation(phi: OrliczFunction, x: BlockOperator, y: BlockOperator, a: float) -> float:
    """``int phi(a mu(x) + (1-a) mu(y)) - a rho(x) - (1-a) rho(y)``, positive part."""
    px, py = x.profile, y.profile
    left, length = _union_steps(px, py)
    lhs = float(np.sum(length * phi(a * px(left) + (1.0 - a) * py(left))))
    rhs = a * modular(phi, px) + (1.0 - a) * modular(phi, py)
    return max(0.0, lhs - rhs)


def convexity_majorization_violation(phi: OrliczFunction, x: BlockOperator, y: BlockOperator, a: float) -> float:
    """``rho(a x + (1-a) y) - int phi(a mu(x) + (1-a) mu(y))``, positive part."""
    px, py = x.profile, y.profile
    left, length = _union_steps(px, py)
    upper = float(np.sum(length * phi(a * px(left) + (1.0 - a) * py(left))))
    return max(0.0, modular(phi, a * x + (1.0 - a) * y) - upper)


def direct_modular(phi: OrliczFunction, x: BlockOperator) -> float:
    """``sum_k c_k Tr phi(|x_k|)`` from the Hermitian dilation ``[[0, x_k], [x_k*, 0]]``.

    The dilation has eigenvalues ``+-sigma_i``, so no square root of ``x* x`` is needed.
    """
    total = 0.0
    for c, b in zip(x.shape.weights, x.blocks):
        n = b.shape[0]
        dil = np.zeros((2 * n, 2 * n), dtype=complex)
        dil[:n, n:] = b
        dil[n:, :n] = b.conj().T
        lam = np.linalg.eigvalsh(dil)
        total += c * 0.5 * float(np.sum(phi(np.abs(lam))))
    return total


def trace_formula_error(phi: OrliczFunction, x: BlockOperator) -> float:
    """Relative gap between the profile sum and :func:`direct_modular`."""
    direct = direct_modular(phi, x)
    return abs(modular(phi, x) - direct) / max(1.0, abs(direct))


def scaling_violation(x: BlockOperator, alpha: complex) -> float:
    px, pz = x.profile, (alpha * x).profile
    t = _midpoints(px, pz)
    return float(np.max(np.abs(pz(t) - abs(alpha) * px(t))))


def monotonicity_violation(x: BlockOperator, y: BlockOperator) -> float:
    """For ``0 <= x <= y``: ``max(mu_t(x) - mu_t(y))``, positive part."""
    px, py = x.profile, y.profile
    t = _midpoints(px, py)
    return float(max(0.0, np.max(px(t) - py(t))))


def galois_violation(x: BlockOperator) -> float:
    """``d(mu_t) <= t`` and ``mu_{d(s)} <= s`` on step endpoints and midpoints."""
    p = x.profile
    if not len(p):
        return 0.0
    ts = np.concatenate([_left_ends(p), _midpoints(p)])
    v1 = max(p.distribution(p(t)) - t for t in ts)
    ss = np.concatenate([p.levels, 0.5 * (p.levels[:-1] + p.levels[1:]), [0.5 * p.levels[-1]]])
    v2 = max(p(p.distribution(s)) - s for s in ss)
    return float(max(0.0, v1, v2))


@dataclass
class BatteryReport:
    trials: int
    seed: int
    max_violation: dict[str, float] = field(default_factory=dict)
    worst_trial: dict[str, int] = field(default_factory=dict)

    def passed(self, tol: float = 1e-9) -> bool:
        return all(v <= tol for v in self.max_violation.values())

    def rows(self) -> list[tuple[str, float, int]]:
        return [(k, self.max_violation[k], self.worst_trial[k]) for k in CHECKS]


def fack_kosaki_suite(trials: int = 1000, seed: int = 0, phis=DEFAULT_PHIS, max_blocks: int = 4,
                      max_dim: int = 4) -> BatteryReport:
    """Run every check of :data:`CHECKS` on ``trials`` independent random pairs.

    Trial ``i`` draws from ``spawn_rng(seed, i)`` only, so reports do not
    depend on evaluation order.
    """
    rep = BatteryReport(trials, seed, {k: 0.0 for k in CHECKS}, {k: -1 for k in CHECKS})

    def note(name, value, i):
        if value > rep.max_violation[name] or rep.worst_trial[name] < 0:
            rep.max_violation[name] = max(value, rep.max_violation[name])
            rep.worst_trial[name] = i

    for i in range(trials):
        rng = spawn_rng(seed, i)
        shape = random_shape(rng, max_blocks=max_blocks, max_dim=max_dim)
        x = _normalized(random_operator(shape, "gaussian", rng))
        y = _normalized(random_operator(shape, "gaussian", rng))
        a = float(rng.uniform())
        phi = phis[i % len(phis)]
        note("subadditivity", subadditivity_violation(x, y), i)
        u, v = random_block_unitary(shape, rng), random_block_unitary(shape, rng)
        note("unitary_invariance", unitary_invariance_violation(x, u, v), i)
        note("convexity_integral", convexity_integral_violation(phi, x, y, a), i)
        note("convexity_majorization", convexity_majorization_violation(phi, x, y, a), i)
        note("trace_formula", trace_formula_error(phi, x), i)
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        note("scaling", scaling_violation(x, alpha), i)
        lo = _normalized(random_operator(shape, "wishart", rng))
        hi = lo + float(rng.uniform()) * _normalized(random_operator(shape, "wishart", rng))
        note("monotonicity", monotonicity_violation(lo, hi), i)
        note("distribution_galois", galois_violation(x), i)
    return rep
