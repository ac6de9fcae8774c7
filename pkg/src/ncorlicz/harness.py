"""Executable checks of the Kadec-Klee, modular, monotonicity and duality statements.

Limits along finite sequences are judged on tails: the last ``ceil(N/4)``
entries must sit below the tolerance and be non-increasing up to 10% slack.
Verdicts are ``PASS``, ``FAIL`` or ``NEGATIVE_CONTROL``; the last one marks
runs whose hypotheses do not hold (for instance ``phi`` outside Delta_2), so
they never count against the statement being tested.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AmplitudeRuleViolation, FamilyGenerationFailure, ProbeOnBreakpoint
from .families import SequenceFamily
from .norms import DEFAULT_TOL, amemiya_norm, dual_pairing_sup, luxemburg_norm, modular, p_norm
from .operators import BlockOperator, measure_gauge, random_operator, random_shape, spawn_rng
from .orlicz import OrliczFunction, Power, delta2_probe

PASS, FAIL, NEGATIVE = "PASS", "FAIL", "NEGATIVE_CONTROL"
TAIL_SLACK = 0.10


def tail(values: Sequence[float]) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return v[len(v) - math.ceil(len(v) / 4):]


def tail_converged(values: Sequence[float], tol: float, slack: float = TAIL_SLACK) -> bool:
    """Tail below ``tol`` and non-increasing within ``slack`` (relative)."""
    t = tail(values)
    if not np.all(np.isfinite(t)) or np.any(t > tol):
        return False
    floor = 1e-3 * tol
    return bool(np.all(t[1:] <= (1.0 + slack) * t[:-1] + floor))


def in_delta2(phi: OrliczFunction) -> bool:
    hint = phi.delta2_hint
    if hint.status == "holds":
        return True
    if hint.status == "fails":
        return False
    return delta2_probe(phi).verdict == "Holds"


def delta2_constant(phi: OrliczFunction) -> float:
    hint = phi.delta2_hint
    if hint.status == "holds" and hint.k is not None:
        return hint.k
    return delta2_probe(phi).k_estimate


@dataclass
class ExperimentRecord:
    n: int
    luxemburg: float
    modular: float
    diff_norm: float
    gauges: tuple[float, ...]
    verdict: str = "ok"

    def row(self) -> list:
        return [self.n, self.luxemburg, self.modular, self.diff_norm, *self.gauges, self.verdict]


@dataclass
class CheckResult:
    verdict: str
    details: dict = field(default_factory=dict)
    records: list[ExperimentRecord] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS


# -- Kadec-Klee ---------------------------------------------------------------

def run_kadec_klee(phi: OrliczFunction, family: SequenceFamily, eps_list: Sequence[float] = (0.1, 1.0),
                   tol: float = 5e-2, delta: float = 1e-2, norm_tol: float = DEFAULT_TOL) -> CheckResult:
    """Norm convergence versus (norm convergence of ``||x_n||`` + convergence in measure).

    Direction (1) => (2) is checked record by record through sharp bounds that
    hold for every Orlicz function: ``| ||x_n|| - ||x|| | <= ||x_n - x||``
    and the Chebyshev bound ``gauge_eps <= 1/phi(eps/||x_n - x||)``.
    Direction (2) => (1) is judged on tails: when norm gaps and gauges sit
    below ``delta`` the tail of ``||x_n - x||`` must converge below ``tol``.
    """
    records, gaps = [], []
    violations = 0
    ref_norm = None
    for n, xn, x in family.terms(phi):
        if ref_norm is None:
            ref_norm = luxemburg_norm(phi, x, norm_tol).value
        nn = luxemburg_norm(phi, xn, norm_tol).value
        diff = luxemburg_norm(phi, xn - x, norm_tol).value
        gauges = tuple(measure_gauge(xn, x, e) for e in eps_list)
        flags = []
        gap = abs(nn - ref_norm)
        if gap > diff * (1.0 + 1e-8) + 1e-12 * max(1.0, ref_norm):
            flags.append("triangle")
        for e, g in zip(eps_list, gauges):
            bound = 0.0 if diff == 0 else (1.0 + 1e-8) / float(phi(e / diff))
            if g > bound + 1e-12:
                flags.append(f"chebyshev@{e:g}")
        violations += bool(flags)
        records.append(ExperimentRecord(n, nn, modular(phi, xn), diff, gauges, ";".join(flags) or "ok"))
        gaps.append(gap)

    diffs = [r.diff_norm for r in records]
    gauge_cols = [[r.gauges[i] for r in records] for i in range(len(eps_list))]
    hyp2 = bool(np.all(tail(gaps) <= delta)) and all(np.all(tail(c) <= delta) for c in gauge_cols)
    concl1 = tail_converged(diffs, tol)
    d2 = in_delta2(phi)
    if violations:
        verdict = FAIL
    elif hyp2 and not concl1:
        verdict = FAIL if d2 else NEGATIVE
    elif hyp2 or concl1:
        verdict = PASS
    else:
        verdict = NEGATIVE
    details = {
        "reference_norm": ref_norm,
        "delta2": d2,
        "hypothesis_2": hyp2,
        "conclusion_1": concl1,
        "record_violations": violations,
        "tail_diff_max": float(np.max(tail(diffs))),
        "tail_gap_max": float(np.max(tail(gaps))),
    }
    return CheckResult(verdict, details, records)


# -- counterexample outside Delta_2 ------------------------------------------------

@dataclass
class CounterexampleInstance:
    """Orthogonal spikes ``x = sum_k u_k e_k`` with ``phi(u_k) tau(e_k) = 2^-k``."""

    phi: OrliczFunction
    amplitudes: np.ndarray
    traces: np.ndarray
    x: BlockOperator
    construction_ratios: np.ndarray  # phi((1+1/k) u_k) / (2^k phi(u_k)), all > 1

    @property
    def K(self) -> int:
        return int(self.amplitudes.size)

    def projection(self, k: int) -> BlockOperator:
        vals = np.zeros(self.K)
        vals[k - 1] = 1.0
        return BlockOperator.atomic(vals, self.traces)

    def term(self, n: int) -> BlockOperator:
        return self.x - self.amplitudes[n - 1] * self.projection(n)

    def family(self) -> SequenceFamily:
        return SequenceFamily("explicit", self.x, self.K, params={"terms": [self.term(n) for n in range(1, self.K + 1)]})

    def certify(self, eps: float = 1.0, tol: float = DEFAULT_TOL) -> dict:
        x_norm = luxemburg_norm(self.phi, self.x, tol).value
        x_mod = modular(self.phi, self.x)
        rows = []
        for n in range(1, self.K + 1):
            xn = self.term(n)
            u, t = float(self.amplitudes[n - 1]), float(self.traces[n - 1])
            diff = luxemburg_norm(self.phi, self.x - xn, tol).value
            rows.append({
                "n": n,
                "u": u,
                "t": t,
                "gauge": measure_gauge(xn, self.x, eps),
                "diff_norm": diff,
                "diff_formula": u / float(self.phi.inverse(1.0 / t)),
                "lower_bound": n / (n + 1.0),
                "doubled_diff_norm": 2.0 * diff,
                "doubled_lower_bound": 2.0 * n / (n + 1.0),
                "norm_gap": abs(luxemburg_norm(self.phi, xn, tol).value - x_norm),
                "modular_gap": abs(x_mod - modular(self.phi, xn)),
            })
        return {"x_norm": x_norm, "x_modular": x_mod, "eps": eps, "rows": rows}

    def to_dict(self) -> dict:
        return {
            "phi": self.phi.to_dict(),
            "K": self.K,
            "amplitudes": self.amplitudes.tolist(),
            "traces": self.traces.tolist(),
            "construction_ratios": self.construction_ratios.tolist(),
        }


def build_counterexample(phi: OrliczFunction, K: int = 12,
                         amplitude_rule: Callable[[int], float] | None = None,
                         check_delta2: bool = True) -> CounterexampleInstance:
    """Spike construction showing that Kadec-Klee in measure fails outside Delta_2.

    Amplitudes ``u_k`` (default ``k**2``) must satisfy
    ``phi((1 + 1/k) u_k) > 2^k phi(u_k)``, verified at every ``k``; the
    projections live in ``K`` one-dimensional blocks with traces
    ``t_k = 2^-k / phi(u_k)``, so they are orthogonal by construction.
    """
    if K < 1:
        raise ValueError("K must be positive")
    if check_delta2 and delta2_probe(phi).verdict == "Holds":
        raise ValueError("the construction needs an Orlicz function outside Delta_2")
    rule = amplitude_rule or (lambda k: float(k * k))
    ks = np.arange(1, K + 1)
    u = np.array([float(rule(int(k))) for k in ks])
    phi_u = phi(u)
    ratios = phi((1.0 + 1.0 / ks) * u) / (2.0 ** ks * phi_u)
    bad = np.flatnonzero(~(ratios > 1.0))
    if bad.size:
        k = int(ks[bad[0]])
        raise AmplitudeRuleViolation(f"phi((1+1/k)u_k) > 2^k phi(u_k) fails at k={k}")
    t = 2.0 ** (-ks.astype(float)) / phi_u
    if not np.all((t > 0) & np.isfinite(t)):
        raise AmplitudeRuleViolation("projection traces underflow; reduce K or the amplitudes")
    x = BlockOperator.atomic(u, t)
    return CounterexampleInstance(phi, u, t, x, ratios)


def counterexample_modular_control(inst: CounterexampleInstance, tol: float = DEFAULT_TOL) -> dict:
    """Modulars of ``x_n`` converge to that of ``x`` while ``||x - x_n||`` stays near 1."""
    cert = inst.certify(tol=tol)
    mod_gaps = [r["modular_gap"] for r in cert["rows"]]
    diffs = [r["diff_norm"] for r in cert["rows"]]
    return {
        "modular_gaps": mod_gaps,
        "diff_norms": diffs,
        "modular_converges": tail_converged(mod_gaps, 2.0 ** -(inst.K * 3 // 4)),
        "norm_difference_converges": tail_converged(diffs, 0.5),
    }


# -- Lemma: norm convergence iff modular convergence -------------------------------

def check_lemma21(phi: OrliczFunction, family: SequenceFamily, tol: float = 1e-2,
                  norm_tol: float = DEFAULT_TOL) -> CheckResult:
    """Co-convergence of ``||x_n||`` and ``tau(phi(|x_n|))``, after scaling ``x`` to the unit sphere.

    Record-level bridges: ``| ||y|| - 1 | <= |rho(y) - 1|`` and, with Delta_2
    constant ``k`` and ``||y|| in [1/2, 2]``,
    ``|rho(y) - 1| <= (k - 1) | ||y|| - 1 | / min(1, ||y||)``.
    Tail directions: modular tail ``<= tol`` implies norm tail ``<= tol``;
    norm tail ``<= tol`` implies modular tail ``<= (k-1) tol / (1 - tol)``.
    """
    k = delta2_constant(phi)
    d2 = in_delta2(phi)
    g, m, bridge = [], [], 0
    scale = None
    for n, xn, x in family.terms(phi):
        if scale is None:
            ref = luxemburg_norm(phi, x, norm_tol).value
            scale = ref if ref > 0 else 1.0
            ref_mod = modular(phi, x / scale)
            zero_ref = ref == 0
        y = xn / scale
        lam = luxemburg_norm(phi, y, norm_tol).value
        gn = abs(lam - (0.0 if zero_ref else 1.0))
        mn = abs(modular(phi, y) - ref_mod)
        if not zero_ref:
            if gn > mn + 1e-8:
                bridge += 1
            if 0.5 <= lam <= 2.0 and mn > (k - 1.0) * gn / min(1.0, lam) + 1e-8:
                bridge += 1
        g.append(gn)
        m.append(mn)
    tol_mod = (k - 1.0) * tol / (1.0 - tol)
    g_small = bool(np.all(tail(g) <= tol))
    m_small = bool(np.all(tail(m) <= tol))
    m_small_wide = bool(np.all(tail(m) <= tol_mod + 1e-12))
    forward = (not m_small) or g_small
    backward = (not g_small) or m_small_wide
    ok = forward and backward and bridge == 0
    verdict = (PASS if ok else FAIL) if d2 else NEGATIVE
    return CheckResult(verdict, {
        "delta2_constant": k,
        "norm_tail_max": float(np.max(tail(g))),
        "modular_tail_max": float(np.max(tail(m))),
        "converged": g_small and m_small_wide,
        "bridge_violations": bridge,
        "modular_tol": tol_mod,
    })


# -- Lemma: pointwise convergence of phi(mu_t) ------------------------------------

def check_lemma22(phi: OrliczFunction, family: SequenceFamily, t_probes: Sequence[float],
                  tol: float = 1e-2, gap_tol: float = 1e-6) -> CheckResult:
    """``phi(mu_t(x_n)) -> phi(mu_t(x))`` at continuity points ``t`` of ``mu(x)``.

    For PSD terms the functional-calculus form ``mu_t(phi(x_n))`` is reported
    alongside (it coincides with the first form for increasing ``phi``).
    """
    probes = np.asarray(t_probes, dtype=float)
    diffs = {float(t): [] for t in probes}
    alt_gap = 0.0
    checked = False
    for n, xn, x in family.terms(phi):
        if not checked:
            bps = np.concatenate([[0.0], x.profile.breakpoints]) if len(x.profile) else np.array([0.0])
            for t in probes:
                if t < 0 or (len(x.profile) and np.min(np.abs(bps[1:] - t)) < gap_tol):
                    raise ProbeOnBreakpoint(f"probe t={t} sits on a jump of mu(x)")
            ref = {float(t): float(phi(x.profile(t))) for t in probes}
            checked = True
        psd = xn.is_psd()
        for t in probes:
            val = float(phi(xn.profile(t)))
            diffs[float(t)].append(abs(val - ref[float(t)]))
            if psd:
                alt = xn.hermitian_calculus(lambda lam: phi(np.clip(lam, 0.0, None))).profile(t)
                alt_gap = max(alt_gap, abs(alt - val) / max(1.0, val))
    ok = all(tail_converged(v, tol) for v in diffs.values())
    verdict = PASS if ok else (FAIL if in_delta2(phi) else NEGATIVE)
    return CheckResult(verdict, {
        "tail_max": {t: float(np.max(tail(v))) for t, v in diffs.items()},
        "calculus_form_gap": alt_gap,
    })


# -- LLUM / ULUM and order continuity -------------------------------------------------

def monotone_family_verdict(phi: OrliczFunction, kind: str, family: SequenceFamily, tol: float = 1e-4,
                            delta: float = 1e-2, atol: float = 1e-10,
                            norm_tol: float = DEFAULT_TOL) -> CheckResult:
    """Sequential LLUM (``0 <= x_n <= x``) or ULUM (``x <= x_n``) on one family.

    Hypothesis: order relation at every ``n`` and norm gaps with tail below
    ``delta``.  Conclusion: ``||x_n - x||`` tail converges below ``tol``.
    """
    if kind not in ("LLUM", "ULUM"):
        raise ValueError("kind must be LLUM or ULUM")
    gaps, diffs = [], []
    ordered = True
    ref = None
    for n, xn, x in family.terms(phi):
        if ref is None:
            ref = luxemburg_norm(phi, x, norm_tol).value
        if kind == "LLUM":
            ordered &= xn.is_psd(atol) and (x - xn).is_psd(atol)
        else:
            ordered &= x.is_psd(atol) and (xn - x).is_psd(atol)
        gaps.append(abs(luxemburg_norm(phi, xn, norm_tol).value - ref))
        diffs.append(luxemburg_norm(phi, xn - x, norm_tol).value)
    if not ordered:
        raise FamilyGenerationFailure(f"family does not satisfy the {kind} order relation")
    hyp = bool(np.all(tail(gaps) <= delta))
    concl = tail_converged(diffs, tol)
    if not hyp:
        verdict = NEGATIVE
    elif concl:
        verdict = PASS
    else:
        verdict = FAIL if in_delta2(phi) else NEGATIVE
    return CheckResult(verdict, {"tail_gap_max": float(np.max(tail(gaps))),
                                 "tail_diff_max": float(np.max(tail(diffs))),
                                 "min_diff": float(np.min(diffs))})


def _random_psd(seed: int, i: int, max_blocks=3, max_dim=4) -> BlockOperator:
    rng = spawn_rng(seed, i)
    shape = random_shape(rng, max_blocks=max_blocks, max_dim=max_dim)
    return random_operator(shape, "wishart", rng)


def monotone_families(kind: str, trials: int, seed: int = 0, length: int = 64, rate: float = 4.0):
    """Commuting families for LLUM (``monotone_up``) or ULUM (``monotone_down``)."""
    modes = ("scale", "clip", "truncate") if kind == "LLUM" else ("scale", "shift", "wishart")
    fam_kind = "monotone_up" if kind == "LLUM" else "monotone_down"
    out = []
    for i in range(trials):
        x = _random_psd(seed, i)
        out.append(SequenceFamily(fam_kind, x, length, seed=seed + i,
                                  params={"mode": modes[i % 3], "rate": rate}))
    return out


def check_monotonicity(phi: OrliczFunction, kind: str = "LLUM", trials: int = 50, tol: float = 1e-4,
                       seed: int = 0, length: int = 64, rate: float = 4.0) -> CheckResult:
    results = [monotone_family_verdict(phi, kind, f, tol) for f in monotone_families(kind, trials, seed, length, rate)]
    verdicts = [r.verdict for r in results]
    verdict = PASS if all(v == PASS for v in verdicts) else (FAIL if FAIL in verdicts else NEGATIVE)
    return CheckResult(verdict, {
        "kind": kind,
        "trials": trials,
        "passed": verdicts.count(PASS),
        "worst_tail_diff": max(r.details["tail_diff_max"] for r in results),
    })


def order_continuity_verdict(phi: OrliczFunction, family: SequenceFamily, tol: float = 1e-4,
                             atol: float = 1e-10, norm_tol: float = DEFAULT_TOL) -> CheckResult:
    """``x_n`` decreasing to 0 in the PSD order forces ``||x_n||`` to decrease to 0."""
    norms = []
    prev = None
    for n, xn, x in family.terms(phi):
        if x.profile.sup != 0.0:
            raise FamilyGenerationFailure("order continuity needs a family decreasing to 0")
        if not xn.is_psd(atol) or (prev is not None and not (prev - xn).is_psd(atol)):
            raise FamilyGenerationFailure(f"family is not decreasing in the PSD order at n={n}")
        norms.append(luxemburg_norm(phi, xn, norm_tol).value)
        prev = xn
    monotone = all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(norms, norms[1:]))
    ok = monotone and tail_converged(norms, tol)
    return CheckResult(PASS if ok else FAIL, {"tail_max": float(np.max(tail(norms))), "monotone": monotone})


def check_order_continuity(phi: OrliczFunction, trials: int = 50, tol: float = 1e-4, seed: int = 0,
                           length: int = 64, rate: float = 4.0) -> CheckResult:
    modes = ("scale", "clip", "spectral")
    results = []
    for i in range(trials):
        src = _random_psd(seed + 7919, i)
        fam = SequenceFamily("vanishing", BlockOperator.zeros(src.shape), length, seed=seed + i,
                             params={"source": src, "mode": modes[i % 3], "rate": rate})
        results.append(order_continuity_verdict(phi, fam, tol))
    verdicts = [r.verdict for r in results]
    return CheckResult(PASS if all(v == PASS for v in verdicts) else FAIL, {
        "trials": trials,
        "passed": verdicts.count(PASS),
        "worst_tail": max(r.details["tail_max"] for r in results),
    })


# -- duality ----------------------------------------------------------------------------

def _is_diagonal(y: BlockOperator) -> bool:
    return all(np.count_nonzero(b - np.diag(np.diag(b))) == 0 for b in y.blocks)


def check_duality(phi: OrliczFunction, y: BlockOperator, psi: OrliczFunction | None = None,
                  witnesses: int = 16, seed: int = 0, tol: float = 1e-4) -> CheckResult:
    """Finite-dimensional check that ``sup{tau(|x y|) : ||x||_phi <= 1}`` is the Orlicz norm of ``y``.

    ``psi`` defaults to the exact conjugate of a power function.  The sup is
    compared with ``amemiya_norm(psi, y)``: equality within ``tol`` on
    diagonal ``y``, one-sided otherwise.  For ``phi = c u^p`` it is also
    compared with ``c^(-1/p) ||y||_q``.
    """
    if psi is None:
        if not isinstance(phi, Power):
            raise ValueError("psi is required unless phi is a power function")
        psi = phi.conjugate_exact()
    sup = dual_pairing_sup(phi, psi, y, witnesses, seed).value
    am = amemiya_norm(psi, y).value
    ok = sup <= am + tol
    if _is_diagonal(y):
        ok &= abs(sup - am) <= tol
    details = {"sup_pairing": sup, "amemiya_psi": am}
    if isinstance(phi, Power) and phi.p > 1:
        q = phi.p / (phi.p - 1.0)
        qn = phi.scale ** (-1.0 / phi.p) * p_norm(y, q)
        details["q_norm"] = qn
        ok &= abs(sup - qn) <= tol
    return CheckResult(PASS if ok else FAIL, details)
