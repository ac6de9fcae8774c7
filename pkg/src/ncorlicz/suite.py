"""Seeded end-to-end property run that writes plot-ready CSV files.

Every number written depends only on ``seed`` and ``trials``; repeated runs
produce byte-identical files.
"""
from __future__ import annotations

from pathlib import Path

from . import harness
from .battery import fack_kosaki_suite
from .families import SequenceFamily
from .formats import write_csv, write_records
from .operators import BlockOperator, random_operator, random_shape, spawn_rng
from .orlicz import ExpMinusOne, Power

COUNTEREXAMPLE_COLUMNS = ("n", "u", "t", "gauge", "diff_norm", "diff_formula", "lower_bound",
                          "doubled_lower_bound", "norm_gap", "modular_gap")


def run_suite(seed: int = 42, out_dir=".", trials: int = 200) -> list[tuple[str, str, float]]:
    """Write ``fack_kosaki.csv``, ``kk_spike.csv``, ``kk_noise.csv``, ``counterexample.csv`` and ``summary.csv``.

    Returns the summary rows ``(check, verdict, headline number)``.
    """
    out = Path(out_dir)
    summary = []

    fk = fack_kosaki_suite(trials, seed)
    write_csv(out / "fack_kosaki.csv", ("check", "max_violation", "worst_trial"), fk.rows())
    summary.append(("fack_kosaki", harness.PASS if fk.passed() else harness.FAIL,
                    max(fk.max_violation.values())))

    base = BlockOperator.atomic([1.0, 1.0])
    spike = SequenceFamily("spike", base, 128, seed, params={"trace_exponent": 4.0})
    kk = harness.run_kadec_klee(Power(2.0), spike, tol=1e-3)
    write_records(kk.records, out / "kk_spike.csv")
    summary.append(("kadec_klee_spike_power2", kk.verdict, kk.details["tail_diff_max"]))

    rng = spawn_rng(seed, 1)
    noisy = random_operator(random_shape(rng, max_blocks=3, max_dim=4), "gaussian", rng)
    noise = SequenceFamily("shrinking_noise", noisy, 32, seed, params={"rate": 2.0})
    kk2 = harness.run_kadec_klee(ExpMinusOne(), noise)
    write_records(kk2.records, out / "kk_noise.csv")
    summary.append(("kadec_klee_noise_expm1", kk2.verdict, kk2.details["tail_diff_max"]))

    inst = harness.build_counterexample(ExpMinusOne(), 12)
    cert = inst.certify()
    write_csv(out / "counterexample.csv", COUNTEREXAMPLE_COLUMNS,
              ([r[c] for c in COUNTEREXAMPLE_COLUMNS] for r in cert["rows"]))
    ok = all(r["diff_norm"] >= r["lower_bound"] - 1e-6 for r in cert["rows"][3:])
    summary.append(("counterexample_expm1", harness.PASS if ok else harness.FAIL,
                    min(r["diff_norm"] for r in cert["rows"][3:])))

    for kind in ("LLUM", "ULUM"):
        res = harness.check_monotonicity(Power(2.0), kind, trials=10, seed=seed)
        summary.append((kind.lower(), res.verdict, res.details["worst_tail_diff"]))
    oc = harness.check_order_continuity(Power(2.0), trials=10, seed=seed)
    summary.append(("order_continuity", oc.verdict, oc.details["worst_tail"]))

    write_csv(out / "summary.csv", ("check", "verdict", "value"), summary)
    return summary
