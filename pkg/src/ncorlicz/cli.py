"""Command-line entry point: ``ncorlicz <subcommand> ...``.

Exit status: 0 on success or a PASS / NEGATIVE_CONTROL verdict, 2 on a FAIL
verdict, 1 on usage, input or numerical errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import harness
from .errors import OrliczError
from .formats import fmt, load_operator, parse_phi, write_csv, write_records, RunConfig
from .norms import amemiya_norm, luxemburg_norm, orlicz_norm_sup, p_norm, NormReport
from .orlicz import conjugate, delta2_probe

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _clean(v):
    """JSON-safe copy: non-finite floats become strings, arrays become lists."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "tolist"):
        return _clean(v.tolist())
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _emit(doc) -> None:
    print(json.dumps(_clean(doc), indent=2, allow_nan=False))


def _grid(text: str) -> tuple[float, float, int]:
    try:
        lo, hi, count = text.split(",")
        return float(lo), float(hi), int(count)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("grid must be lo,hi,count") from exc


def cmd_svf(args) -> int:
    prof = load_operator(args.operator).profile
    print("level,width")
    for level, width in prof.steps:
        print(f"{fmt(level)},{fmt(width)}")
    return EXIT_OK


def cmd_norm(args) -> int:
    x = load_operator(args.operator)
    phi = None if args.method.startswith("p:") else parse_phi(args.phi)
    if args.method == "luxemburg":
        rep = luxemburg_norm(phi, x, args.tol)
    elif args.method == "amemiya":
        rep = amemiya_norm(phi, x, args.tol)
    elif args.method == "orlicz_sup":
        rep = orlicz_norm_sup(phi, x, seed=args.seed)
    elif args.method.startswith("p:"):
        p = float(args.method[2:])
        rep = NormReport(p_norm(x, p), "pnorm", extra={"p": p})
    else:
        raise argparse.ArgumentTypeError(f"unknown method {args.method!r}")
    _emit(rep.to_dict())
    return EXIT_OK


def cmd_conjugate(args) -> int:
    psi = conjugate(parse_phi(args.phi), args.grid)
    print("u,psi")
    for u, v in psi.knots:
        print(f"{fmt(u)},{fmt(v)}")
    print(f"tab_error={fmt(psi.tab_error)}", file=sys.stderr)
    return EXIT_OK


def cmd_delta2(args) -> int:
    rep = delta2_probe(parse_phi(args.phi), args.grid, args.threshold)
    _emit(rep.to_dict())
    return EXIT_OK


def _verdict_exit(verdict: str) -> int:
    return EXIT_FAIL if verdict == harness.FAIL else EXIT_OK


def cmd_kk_run(args) -> int:
    cfg = RunConfig.load(args.config)
    phi, family = cfg.build()
    res = harness.run_kadec_klee(phi, family, cfg.eps, cfg.tol, cfg.delta, cfg.norm_tol)
    out = args.out or cfg.output
    write_records(res.records, out, len(cfg.eps))
    _emit({"verdict": res.verdict, "records": out, **res.details})
    return _verdict_exit(res.verdict)


def cmd_counterexample(args) -> int:
    inst = harness.build_counterexample(parse_phi(args.phi), args.K)
    cert = inst.certify(eps=args.eps)
    if args.out:
        cols = list(cert["rows"][0])
        write_csv(args.out, cols, ([r[c] for c in cols] for r in cert["rows"]))
    _emit({"instance": inst.to_dict(), "certificate": cert})
    return EXIT_OK


def cmd_suite(args) -> int:
    from .suite import run_suite

    summary = run_suite(args.seed, args.out, args.trials)
    for name, verdict, value in summary:
        print(f"{name},{verdict},{fmt(value)}")
    return EXIT_FAIL if any(v == harness.FAIL for _, v, _ in summary) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ncorlicz", description="Orlicz norms on finite block-matrix algebras.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("svf", help="print the singular value step profile as CSV (level,width)")
    p.add_argument("operator", help="operator JSON file")
    p.set_defaults(func=cmd_svf)

    p = sub.add_parser("norm", help="evaluate a norm of an operator")
    p.add_argument("operator")
    p.add_argument("--phi", default="power:2", help="power:<p>[:scale] | expm1 | powerlog:<p> | tab:<path>")
    p.add_argument("--method", default="luxemburg", help="luxemburg | amemiya | orlicz_sup | p:<p>")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--seed", type=int, default=0, help="witness seed for orlicz_sup")
    p.set_defaults(func=cmd_norm)

    p = sub.add_parser("conjugate", help="tabulate the complementary function as CSV (u,psi)")
    p.add_argument("--phi", required=True)
    p.add_argument("--grid", type=_grid, default=(1e-6, 1e6, 512), help="lo,hi,count")
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("delta2", help="probe the doubling condition")
    p.add_argument("--phi", required=True)
    p.add_argument("--grid", type=_grid, default=(1e-3, 1e3, 200), help="lo,hi,count")
    p.add_argument("--threshold", type=float, default=1e6)
    p.set_defaults(func=cmd_delta2)

    p = sub.add_parser("kk-run", help="run a Kadec-Klee experiment from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="record CSV path (overrides the config)")
    p.set_defaults(func=cmd_kk_run)

    p = sub.add_parser("counterexample", help="build and certify the spike counterexample")
    p.add_argument("--phi", default="expm1")
    p.add_argument("-K", type=int, default=12)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--out", help="optional certificate CSV")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("suite", help="run the seeded property battery and write CSV files")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="suite_out")
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_suite)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (OrliczError, ValueError, ArithmeticError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"ncorlicz {args.command}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
