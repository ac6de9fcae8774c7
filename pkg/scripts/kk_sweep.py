"""Sweep Kadec-Klee verdicts over Orlicz functions and spike decay rates.

For each phi and trace exponent s the spike family x_n = x + n^(1/4) e_n with
tau(e_n) = n^-s is run; the table shows the verdict and the tail of
||x_n - x||.  Outside Delta_2 slow decay gives NEGATIVE_CONTROL rows.

    python scripts/kk_sweep.py --length 200 --out sweep.csv
"""
import argparse

from ncorlicz.families import SequenceFamily
from ncorlicz.formats import parse_phi, write_csv
from ncorlicz.harness import run_kadec_klee
from ncorlicz.operators import AlgebraShape, random_operator

PHIS = ("power:1.5", "power:2", "power:3", "powerlog:2", "expm1")
EXPONENTS = (0.5, 1.0, 2.0, 4.0, 6.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=128)
    ap.add_argument("--tol", type=float, default=5e-2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="optional CSV path")
    args = ap.parse_args()

    base = random_operator(AlgebraShape(((2, 1.0), (2, 0.5))), "diagonal_uniform", args.seed)
    rows = []
    for spec in PHIS:
        phi = parse_phi(spec)
        for s in EXPONENTS:
            fam = SequenceFamily("spike", base, args.length, params={"trace_exponent": s})
            res = run_kadec_klee(phi, fam, tol=args.tol)
            d = res.details
            rows.append((spec, s, res.verdict, d["tail_diff_max"], d["tail_gap_max"], d["record_violations"]))
            print(f"{spec:>11} s={s:<4g} {res.verdict:<17} tail diff {d['tail_diff_max']:.3e}  "
                  f"tail gap {d['tail_gap_max']:.3e}")
    if args.out:
        write_csv(args.out, ("phi", "trace_exponent", "verdict", "tail_diff_max", "tail_gap_max",
                             "record_violations"), rows)


if __name__ == "__main__":
    main()
