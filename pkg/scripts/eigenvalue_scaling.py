#!/usr/bin/env python3
"""Convergence of the eigenvalue counting exponent across refinement levels.

For a chosen measure, solves the string eigenproblem at several atom levels,
fits the log-log slope of lambda_k against k and compares it with 1/gamma.
Writes one CSV row per level and prints a small table.
"""

import argparse

import numpy as np

from kfwave.measure import (Boundary, cantor_spec, compute_exponents,
                            discrete_measure, lebesgue_spec)
from kfwave.output import write_csv
from kfwave.spectral import solve_eigensystem

MEASURES = {"cantor": cantor_spec, "lebesgue": lebesgue_spec}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--measure", choices=sorted(MEASURES), default="cantor")
    ap.add_argument("--boundary", choices=["neumann", "dirichlet"],
                    default="dirichlet")
    ap.add_argument("--levels", type=int, nargs="+",
                    default=[5, 6, 7, 8, 9])
    ap.add_argument("--fit-lo", type=int, default=10)
    ap.add_argument("--out", default="eigenvalue_scaling.csv")
    args = ap.parse_args()

    spec = MEASURES[args.measure](boundary=Boundary(args.boundary))
    exps = compute_exponents(spec)
    target = 1.0 / exps.gamma
    rows = []
    print(f"{args.measure} ({args.boundary}): 1/gamma = {target:.4f}")
    for level in args.levels:
        eigen = solve_eigensystem(discrete_measure(spec, level))
        hi = min(int(0.6 * eigen.k_count), 150)
        if hi <= args.fit_lo + 5:
            print(f"  level {level}: too few modes, skipped")
            continue
        k = np.arange(1, eigen.k_count + 1)
        sel = slice(args.fit_lo - 1, hi)
        slope = float(np.polyfit(np.log(k[sel]),
                                 np.log(eigen.eigenvalues[sel]), 1)[0])
        ratio = eigen.eigenvalues[sel] / k[sel] ** target
        band = float(ratio.max() / ratio.min())
        rows.append((level, eigen.k_count, slope, slope / target, band))
        print(f"  level {level}: slope {slope:.4f} "
              f"({100 * slope / target:.1f}% of target), band {band:.2f}")
    write_csv(args.out,
              [("level", [r[0] for r in rows]),
               ("k_count", [r[1] for r in rows]),
               ("slope", [r[2] for r in rows]),
               ("slope_over_target", [r[3] for r in rows]),
               ("ratio_band", [r[4] for r in rows])],
              [f"eigenvalue scaling, measure {args.measure}, "
               f"boundary {args.boundary}", f"target {target!r}"])
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
