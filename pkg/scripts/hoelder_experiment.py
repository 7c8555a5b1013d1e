#!/usr/bin/env python3
"""Moment-scaling Hölder estimates for the additive-noise wave equation.

Runs a Monte Carlo ensemble on the chosen measure, regresses the q-th moment
of spatial and temporal increments, and prints the fitted exponents next to
the predicted ones (1/2 in space, 1/(d_H + 1 + log(nu_min)/log(r_max)) in
time).  Useful for checking how the estimates tighten with path count.
"""

import argparse

import numpy as np

from kfwave.measure import (cantor_spec, compute_exponents, discrete_measure,
                            lebesgue_spec)
from kfwave.regularity import (estimate_spatial_hoelder,
                               estimate_temporal_hoelder, spatial_pairs,
                               temporal_exponent_base, temporal_probe_times)
from kfwave.spde import DriftSpec, NoisePlan, project_initial_data, \
    simulate_paths
from kfwave.spectral import solve_eigensystem

MEASURES = {"cantor": cantor_spec, "lebesgue": lebesgue_spec}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--measure", choices=sorted(MEASURES), default="cantor")
    ap.add_argument("--level", type=int, default=8)
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--q", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    spec = MEASURES[args.measure]()
    exps = compute_exponents(spec)
    eigen = solve_eigensystem(discrete_measure(spec, args.level))
    zero = lambda x: np.zeros_like(x)
    init = project_initial_data(zero, zero, eigen)

    plan_sites = spatial_pairs(spec, args.level,
                               range(2, min(7, args.level + 1)), 16)
    site = float(plan_sites.sites[np.argmin(np.abs(plan_sites.sites - 0.25))])
    base_times = (0.5, 0.6, 0.7)
    deltas = tuple(args.dt * 2 ** j for j in range(1, 8))
    t_check = 0.75
    times = sorted({t_check}
                   | set(temporal_probe_times(base_times, deltas).tolist()))

    plan = NoisePlan.for_eigen(eigen, args.seed, args.paths, args.dt, 1.0)
    ens = simulate_paths(eigen, init, DriftSpec.constant(1.0), plan,
                         plan_sites.sites, times)

    spat = estimate_spatial_hoelder(ens, args.q, t_check, plan_sites,
                                    predicted=0.5)
    temp = estimate_temporal_hoelder(ens, args.q, site, base_times, deltas,
                                     predicted=temporal_exponent_base(exps))
    print(f"{args.measure}, q={args.q:g}, {args.paths} paths")
    print(f"  spatial : slope/q = {spat.slope_over_q:.4f}  "
          f"(predicted {spat.predicted:.4f}, "
          f"CI/q [{spat.ci_low / args.q:.4f}, {spat.ci_high / args.q:.4f}])")
    print(f"  temporal: slope/q = {temp.slope_over_q:.4f}  "
          f"(predicted {temp.predicted:.4f}, "
          f"CI/q [{temp.ci_low / args.q:.4f}, {temp.ci_high / args.q:.4f}])")


if __name__ == "__main__":
    main()
