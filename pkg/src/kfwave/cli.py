"""Batch command-line front end.

Subcommands: ``exponents``, ``spectrum``, ``propagator``, ``resolvent``,
``simulate``, ``hoelder``, ``intermittency``, ``figures``.  Each takes a TOML
run config, honors ``--seed`` / ``--out`` / ``--dry-run`` overrides and writes
deterministic CSV/JSON artifacts (same config and seed give byte-identical
files).  Exit codes: 0 success, 1 numerical failure, 2 config error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config, require_task_keys
from .measure import (
    Boundary,
    IfsError,
    IfsSpec,
    compute_exponents,
    discrete_measure,
    solve_dimension,
    solve_spectral_exponent,
    validate_ifs,
)
from .output import csv_meta, write_csv, write_json
from .regularity import (
    estimate_spatial_hoelder,
    estimate_temporal_hoelder,
    lyapunov_estimate,
    predicted_exponents,
    spatial_pairs,
    temporal_exponent_base,
    temporal_probe_times,
)
from .spde import (
    DriftSpec,
    InitialData,
    NoisePlan,
    moment_estimator,
    project_initial_data,
    simulate_paths,
)
from .spectral import (
    PropagatorEvaluator,
    propagator_grid,
    resolvent_grid,
    solve_eigensystem,
    supnorm_growth_check,
)

_NUMERICAL_ERRORS = (RuntimeError, ValueError, ArithmeticError)


def _eigen(cfg: RunConfig):
    dm = discrete_measure(cfg.ifs, cfg.level)
    return solve_eigensystem(dm)


def _drift_from_task(task: dict) -> DriftSpec:
    block = task.get("drift", {"kind": "constant", "value": 1.0})
    if not isinstance(block, dict):
        raise ConfigError("[task.drift] must be a table")
    allowed = {"kind", "value", "lambda", "bound", "lipschitz"}
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown [task.drift] keys: {sorted(unknown)}")
    kind = block.get("kind", "constant")
    try:
        if kind == "constant":
            return DriftSpec.constant(float(block.get("value", 1.0)))
        if kind == "linear":
            return DriftSpec.linear(float(block.get("lambda", 1.0)))
        if kind == "clipped":
            return DriftSpec.clipped(float(block.get("lambda", 1.0)),
                                     float(block.get("bound", 1.0)))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad drift parameters: {exc}") from None
    raise ConfigError(f"unknown drift kind {kind!r}")


def _initial_from_task(task: dict, eigen) -> InitialData:
    choice = {"u0": task.get("u0", "zero"), "u1": task.get("u1", "zero")}
    fns = {}
    for key, val in choice.items():
        if val == "zero":
            fns[key] = lambda x: np.zeros_like(x)
        elif val == "one":
            fns[key] = lambda x: np.ones_like(x)
        else:
            raise ConfigError(f"[task] {key} must be 'zero' or 'one'")
    return project_initial_data(fns["u0"], fns["u1"], eigen)


def _grid_times(cfg: RunConfig, values) -> list[float]:
    out = []
    for t in values:
        j = int(round(float(t) / cfg.dt))
        out.append(round(j * cfg.dt, 12))
    return sorted(set(out))


def cmd_exponents(cfg: RunConfig, out: Path, dry: bool) -> None:
    require_task_keys(cfg.task, set(), "exponents")
    if dry:
        return
    exps = compute_exponents(cfg.ifs)
    d_resid = abs(sum(r ** exps.d_h for r in cfg.ifs.ratios) - 1.0)
    g_resid = abs(sum((m * r) ** exps.gamma for m, r in
                      zip(cfg.ifs.weights, cfg.ifs.ratios)) - 1.0)
    write_json(out / "exponents.json", {
        "d_h": exps.d_h,
        "gamma": exps.gamma,
        "delta": exps.delta,
        "nu_min": exps.nu_min,
        "r_max": exps.r_max,
        "r_min": exps.r_min,
        "hypothesis_i_satisfied": exps.hypothesis_i_satisfied,
        "residual_dimension": d_resid,
        "residual_gamma": g_resid,
        "config": cfg.digest,
    })


def cmd_spectrum(cfg: RunConfig, out: Path, dry: bool) -> None:
    require_task_keys(cfg.task, {"k_max"}, "spectrum")
    if dry:
        return
    eigen = _eigen(cfg)
    exps = compute_exponents(cfg.ifs)
    k_max = int(cfg.task.get("k_max", eigen.k_count))
    k_max = min(k_max, eigen.k_count)
    lam = eigen.eigenvalues[:k_max]
    sup = np.max(np.abs(eigen.vectors[:, :k_max]), axis=0)
    expo = 0.5 * exps.gamma * exps.delta
    ratio = np.full_like(lam, np.nan)
    pos = lam > 0
    ratio[pos] = sup[pos] / lam[pos] ** expo
    write_csv(out / "spectrum.csv",
              [("k", list(range(1, k_max + 1))),
               ("lambda", lam),
               ("supnorm", sup),
               ("lambda_times_gamma_delta_over_2_ratio", ratio)],
              csv_meta("spectrum", cfg.digest))


def cmd_propagator(cfg: RunConfig, out: Path, dry: bool) -> None:
    require_task_keys(cfg.task, {"t", "grid", "k_trunc"}, "propagator")
    t = float(cfg.task.get("t", 0.5))
    grid = int(cfg.task.get("grid", 33))
    if t < 0 or grid < 2:
        raise ConfigError("propagator needs t >= 0 and grid >= 2")
    if dry:
        return
    eigen = _eigen(cfg)
    pe = PropagatorEvaluator(eigen, cfg.task.get("k_trunc"))
    xs = np.linspace(0.0, 1.0, grid)
    vals = propagator_grid(pe, t, xs, xs)
    xcol, ycol, vcol = [], [], []
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            xcol.append(x)
            ycol.append(y)
            vcol.append(vals[i, j])
    write_csv(out / "propagator.csv",
              [("x", xcol), ("y", ycol), ("value", vcol)],
              csv_meta("propagator", cfg.digest) + [f"t {t!r}"])


def cmd_resolvent(cfg: RunConfig, out: Path, dry: bool) -> None:
    require_task_keys(cfg.task, {"lambda", "grid"}, "resolvent")
    lam = float(cfg.task.get("lambda", 1.0))
    grid = int(cfg.task.get("grid", 33))
    if lam <= 0 or grid < 2:
        raise ConfigError("resolvent needs lambda > 0 and grid >= 2")
    if dry:
        return
    eigen = _eigen(cfg)
    xs = np.linspace(0.0, 1.0, grid)
    vals = resolvent_grid(eigen, lam, xs, xs)
    xcol, ycol, vcol = [], [], []
    for i, x in enumerate(xs):
        for j, y in enumerate(xs):
            xcol.append(x)
            ycol.append(y)
            vcol.append(vals[i, j])
    write_csv(out / "resolvent.csv",
              [("x", xcol), ("y", ycol), ("value", vcol)],
              csv_meta("resolvent", cfg.digest) + [f"lambda {lam!r}"])


def cmd_simulate(cfg: RunConfig, out: Path, dry: bool) -> None:
    require_task_keys(
        cfg.task,
        {"drift", "u0", "u1", "sites", "times", "output", "moments"},
        "simulate")
    drift = _drift_from_task(cfg.task)
    style = cfg.task.get("output", "summary")
    if style not in ("summary", "paths"):
        raise ConfigError("output must be 'summary' or 'paths'")
    moments = [int(q) for q in cfg.task.get("moments", [2])]
    if dry:
        return
    eigen = _eigen(cfg)
    init = _initial_from_task(cfg.task, eigen)
    if "sites" in cfg.task:
        sites = [float(x) for x in cfg.task["sites"]]
    else:
        atoms = eigen.dm.positions
        sites = list(atoms[np.linspace(0, len(atoms) - 1, 9).astype(int)])
    times = _grid_times(cfg, cfg.task.get(
        "times", np.linspace(0.0, cfg.horizon, 11)))
    plan = NoisePlan.for_eigen(eigen, cfg.seed, cfg.paths, cfg.dt,
                               cfg.horizon)
    ens = simulate_paths(eigen, init, drift, plan, sites, times,
                         modes=cfg.modes)
    meta = csv_meta("simulate", cfg.digest) + [f"seed {cfg.seed}"]
    if style == "paths":
        pcol, tcol, xcol, ucol = [], [], [], []
        for p in range(ens.n_paths):
            for i, t in enumerate(ens.times):
                for j, x in enumerate(ens.sites):
                    pcol.append(p)
                    tcol.append(t)
                    xcol.append(x)
                    ucol.append(ens.values[p, i, j])
        write_csv(out / "ensemble.csv",
                  [("path_id", pcol), ("t", tcol), ("x", xcol), ("u", ucol)],
                  meta)
    else:
        tcol, xcol, mcol, vcol = [], [], [], []
        qcols = {q: [] for q in moments}
        for i, t in enumerate(ens.times):
            for j, x in enumerate(ens.sites):
                sample = ens.values[:, i, j]
                tcol.append(t)
                xcol.append(x)
                mcol.append(sample.mean())
                # Identical paths (noise-free runs) report exactly zero.
                spread = np.ptp(sample) > 0.0 and len(sample) > 1
                vcol.append(sample.var(ddof=1) if spread else 0.0)
                for q in moments:
                    est, _ = moment_estimator(ens, q, t, x)
                    qcols[q].append(est)
        cols = [("t", tcol), ("x", xcol), ("mean", mcol), ("var", vcol)]
        cols += [(f"m{q}", qcols[q]) for q in moments]
        write_csv(out / "ensemble.csv", cols, meta)


def cmd_hoelder(cfg: RunConfig, out: Path, dry: bool) -> None:
    require_task_keys(
        cfg.task,
        {"drift", "u0", "u1", "q", "direction", "t_check", "scales",
         "pairs_per_scale", "site", "base_times", "deltas"},
        "hoelder")
    drift = _drift_from_task(cfg.task)
    q = float(cfg.task.get("q", 2))
    direction = cfg.task.get("direction", "both")
    if direction not in ("space", "time", "both"):
        raise ConfigError("direction must be 'space', 'time' or 'both'")
    if dry:
        return
    eigen = _eigen(cfg)
    init = _initial_from_task(cfg.task, eigen)
    exps = compute_exponents(cfg.ifs)

    scales = [int(j) for j in cfg.task.get(
        "scales", range(2, min(7, cfg.level + 1)))]
    plan_sites = spatial_pairs(
        cfg.ifs, cfg.level, scales,
        int(cfg.task.get("pairs_per_scale", 16)))
    t_check = _grid_times(cfg, [cfg.task.get(
        "t_check", 0.75 * cfg.horizon)])[0]
    base_times = _grid_times(cfg, cfg.task.get(
        "base_times", [f * cfg.horizon for f in (0.5, 0.6, 0.7)]))
    deltas = [float(d) for d in cfg.task.get(
        "deltas", [cfg.dt * 2 ** j for j in range(1, 8)])]
    if "site" in cfg.task:
        site = float(cfg.task["site"])
    else:
        site = float(plan_sites.sites[
            np.argmin(np.abs(plan_sites.sites - 0.25))])

    sites = sorted(set(plan_sites.sites.tolist()) | {site})
    times = sorted(set([t_check])
                   | set(temporal_probe_times(base_times, deltas).tolist()))
    plan = NoisePlan.for_eigen(eigen, cfg.seed, cfg.paths, cfg.dt,
                               cfg.horizon)
    ens = simulate_paths(eigen, init, drift, plan, sites, times,
                         modes=cfg.modes)

    payload: dict = {
        "config": cfg.digest,
        "q": q,
        "predicted_spatial": 0.5,
        "predicted_temporal": temporal_exponent_base(exps),
    }
    if direction in ("space", "both"):
        rep = estimate_spatial_hoelder(ens, q, t_check, plan_sites,
                                       predicted=0.5)
        payload["spatial"] = rep.to_dict()
    if direction in ("time", "both"):
        rep = estimate_temporal_hoelder(
            ens, q, site, base_times, deltas,
            predicted=temporal_exponent_base(exps))
        payload["temporal"] = rep.to_dict()
    write_json(out / "hoelder.json", payload)


def cmd_intermittency(cfg: RunConfig, out: Path, dry: bool) -> None:
    require_task_keys(
        cfg.task,
        {"drift", "u0", "u1", "p_values", "window", "sites", "record_every"},
        "intermittency")
    task = dict(cfg.task)
    task.setdefault("drift", {"kind": "linear", "lambda": 5.0})
    task.setdefault("u0", "one")
    task.setdefault("u1", "one")
    drift = _drift_from_task(task)
    p_values = [float(p) for p in task.get("p_values", [2, 4, 6])]
    window = tuple(float(v) for v in task.get(
        "window", [cfg.horizon / 2, cfg.horizon]))
    if len(window) != 2 or not (0 <= window[0] < window[1] <= cfg.horizon):
        raise ConfigError("window must be [lo, hi] inside the horizon")
    if dry:
        return
    eigen = _eigen(cfg)
    init = _initial_from_task(task, eigen)
    atoms = eigen.dm.positions
    if "sites" in task:
        sites = [float(x) for x in task["sites"]]
    else:
        sites = [float(atoms[np.argmin(np.abs(atoms - 0.25))]),
                 float(atoms[np.argmin(np.abs(atoms - 0.75))])]
    every = int(task.get("record_every", 20))
    times = _grid_times(cfg, np.arange(0, cfg.horizon + cfg.dt / 2,
                                       every * cfg.dt))
    plan = NoisePlan.for_eigen(eigen, cfg.seed, cfg.paths, cfg.dt,
                               cfg.horizon)
    ens = simulate_paths(eigen, init, drift, plan, sites, times,
                         modes=cfg.modes)

    reports = []
    for x in sites:
        site_reports = {}
        for p in p_values:
            site_reports[f"p{p:g}"] = lyapunov_estimate(
                ens, p, x, window).to_dict()
        base = site_reports.get("p2")
        envelope = {}
        if base is not None and base["rate_over_p_squared"] > 0:
            for key, rep in site_reports.items():
                envelope[key] = rep["rate_over_p_squared"] / \
                    base["rate_over_p_squared"]
        reports.append({"site": x, "reports": site_reports,
                        "envelope_vs_p2": envelope})
    write_json(out / "intermittency.json",
               {"config": cfg.digest, "window": list(window),
                "drift": drift.describe(), "sites": reports})


def cmd_figures(cfg: RunConfig, out: Path, dry: bool) -> None:
    require_task_keys(
        cfg.task,
        {"fig1_points", "fig1_dh_min", "fig1_dh_max",
         "fig2_points", "fig2_mu_min", "fig2_mu_max"},
        "figures")
    n1 = int(cfg.task.get("fig1_points", 25))
    d_lo = float(cfg.task.get("fig1_dh_min", 0.2))
    d_hi = float(cfg.task.get("fig1_dh_max", 1.0))
    n2 = int(cfg.task.get("fig2_points", 32))
    m_lo = float(cfg.task.get("fig2_mu_min", 0.19))
    m_hi = float(cfg.task.get("fig2_mu_max", 0.5))
    if not (0 < d_lo < d_hi <= 1) or not (0.18 < m_lo < m_hi <= 0.5):
        raise ConfigError("figure sweep ranges out of bounds")
    if dry:
        return

    # Natural-measure family: two maps of equal ratio r, weights 1/2;
    # d_H = log 2 / log(1/r) sweeps as r does.
    d_col, s_col, t_col = [], [], []
    for d in np.linspace(d_lo, d_hi, n1):
        r = 0.5 ** (1.0 / d)
        spec = validate_ifs(IfsSpec((r, r), (0.0, 1.0 - r), (0.5, 0.5)))
        exps = compute_exponents(spec)
        spatial, temporal = predicted_exponents(exps, math.inf)
        d_col.append(exps.d_h)
        s_col.append(spatial)
        t_col.append(temporal)
    write_csv(out / "fig1_exponents.csv",
              [("d_h", d_col), ("spatial", s_col), ("temporal", t_col)],
              csv_meta("figures", cfg.digest))

    # Middle-thirds set with weights (mu, 1 - mu); rows only where the
    # propagator-bound condition delta + 1 < 1/gamma holds (mu_min > 0.18).
    m_col, te_col = [], []
    for m in np.linspace(m_lo, m_hi, n2):
        spec = validate_ifs(IfsSpec((1 / 3, 1 / 3), (0.0, 2 / 3),
                                    (m, 1.0 - m)))
        exps = compute_exponents(spec)
        if not exps.hypothesis_i_satisfied:
            continue
        m_col.append(min(m, 1.0 - m))
        te_col.append(predicted_exponents(exps, math.inf)[1])
    write_csv(out / "fig2_cantor_weights.csv",
              [("mu_min", m_col), ("temporal_exponent", te_col)],
              csv_meta("figures", cfg.digest))


_COMMANDS = {
    "exponents": cmd_exponents,
    "spectrum": cmd_spectrum,
    "propagator": cmd_propagator,
    "resolvent": cmd_resolvent,
    "simulate": cmd_simulate,
    "hoelder": cmd_hoelder,
    "intermittency": cmd_intermittency,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kfwave",
        description="Fractal string spectra and stochastic wave equations")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", help="TOML run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="override [numerics] seed")
        p.add_argument("--out", default=None,
                       help="override output directory")
        p.add_argument("--dry-run", action="store_true",
                       help="validate the config without computing")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed_override=args.seed,
                          out_override=args.out)
        out = cfg.output_dir
        _COMMANDS[args.command](cfg, out, args.dry_run)
    except (ConfigError, IfsError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    if args.dry_run:
        print(f"config OK ({cfg.digest})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
