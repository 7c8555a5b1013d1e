"""Hölder exponents and moment Lyapunov exponents from path ensembles.

The mild solution of the noise-driven wave equation on a Cantor-like set is
essentially (1/2 - 1/q)-Hölder in space and
(1/(d_H + 1 + log(nu_min)/log(r_max)) - 1/q)-Hölder in time.  At desk scale
the pathwise moduli are statistically fragile, so "essentially alpha-Hölder"
is tested through the moment scaling the continuity estimates literally
bound:  E|u(t,x) - u(t,y)|^q ~ |x-y|^(q/2)  and
E|u(s,x) - u(t,x)|^q ~ |s-t|^(q * temporal base).  Regression slopes divided
by q estimate the base exponents.

Weak intermittency is quantified by the growth rate of log E|u(t,x)|^p over
a late-time window (finite-horizon stand-in for the limsup-in-t Lyapunov
exponent), with a p^2 envelope check across moment orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import zeta

from .measure import ExponentSet, IfsSpec, word_map
from .spde import PathEnsemble

__all__ = [
    "ThresholdError",
    "InsufficientScalesError",
    "InsufficientHorizonError",
    "predicted_exponents",
    "temporal_exponent_base",
    "exponent_inequality_check",
    "InequalityReport",
    "summation_bound_check",
    "SummationReport",
    "SitePairPlan",
    "spatial_pairs",
    "temporal_probe_times",
    "estimate_spatial_hoelder",
    "estimate_temporal_hoelder",
    "HoelderReport",
    "lyapunov_estimate",
    "LyapunovReport",
]


class ThresholdError(ValueError):
    """Moment order below the admissible threshold for an exponent formula."""


class InsufficientScalesError(ValueError):
    """Fewer separation scales available than a slope fit needs."""


class InsufficientHorizonError(ValueError):
    """The requested fitting window does not fit inside the ensemble horizon."""


def temporal_exponent_base(exponents: ExponentSet) -> float:
    """1 / (d_H + 1 + log(nu_min)/log(r_max)), the temporal scaling base."""
    denom = exponents.d_h + 1.0
    if exponents.nu_min != 1.0:
        denom += math.log(exponents.nu_min) / math.log(exponents.r_max)
    return 1.0 / denom


def predicted_exponents(exponents: ExponentSet,
                        q: float) -> tuple[float, float]:
    """Essential Hölder exponents (spatial, temporal) for moment order q.

    Spatial: 1/2 - 1/q.  Temporal: temporal base - 1/q.  ``q=math.inf``
    yields the limiting exponents.  Orders below 2 (or below the temporal
    threshold) raise :class:`ThresholdError`; the theory needs q >= 2
    throughout even where the temporal threshold alone would be weaker.
    """
    base = temporal_exponent_base(exponents)
    threshold = max(2.0, 1.0 / base)
    if q < threshold:
        raise ThresholdError(
            f"moment order q={q} below the admissible threshold {threshold}")
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    return 0.5 - inv_q, base - inv_q


@dataclass(frozen=True)
class InequalityReport:
    """Comparison of the stochastic and deterministic temporal exponents."""

    lhs: float  # 1 / (d_H + 1 + log(nu_min)/log(r_max))
    rhs: float  # 2 - (2 + delta) * gamma
    margin: float
    holds: bool


def exponent_inequality_check(exponents: ExponentSet,
                              tol: float = 1e-12) -> InequalityReport:
    """Check temporal base <= 2 - (2 + delta) gamma, with margin."""
    lhs = temporal_exponent_base(exponents)
    rhs = 2.0 - (2.0 + exponents.delta) * exponents.gamma
    margin = rhs - lhs
    return InequalityReport(lhs, rhs, margin, margin >= -tol)


@dataclass(frozen=True)
class SummationReport:
    """sup_t of sum_k min(k^(a-1), t k^(b-1)) * t^(a/(b-a)) over a t-grid."""

    a: float
    b: float
    t_grid: np.ndarray
    ratios: np.ndarray
    sup_ratio: float


def summation_bound_check(a: float, b: float, t_grid) -> SummationReport:
    """Evaluate the series sum_k min(k^(a-1), t k^(b-1)) across t.

    Requires a < 0 <= b.  The series is summed directly up to well past the
    crossover index t^(1/(a-b)) and closed with the Hurwitz-zeta tail of
    k^(a-1); the normalized ratio sum * t^(a/(b-a)) must stay bounded.
    """
    if not (a < 0.0 <= b):
        raise ValueError(f"need a < 0 <= b, got a={a}, b={b}")
    t_grid = np.asarray(sorted(float(t) for t in t_grid))
    if np.any(t_grid <= 0.0):
        raise ValueError("t grid must be positive")
    ratios = np.empty_like(t_grid)
    for i, t in enumerate(t_grid):
        crossover = t ** (1.0 / (a - b))
        k_cut = int(min(max(64.0, 8.0 * crossover), 5e7))
        k = np.arange(1, k_cut + 1, dtype=float)
        head = float(np.sum(np.minimum(k ** (a - 1.0), t * k ** (b - 1.0))))
        tail = float(zeta(1.0 - a, k_cut + 1))  # sum_{k > k_cut} k^(a-1)
        ratios[i] = (head + tail) * t ** (a / (b - a))
    return SummationReport(a, b, t_grid, ratios, float(ratios.max()))


@dataclass(frozen=True)
class SitePairPlan:
    """Word-aligned site pairs for spatial increment regression.

    Pair endpoints are left endpoints of sibling cylinders sharing a length
    (j-1) prefix, so both lie in F and the separations contract geometrically
    (exactly like r_max^j for equal-ratio systems).
    """

    sites: np.ndarray
    pairs: tuple[tuple[int, int], ...]
    pair_scale: tuple[int, ...]
    scales: tuple[int, ...]
    separations: np.ndarray  # mean separation per scale


def spatial_pairs(spec: IfsSpec, level: int, scales,
                  max_pairs_per_scale: int = 16) -> SitePairPlan:
    scales = tuple(int(j) for j in scales)
    if any(j < 1 or j > level for j in scales):
        raise ValueError("scales must lie in 1..level")
    n = spec.n_maps
    site_list: list[float] = []
    site_idx: dict[float, int] = {}
    pairs: list[tuple[int, int]] = []
    pair_scale: list[int] = []
    sep_per_scale: list[float] = []
    for j in scales:
        n_pref = n ** (j - 1)
        take = min(max_pairs_per_scale, n_pref)
        chosen = np.unique(np.linspace(0, n_pref - 1, take).astype(int))
        seps = []
        for code in chosen:
            prefix = _word_from_code(int(code), j - 1, n)
            suffix = (1,) * (level - j)
            w1 = prefix + (1,) + suffix
            w2 = prefix + (2,) + suffix
            x1 = word_map(spec, w1)[1]
            x2 = word_map(spec, w2)[1]
            i1 = _intern_site(x1, site_list, site_idx)
            i2 = _intern_site(x2, site_list, site_idx)
            pairs.append((i1, i2))
            pair_scale.append(j)
            seps.append(x2 - x1)
        sep_per_scale.append(float(np.mean(seps)))
    return SitePairPlan(np.asarray(site_list), tuple(pairs),
                        tuple(pair_scale), scales, np.asarray(sep_per_scale))


def _word_from_code(code: int, length: int, n: int) -> tuple[int, ...]:
    letters = []
    for _ in range(length):
        letters.append(code % n + 1)
        code //= n
    return tuple(reversed(letters))


def _intern_site(x: float, sites: list[float], idx: dict[float, int]) -> int:
    if x not in idx:
        idx[x] = len(sites)
        sites.append(x)
    return idx[x]


def temporal_probe_times(base_times, deltas) -> np.ndarray:
    """Union of base times and shifted times, sorted, for one ensemble run."""
    ts = set(float(t) for t in base_times)
    for t in base_times:
        for d in deltas:
            ts.add(round(float(t) + float(d), 12))
    return np.asarray(sorted(ts))


@dataclass(frozen=True)
class HoelderReport:
    """Log-log regression of q-th moment increments against separation."""

    direction: str  # "space" or "time"
    q: float
    separations: tuple[float, ...]
    moments: tuple[float, ...]
    slope: float
    slope_over_q: float
    ci_low: float
    ci_high: float
    predicted: float | None
    band: tuple[float, float] | None
    passed: bool | None
    n_paths: int

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "q": self.q,
            "separations": list(self.separations),
            "moments": list(self.moments),
            "slope": self.slope,
            "slope_over_q": self.slope_over_q,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "predicted": self.predicted,
            "band": list(self.band) if self.band is not None else None,
            "passed": self.passed,
            "n_paths": self.n_paths,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HoelderReport":
        return cls(
            direction=d["direction"], q=d["q"],
            separations=tuple(d["separations"]),
            moments=tuple(d["moments"]), slope=d["slope"],
            slope_over_q=d["slope_over_q"], ci_low=d["ci_low"],
            ci_high=d["ci_high"], predicted=d["predicted"],
            band=tuple(d["band"]) if d["band"] is not None else None,
            passed=d["passed"], n_paths=d["n_paths"],
        )


def _fit_slope(log_x: np.ndarray,
               log_y: np.ndarray) -> tuple[float, float]:
    """OLS slope and its standard error."""
    m = len(log_x)
    xc = log_x - log_x.mean()
    slope = float(np.sum(xc * log_y) / np.sum(xc ** 2))
    inter = float(log_y.mean() - slope * log_x.mean())
    res = log_y - (inter + slope * log_x)
    dof = max(m - 2, 1)
    se = float(np.sqrt(np.sum(res ** 2) / dof / np.sum(xc ** 2)))
    return slope, se


def _finish_report(direction: str, q: float, seps, moms, predicted, band,
                   n_paths: int) -> HoelderReport:
    if len(seps) < 4:
        raise InsufficientScalesError(
            f"slope fit needs >= 4 scales, got {len(seps)}")
    slope, se = _fit_slope(np.log(np.asarray(seps)),
                           np.log(np.asarray(moms)))
    ci = (slope - 1.96 * se, slope + 1.96 * se)
    ratio = slope / q
    passed = None if band is None else bool(band[0] <= ratio <= band[1])
    return HoelderReport(direction, q, tuple(float(s) for s in seps),
                         tuple(float(v) for v in moms), slope, ratio,
                         ci[0], ci[1], predicted, band, passed, n_paths)


def estimate_spatial_hoelder(ensemble: PathEnsemble, q: float, t: float,
                             plan: SitePairPlan,
                             predicted: float | None = None,
                             band: tuple[float, float] | None = None
                             ) -> HoelderReport:
    """Regress log E|u(t,x) - u(t,y)|^q on log|x - y| over the plan's pairs."""
    ti = ensemble.time_index(t)
    site_map = [ensemble.site_index(x) for x in plan.sites]
    field = ensemble.values[:, ti, :]
    moments = []
    for j in plan.scales:
        acc = []
        for (i1, i2), js in zip(plan.pairs, plan.pair_scale):
            if js != j:
                continue
            du = field[:, site_map[i2]] - field[:, site_map[i1]]
            acc.append(np.mean(np.abs(du) ** q))
        moments.append(float(np.mean(acc)))
    return _finish_report("space", q, plan.separations, moments, predicted,
                          band, ensemble.n_paths)


def estimate_temporal_hoelder(ensemble: PathEnsemble, q: float, x: float,
                              base_times, deltas,
                              predicted: float | None = None,
                              band: tuple[float, float] | None = None
                              ) -> HoelderReport:
    """Regress log E|u(t+d,x) - u(t,x)|^q on log d over dyadic lags d.

    Moments are averaged over the base times to stabilize the fit; the lag
    scaling, not the absolute level, carries the exponent.
    """
    si = ensemble.site_index(x)
    deltas = [float(d) for d in deltas]
    moments = []
    for d in deltas:
        acc = []
        for t in base_times:
            u0 = ensemble.values[:, ensemble.time_index(float(t)), si]
            u1 = ensemble.values[:, ensemble.time_index(round(float(t) + d,
                                                              12)), si]
            acc.append(np.mean(np.abs(u1 - u0) ** q))
        moments.append(float(np.mean(acc)))
    return _finish_report("time", q, deltas, moments, predicted, band,
                          ensemble.n_paths)


@dataclass(frozen=True)
class LyapunovReport:
    """Late-window growth rate of log E|u(t, x)|^p."""

    p: float
    x: float
    window: tuple[float, float]
    growth_rate: float
    std_error: float
    positive_at_3se: bool
    rate_over_p_squared: float
    n_paths: int

    def to_dict(self) -> dict:
        return {
            "p": self.p, "x": self.x, "window": list(self.window),
            "growth_rate": self.growth_rate, "std_error": self.std_error,
            "positive_at_3se": self.positive_at_3se,
            "rate_over_p_squared": self.rate_over_p_squared,
            "n_paths": self.n_paths,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LyapunovReport":
        return cls(p=d["p"], x=d["x"], window=tuple(d["window"]),
                   growth_rate=d["growth_rate"], std_error=d["std_error"],
                   positive_at_3se=d["positive_at_3se"],
                   rate_over_p_squared=d["rate_over_p_squared"],
                   n_paths=d["n_paths"])


def lyapunov_estimate(ensemble: PathEnsemble, p: float, x: float,
                      window: tuple[float, float]) -> LyapunovReport:
    """Slope of log E|u(t, x)|^p over t in the window, jackknifed over paths.

    The window should sit in the late half of the horizon so transients from
    the initial data have decayed; the finite-horizon slope stands in for the
    limsup-in-time moment Lyapunov exponent.
    """
    si = ensemble.site_index(x)
    lo, hi = float(window[0]), float(window[1])
    sel = (ensemble.times >= lo - 1e-12) & (ensemble.times <= hi + 1e-12)
    ts = ensemble.times[sel]
    if hi > ensemble.times.max() + 1e-12 or sel.sum() < 3:
        raise InsufficientHorizonError(
            f"window {window} needs >= 3 grid times within the horizon")
    powers = np.abs(ensemble.values[:, sel, si]) ** p  # (paths, times)
    n = ensemble.n_paths
    xc = ts - ts.mean()
    denom = float(np.sum(xc ** 2))

    mom = powers.mean(axis=0)
    slope = float(np.sum(xc * np.log(mom)) / denom)

    # Jackknife the whole slope statistic over paths: correlations across
    # times within one path are accounted for.
    loo = (mom[None, :] * n - powers) / (n - 1)
    slopes_loo = (np.log(loo) @ xc) / denom
    se = float(np.sqrt((n - 1) / n
                       * np.sum((slopes_loo - slopes_loo.mean()) ** 2)))
    return LyapunovReport(p, x, (lo, hi), slope, se, slope > 3.0 * se,
                          slope / p ** 2, n)
