"""Self-similar measures on Cantor-like subsets of [0, 1].

An iterated function system (IFS) of affine contractions

    S_i(x) = r_i * x + b_i,    0 < r_i < 1,  0 <= b_i <= 1 - r_i,

with ordered, interior-disjoint images and S_1(0) = 0, S_N(1) = 1 defines a
compact attractor F (a Cantor-like set) and, given probability weights mu_i,
a unique self-similar Borel probability measure mu with

    mu(A) = sum_i mu_i * mu(S_i^{-1}(A)),    supp(mu) = F.

This module builds and queries the IFS: word-space navigation, the scale
partitions Lambda_n, finite-resolution neighbourhoods and delta approximants,
atomic approximations of mu, and the derived scalar exponents (Hausdorff
dimension, spectral exponent, skewness indicator) that control every estimate
downstream.
"""

from __future__ import annotations

import itertools
import math
from bisect import bisect_left
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Boundary",
    "IfsSpec",
    "IfsError",
    "OverlapError",
    "WeightError",
    "CoverageError",
    "NotInSupportError",
    "SizeError",
    "ExponentSet",
    "PartitionLambdaN",
    "DeltaApproximant",
    "DiscreteMeasure",
    "validate_ifs",
    "solve_dimension",
    "solve_spectral_exponent",
    "compute_exponents",
    "word_ratio",
    "word_measure",
    "word_interval",
    "partition",
    "neighborhood",
    "discrete_measure",
    "inner_product_with_approximant",
    "cantor_spec",
    "lebesgue_spec",
    "natural_weights",
]

#: Letters of a word index the IFS maps, 1-based as is customary for code spaces.
Word = tuple[int, ...]

#: Absolute tolerance on probability-mass identities (weights, word measures).
MASS_TOL = 1e-12

#: Relative slack used when comparing products of ratios against r_max**n.
#: Mathematically equal products can differ by a few ulps depending on the
#: multiplication order; ties must resolve as "not greater".
_RATIO_RTOL = 1e-12


class Boundary(str, Enum):
    """Boundary condition carried by a spec for the downstream operator."""

    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"


class IfsError(ValueError):
    """Invalid iterated function system."""


class OverlapError(IfsError):
    """Interiors of two contraction images intersect."""


class WeightError(IfsError):
    """Weights outside (0, 1) or not summing to one."""


class CoverageError(IfsError):
    """The images do not pin both endpoints: S_1(0) != 0 or S_N(1) != 1."""


class NotInSupportError(ValueError):
    """A queried point lies in a gap interval at the requested resolution."""


class SizeError(RuntimeError):
    """An enumeration would exceed the configured size cap."""


@dataclass(frozen=True)
class IfsSpec:
    """Contraction ratios, offsets and weights of a Cantor-like IFS.

    ``ratios[i]`` and ``offsets[i]`` define S_i(x) = ratios[i]*x + offsets[i];
    ``weights[i]`` is the measure weight mu_i.  The boundary condition is
    carried along for the operator built on top of the measure.
    """

    ratios: tuple[float, ...]
    offsets: tuple[float, ...]
    weights: tuple[float, ...]
    boundary: Boundary = Boundary.NEUMANN

    @property
    def n_maps(self) -> int:
        return len(self.ratios)

    def apply(self, letter: int, x: float) -> float:
        """Apply S_letter (1-based) to x."""
        return self.ratios[letter - 1] * x + self.offsets[letter - 1]


def cantor_spec(weights: tuple[float, float] = (0.5, 0.5),
                boundary: Boundary = Boundary.NEUMANN) -> IfsSpec:
    """Classical middle-thirds Cantor set with the given weights."""
    return IfsSpec((1 / 3, 1 / 3), (0.0, 2 / 3), tuple(weights), boundary)


def lebesgue_spec(boundary: Boundary = Boundary.NEUMANN) -> IfsSpec:
    """Two half-interval maps; the attractor is [0, 1] and mu is Lebesgue."""
    return IfsSpec((0.5, 0.5), (0.0, 0.5), (0.5, 0.5), boundary)


def natural_weights(ratios: tuple[float, ...]) -> tuple[float, ...]:
    """Weights mu_i = r_i**d_H of the natural (Hausdorff) measure."""
    d = _solve_dimension_from_ratios(ratios)
    return tuple(r ** d for r in ratios)


def validate_ifs(spec: IfsSpec) -> IfsSpec:
    """Check all structural invariants of the spec; return it unchanged.

    Raises :class:`OverlapError`, :class:`WeightError` or
    :class:`CoverageError` for the respective violations, plain
    :class:`IfsError` for malformed ratios/offsets.
    """
    n = spec.n_maps
    if n < 2:
        raise IfsError(f"need at least two contractions, got {n}")
    if len(spec.offsets) != n or len(spec.weights) != n:
        raise IfsError("ratios, offsets and weights must have equal length")
    for i, r in enumerate(spec.ratios):
        if not (0.0 < r < 1.0):
            raise IfsError(f"ratio r_{i + 1}={r} outside (0, 1)")
    for i, (r, b) in enumerate(zip(spec.ratios, spec.offsets)):
        if not (0.0 <= b <= 1.0 - r + 1e-15):
            raise IfsError(f"offset b_{i + 1}={b} outside [0, 1-r_{i + 1}]")
    for i, w in enumerate(spec.weights):
        if not (0.0 < w < 1.0):
            raise WeightError(f"weight mu_{i + 1}={w} outside (0, 1)")
    if abs(math.fsum(spec.weights) - 1.0) > MASS_TOL:
        raise WeightError(
            f"weights sum to {math.fsum(spec.weights)!r}, expected 1")
    for i in range(n - 1):
        hi = spec.ratios[i] + spec.offsets[i]
        lo_next = spec.offsets[i + 1]
        if hi > lo_next + 1e-15:
            raise OverlapError(
                f"S_{i + 1}(1)={hi} exceeds S_{i + 2}(0)={lo_next}")
    if spec.offsets[0] != 0.0:
        raise CoverageError(f"S_1(0)={spec.offsets[0]} != 0")
    right = spec.ratios[-1] + spec.offsets[-1]
    if abs(right - 1.0) > 1e-15:
        raise CoverageError(f"S_N(1)={right} != 1")
    return spec


def _bisect_root(fn, lo: float, hi: float, *, xtol: float = 1e-13,
                 max_iter: int = 200) -> float:
    """Bisection for fn decreasing with fn(lo) > 0 > fn(hi) (weakly)."""
    flo = fn(lo)
    if flo <= 0.0:
        return lo
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            break
        if fn(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_dimension_from_ratios(ratios: tuple[float, ...]) -> float:
    total = math.fsum(ratios)
    if abs(total - 1.0) <= MASS_TOL:
        return 1.0
    return _bisect_root(
        lambda d: math.fsum(r ** d for r in ratios) - 1.0, 0.0, 1.0)


def solve_dimension(spec: IfsSpec) -> float:
    """Hausdorff dimension d_H of F: the root of sum_i r_i**d = 1 in (0, 1]."""
    return _solve_dimension_from_ratios(spec.ratios)


def solve_spectral_exponent(spec: IfsSpec) -> float:
    """Spectral exponent gamma: the root of sum_i (mu_i r_i)**g = 1 in (0, 1).

    Eigenvalue counting of the operator built on mu grows like k**(1/gamma).
    """
    prods = [m * r for m, r in zip(spec.weights, spec.ratios)]
    return _bisect_root(
        lambda g: math.fsum(p ** g for p in prods) - 1.0, 0.0, 1.0)


@dataclass(frozen=True)
class ExponentSet:
    """Derived scalars governing the spectral and regularity estimates.

    ``delta`` is the skewness indicator max_i log(mu_i) / log((mu_i r_i)**gamma);
    ``nu_min`` is min_i mu_i / r_i**d_H.  ``hypothesis_i_satisfied`` records
    whether delta + 1 < 1/gamma, the condition under which the wave propagator
    has uniformly bounded mu-norm rows on compact time intervals.
    """

    d_h: float
    gamma: float
    delta: float
    nu_min: float
    r_max: float
    r_min: float
    hypothesis_i_satisfied: bool


def compute_exponents(spec: IfsSpec) -> ExponentSet:
    """Populate all derived exponents for a valid spec."""
    d_h = solve_dimension(spec)
    gamma = solve_spectral_exponent(spec)
    delta = max(
        math.log(m) / (gamma * math.log(m * r))
        for m, r in zip(spec.weights, spec.ratios)
    )
    nu_min = min(m / r ** d_h for m, r in zip(spec.weights, spec.ratios))
    # The condition delta + 1 < 1/gamma is strict; the full-interval uniform
    # case sits exactly on the equality, so resolve near-ties as "not
    # satisfied" rather than let root-finding noise decide.
    return ExponentSet(
        d_h=d_h,
        gamma=gamma,
        delta=delta,
        nu_min=nu_min,
        r_max=max(spec.ratios),
        r_min=min(spec.ratios),
        hypothesis_i_satisfied=delta + 1.0 < 1.0 / gamma - 1e-9,
    )


def word_ratio(spec: IfsSpec, word: Word) -> float:
    """Composite contraction ratio r_w = prod_i r_{w_i}."""
    r = 1.0
    for letter in word:
        r *= spec.ratios[letter - 1]
    return r


def word_measure(spec: IfsSpec, word: Word) -> float:
    """Measure mu_w = prod_i mu_{w_i} of the cylinder F_w."""
    m = 1.0
    for letter in word:
        m *= spec.weights[letter - 1]
    return m


def word_map(spec: IfsSpec, word: Word) -> tuple[float, float]:
    """Scale and offset of S_w = S_{w_1} o ... o S_{w_m}."""
    r, b = 1.0, 0.0
    for letter in word:
        b += r * spec.offsets[letter - 1]
        r *= spec.ratios[letter - 1]
    return r, b


def word_interval(spec: IfsSpec, word: Word) -> tuple[float, float]:
    """Basic interval [S_w(0), S_w(1)] containing the cylinder F_w."""
    r, b = word_map(spec, word)
    return b, b + r


@dataclass(frozen=True)
class PartitionLambdaN:
    """Scale partition Lambda_n of the word space.

    Contains exactly the words w = w_1 ... w_m whose composite ratio first
    drops to r_max**n:  r_{w_1} ... r_{w_{m-1}} > r_max**n >= r_w.  The
    cylinders F_w, w in Lambda_n, cover F with comparable diameters and
    pairwise interiors-disjoint basic intervals.
    """

    level: int
    words: tuple[Word, ...]
    word_measures: np.ndarray
    word_intervals: np.ndarray  # shape (len(words), 2), rows [lo, hi]

    def __len__(self) -> int:
        return len(self.words)


def partition(spec: IfsSpec, n: int, *, cap: int = 10_000_000) -> PartitionLambdaN:
    """Enumerate Lambda_n by depth-first word extension.

    Raises :class:`SizeError` if the partition would exceed ``cap`` words.
    """
    if n < 1:
        raise ValueError(f"partition level must be >= 1, got {n}")
    rmax_n = max(spec.ratios) ** n
    threshold = rmax_n * (1.0 + _RATIO_RTOL)
    letters = range(1, spec.n_maps + 1)
    words: list[Word] = []
    # Depth-first, letters ascending: output is lexicographically sorted,
    # which coincides with the spatial order of the basic intervals.
    stack: list[tuple[Word, float]] = [
        ((i,), spec.ratios[i - 1]) for i in reversed(letters)
    ]
    while stack:
        word, r = stack.pop()
        if r > threshold:
            stack.extend(
                (word + (i,), r * spec.ratios[i - 1]) for i in reversed(letters)
            )
        else:
            words.append(word)
            if len(words) > cap:
                raise SizeError(f"partition at level {n} exceeds cap {cap}")
    measures = np.array([word_measure(spec, w) for w in words])
    intervals = np.array([word_interval(spec, w) for w in words])
    return PartitionLambdaN(n, tuple(words), measures, intervals)


@dataclass(frozen=True)
class DeltaApproximant:
    """Finite-resolution neighbourhood of a support point.

    ``support_words`` are the (one or two) words of Lambda_n whose basic
    interval contains ``center``; their union is the n-neighbourhood, the
    support of the normalized indicator converging weakly to the point
    evaluation at ``center``.
    """

    center: float
    level: int
    support_words: tuple[Word, ...]
    total_mass: float
    interval: tuple[float, float]

    @property
    def diameter(self) -> float:
        return self.interval[1] - self.interval[0]


def neighborhood(spec: IfsSpec, x: float, n: int,
                 part: PartitionLambdaN | None = None) -> DeltaApproximant:
    """Support words of Lambda_n containing x, with their total mass.

    Membership uses the closed basic intervals; a point shared by two
    neighbouring intervals belongs to both, and the masses add (mu is
    non-atomic, so the shared point is mu-null).  Raises
    :class:`NotInSupportError` when x falls in a gap at this resolution.
    """
    if part is None:
        part = partition(spec, n)
    elif part.level != n:
        raise ValueError(f"partition level {part.level} != requested {n}")
    los = part.word_intervals[:, 0]
    his = part.word_intervals[:, 1]
    # Closed intervals sorted by lo: x can lie in the last interval whose lo
    # is <= x, or on the right endpoint of the one before it (touching
    # intervals share exactly that point); earlier intervals end strictly
    # left of x.
    j = int(np.searchsorted(los, x, side="right"))
    hits = [i for i in (j - 2, j - 1) if 0 <= i < len(part.words)
            and los[i] <= x <= his[i]]
    if not hits:
        raise NotInSupportError(
            f"x={x} lies in a gap of the level-{n} cover")
    words = tuple(part.words[i] for i in hits)
    mass = float(part.word_measures[hits].sum())
    lo = float(los[hits[0]])
    hi = float(his[hits[-1]])
    return DeltaApproximant(x, n, words, mass, (lo, hi))


@dataclass(frozen=True)
class DiscreteMeasure:
    """Atomic approximation of mu at word-space level n.

    One atom per word w of length n, placed at the left endpoint S_w(0) with
    mass mu_w.  Left endpoints lie in F, are pairwise distinct and include 0;
    the right endpoint 1 is a boundary coordinate of the string built on top,
    not an atom.  Words are stored in lexicographic (= spatial) order.
    """

    spec: IfsSpec
    level: int
    words: tuple[Word, ...]
    positions: np.ndarray
    masses: np.ndarray

    @property
    def n_atoms(self) -> int:
        return len(self.positions)

    def prefix_slice(self, word: Word) -> slice:
        """Index range of the atoms descending from ``word``."""
        if len(word) > self.level:
            raise ValueError("prefix longer than the atom words")
        lo = bisect_left(self.words, word)
        hi = bisect_left(self.words, word[:-1] + (word[-1] + 1,))
        return slice(lo, hi)


def discrete_measure(spec: IfsSpec, n: int, *,
                     cap: int = 10_000_000) -> DiscreteMeasure:
    """Atoms at S_w(0), w running over all N**n words of length n."""
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    count = spec.n_maps ** n
    if count > cap:
        raise SizeError(f"level {n} needs {count} atoms, exceeding cap {cap}")
    words = tuple(itertools.product(range(1, spec.n_maps + 1), repeat=n))
    positions = np.empty(count)
    masses = np.empty(count)
    for i, w in enumerate(words):
        _, positions[i] = word_map(spec, w)
        masses[i] = word_measure(spec, w)
    # Lexicographic word order is spatial order; atoms are distinct because
    # basic intervals of one level have nonempty, disjoint interiors.
    if not np.all(np.diff(positions) > 0.0):
        raise IfsError("atom positions are not strictly increasing")
    return DiscreteMeasure(spec, n, words, positions, masses)


def inner_product_with_approximant(g, approx: DeltaApproximant,
                                   dm: DiscreteMeasure) -> float:
    """Pairing <g, f_n^x> of a function with the normalized indicator.

    Evaluates mu(D)**-1 * sum over the atoms descending from the support
    words, so that masses are exact and g == 1 pairs to exactly one.  For
    continuous g the value converges to g(center) as n grows, at the rate of
    g's modulus of continuity on scale r_max**n.
    """
    if dm.level < approx.level:
        raise ValueError(
            f"atom level {dm.level} coarser than approximant level "
            f"{approx.level}")
    sel = np.concatenate(
        [np.arange(dm.n_atoms)[dm.prefix_slice(w)] for w in approx.support_words])
    xs = dm.positions[sel]
    ms = dm.masses[sel]
    vals = np.asarray(g(xs), dtype=float)
    return float(np.sum(ms * vals) / np.sum(ms))
