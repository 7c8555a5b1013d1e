import numpy as np
import pytest

from kfwave import (
    Boundary,
    cantor_spec,
    discrete_measure,
    lebesgue_spec,
    solve_eigensystem,
    validate_ifs,
)
from kfwave.measure import IfsSpec


def sample_spec(rng: np.random.Generator, n_min: int = 2,
                n_max: int = 4) -> IfsSpec:
    """Random admissible spec: interior-disjoint images covering 0 and 1.

    Gaps between images may vanish (touching intervals are allowed).
    """
    n = int(rng.integers(n_min, n_max + 1))
    lengths = rng.uniform(0.3, 1.0, n)
    gaps = rng.uniform(0.05, 0.6, n - 1) * (rng.random(n - 1) > 0.25)
    total = lengths.sum() + gaps.sum()
    ratios = lengths / total
    offsets = [0.0]
    for i in range(n - 1):
        offsets.append(offsets[-1] + ratios[i] + gaps[i] / total)
    weights = rng.uniform(0.2, 1.0, n)
    weights = weights / weights.sum()
    # Re-normalize the residual rounding into the last entries so the
    # coverage and mass identities hold exactly enough for validation.
    offsets[-1] = 1.0 - ratios[-1]
    weights[-1] = 1.0 - weights[:-1].sum()
    return validate_ifs(IfsSpec(tuple(ratios), tuple(offsets),
                                tuple(weights)))


@pytest.fixture(scope="session")
def cantor():
    return cantor_spec()


@pytest.fixture(scope="session")
def lebesgue():
    return lebesgue_spec()


@pytest.fixture(scope="session")
def cantor_eigen_n8():
    return solve_eigensystem(discrete_measure(cantor_spec(), 8))


@pytest.fixture(scope="session")
def cantor_eigen_n9_dirichlet():
    return solve_eigensystem(
        discrete_measure(cantor_spec(boundary=Boundary.DIRICHLET), 9))


@pytest.fixture(scope="session")
def lebesgue_eigen_n10_dirichlet():
    return solve_eigensystem(
        discrete_measure(lebesgue_spec(boundary=Boundary.DIRICHLET), 10))


@pytest.fixture(scope="session")
def lebesgue_eigen_n10_neumann():
    return solve_eigensystem(discrete_measure(lebesgue_spec(), 10))
