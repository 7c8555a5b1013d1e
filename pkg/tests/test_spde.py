import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad
from scipy.stats import kurtosis, skew

from kfwave.measure import discrete_measure
from kfwave.spde import (
    DriftSpec,
    InitialData,
    NoisePlan,
    deterministic_part,
    ensemble_variance,
    moment_estimator,
    picard_solve,
    project_initial_data,
    simulate_paths,
    stochastic_convolution_variance,
)
from kfwave.spectral import PropagatorEvaluator, propagator_row_norm


def _zero(x):
    return np.zeros_like(x)


def _one(x):
    return np.ones_like(x)


@pytest.fixture(scope="module")
def eigen6(cantor):
    from kfwave.spectral import solve_eigensystem
    return solve_eigensystem(discrete_measure(cantor, 6))


@pytest.fixture(scope="module")
def zero_init(eigen6):
    return project_initial_data(_zero, _zero, eigen6)


def _plan(eigen, seed=101, paths=64, dt=2e-3, horizon=0.5):
    return NoisePlan.for_eigen(eigen, seed, paths, dt, horizon)


class TestDrift:
    def test_constant_is_additive(self):
        d = DriftSpec.constant(2.0)
        assert not d.depends_on_u
        assert d.lipschitz == 0.0
        assert d(0.3, 5.0) == 2.0

    def test_linear(self):
        d = DriftSpec.linear(3.0)
        assert d.lipschitz == 3.0
        assert_allclose(d(0.0, np.array([-1.0, 2.0])), [-3.0, 6.0])

    def test_clipped_respects_bound(self):
        d = DriftSpec.clipped(4.0, bound=2.0)
        assert_allclose(d(0.0, np.array([-10.0, 0.1, 10.0])),
                        [-2.0, 0.4, 2.0])

    def test_table_interpolation(self):
        d = DriftSpec.from_table([-1.0, 0.0, 1.0], [1.0, 0.0, 1.0])
        assert d(0.0, 0.5) == pytest.approx(0.5)
        assert d.lipschitz == pytest.approx(1.0)

    def test_understated_lipschitz_rejected(self):
        with pytest.raises(ValueError):
            DriftSpec("linear", coefficient=5.0, lipschitz=1.0)


class TestProjection:
    def test_eigenfunction_projects_to_unit_vector(self, eigen6):
        target = 2  # phi_3, zero-based column index
        init = project_initial_data(
            lambda x: eigen6.basis_at(x)[:, target], _zero, eigen6)
        e3 = np.zeros(eigen6.k_count)
        e3[target] = 1.0
        assert np.max(np.abs(init.u0_coeffs - e3)) < 1e-8

    def test_constant_projects_to_zero_mode(self, eigen6):
        init = project_initial_data(_one, _zero, eigen6)
        assert init.u0_coeffs[0] == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(init.u0_coeffs[1:])) < 1e-10

    def test_lebesgue_dirichlet_fourier_sine(self,
                                             lebesgue_eigen_n10_dirichlet):
        eig = lebesgue_eigen_n10_dirichlet
        init = project_initial_data(_one, _zero, eig)
        k = np.arange(1, 9)
        exact = np.sqrt(2.0) * (1 - np.cos(k * np.pi)) / (k * np.pi)
        assert np.max(np.abs(init.u0_coeffs[:8] - exact)) < 0.02


class TestDeterministicPart:
    def test_initial_condition_recovered(self, lebesgue_eigen_n10_dirichlet):
        eig = lebesgue_eigen_n10_dirichlet
        init = project_initial_data(lambda x: np.sin(np.pi * x), _zero, eig)
        v2, v3 = deterministic_part(eig, init, 0.0, 0.5)
        assert v2 == 0.0
        assert v3 == pytest.approx(math.sin(math.pi * 0.5), abs=1e-3)

    def test_classical_standing_wave(self, lebesgue_eigen_n10_dirichlet):
        eig = lebesgue_eigen_n10_dirichlet
        init = InitialData.from_coeffs(eig, [], [1.0])  # u1 = phi_1
        for t in (0.1, 0.4, 0.9):
            v2, _ = deterministic_part(eig, init, t, 0.5)
            exact = math.sin(math.pi * t) / math.pi * math.sqrt(2.0) \
                * math.sin(math.pi * 0.5)
            assert v2 == pytest.approx(exact, rel=0.01)

    def test_neumann_zero_mode_evolution(self, eigen6):
        init = project_initial_data(_one, _zero, eigen6)
        for t in (0.0, 0.5, 2.0):
            v2, v3 = deterministic_part(eigen6, init, t, 1 / 3)
            assert v2 == pytest.approx(0.0, abs=1e-10)
            assert v3 == pytest.approx(1.0, abs=1e-10)

    def test_velocity_zero_mode_grows_linearly(self, eigen6):
        init = project_initial_data(_zero, _one, eigen6)
        v2, v3 = deterministic_part(eigen6, init, 1.5, 0.2)
        assert v2 == pytest.approx(1.5, abs=1e-10)
        assert v3 == pytest.approx(0.0, abs=1e-10)


class TestSimulate:
    def test_no_noise_is_deterministic(self, eigen6):
        init = project_initial_data(_one, _zero, eigen6)
        plan = _plan(eigen6, paths=8)
        sites = [0.0, 1 / 3, 2 / 3]
        ens = simulate_paths(eigen6, init, DriftSpec.constant(0.0), plan,
                             sites, [0.25, 0.5])
        assert np.ptp(ens.values, axis=0).max() == 0.0
        for i, t in enumerate(ens.times):
            v2, v3 = deterministic_part(eigen6, init, t, np.asarray(sites))
            assert_allclose(ens.values[0, i], v2 + v3, atol=1e-12)

    def test_walsh_isometry_additive(self, eigen6, zero_init):
        plan = _plan(eigen6, seed=404, paths=1500, dt=1e-3, horizon=0.5)
        t, x = 0.4, float(eigen6.nodes[20])
        ens = simulate_paths(eigen6, zero_init, DriftSpec.constant(1.0),
                             plan, [x], [t])
        var, se = ensemble_variance(ens, t, x)
        pe = PropagatorEvaluator(eigen6)
        oracle = quad(lambda s: propagator_row_norm(pe, s, x) ** 2,
                      0.0, t, limit=200)[0]
        assert abs(var - oracle) < 3.0 * se

    def test_stochastic_integral_mean_zero(self, eigen6):
        init = project_initial_data(_one, _one, eigen6)
        plan = _plan(eigen6, seed=11, paths=1200, dt=2e-3, horizon=0.5)
        t, x = 0.5, float(eigen6.nodes[40])
        ens = simulate_paths(eigen6, init, DriftSpec.constant(1.0), plan,
                             [x], [t])
        v2, v3 = deterministic_part(eigen6, init, t, x)
        residual = ens.at(t, x) - (v2 + v3)
        se = residual.std(ddof=1) / math.sqrt(len(residual))
        assert abs(residual.mean()) < 3.0 * se

    def test_bitwise_reproducible(self, eigen6, zero_init):
        drift = DriftSpec.linear(1.0)
        sites = [0.0, 2 / 3]
        times = [0.2, 0.4]
        a = simulate_paths(eigen6, zero_init, drift,
                           _plan(eigen6, paths=32), sites, times)
        b = simulate_paths(eigen6, zero_init, drift,
                           _plan(eigen6, paths=32), sites, times)
        assert np.array_equal(a.values, b.values)
        assert a.config_digest == b.config_digest

    def test_path_prefix_stable_under_ensemble_growth(self, eigen6,
                                                      zero_init):
        # Rows are pure functions of (seed, step, cell): enlarging the
        # ensemble must reproduce existing paths bit for bit.
        drift = DriftSpec.constant(1.0)
        small = simulate_paths(eigen6, zero_init, drift,
                               _plan(eigen6, paths=16), [1 / 3], [0.5])
        big = simulate_paths(eigen6, zero_init, drift,
                             _plan(eigen6, paths=48), [1 / 3], [0.5])
        assert np.array_equal(big.values[:16], small.values)

    def test_gaussian_marginal_for_additive_noise(self, cantor):
        from kfwave.spectral import solve_eigensystem
        eigen = solve_eigensystem(discrete_measure(cantor, 5))
        init = project_initial_data(_zero, _zero, eigen)
        plan = NoisePlan.for_eigen(eigen, 2024, 5000, 2e-3, 0.5)
        ens = simulate_paths(eigen, init, DriftSpec.constant(1.0), plan,
                             [2 / 3], [0.5])
        sample = ens.at(0.5, 2 / 3)
        n = len(sample)
        assert abs(skew(sample)) < 5.0 * math.sqrt(6.0 / n)
        assert abs(kurtosis(sample)) < 5.0 * math.sqrt(24.0 / n)

    def test_off_grid_time_rejected(self, eigen6, zero_init):
        plan = _plan(eigen6)
        with pytest.raises(ValueError):
            simulate_paths(eigen6, zero_init, DriftSpec.constant(1.0), plan,
                           [0.0], [plan.dt * 1.5])

    def test_refining_dt_barely_moves_variance(self, eigen6):
        t, x = 0.5, float(eigen6.nodes[20])
        coarse = stochastic_convolution_variance(eigen6, t, x, dt=2e-3)
        fine = stochastic_convolution_variance(eigen6, t, x, dt=1e-3)
        exact = stochastic_convolution_variance(eigen6, t, x)
        assert abs(fine - coarse) / exact < 0.02
        assert abs(fine - exact) / exact < 0.01


class TestPicard:
    def test_additive_converges_in_one_sweep(self, eigen6, zero_init):
        plan = _plan(eigen6, paths=8, dt=5e-3, horizon=0.2)
        ens, trace = picard_solve(eigen6, zero_init, DriftSpec.constant(1.0),
                                  plan, tol=1e-12, max_iter=5)
        # First sweep lays down the convolution, second certifies the fixed
        # point exactly (f does not depend on u).
        assert len(trace) == 2
        assert trace[1] == 0.0

    def test_small_linear_drift_contracts_factorially(self, eigen6):
        init = project_initial_data(_one, _one, eigen6)
        plan = _plan(eigen6, paths=8, dt=5e-3, horizon=0.2)
        _, trace = picard_solve(eigen6, init, DriftSpec.linear(0.5),
                                plan, tol=1e-13, max_iter=30)
        diffs = [d for d in trace if d > 0]
        ratios = [b / a for a, b in zip(diffs, diffs[1:])]
        assert len(diffs) >= 4
        assert all(r < 0.1 for r in ratios)
        # Factorial envelope: overall decay beats the geometric rate set by
        # the first contraction ratio.
        assert diffs[-1] / diffs[0] < ratios[0] ** (len(diffs) - 1)

    def test_matches_explicit_scheme(self, eigen6):
        init = project_initial_data(_one, _one, eigen6)
        plan = _plan(eigen6, paths=8, dt=5e-3, horizon=0.2)
        drift = DriftSpec.linear(1.5)
        times = [0.1, 0.2]
        sites = [0.0, 2 / 3]
        explicit = simulate_paths(eigen6, init, drift, plan, sites,
                                  times)
        fixed, trace = picard_solve(eigen6, init, drift, plan,
                                    tol=1e-12, max_iter=60,
                                    sites=sites, times=times)
        assert trace[-1] < 1e-12
        assert np.max(np.abs(explicit.values - fixed.values)) < 1e-10

    def test_reports_no_convergence(self, eigen6):
        from kfwave.spde import NoConvergenceError
        init = project_initial_data(_one, _one, eigen6)
        plan = _plan(eigen6, paths=4, dt=5e-3, horizon=0.2)
        with pytest.raises(NoConvergenceError) as err:
            picard_solve(eigen6, init, DriftSpec.linear(2.0), plan,
                         tol=1e-16, max_iter=2)
        assert len(err.value.trace) == 2


class TestMoments:
    def test_noise_free_second_moment_is_exact(self, eigen6):
        init = project_initial_data(_one, _zero, eigen6)
        plan = _plan(eigen6, paths=16)
        x = 2 / 3
        ens = simulate_paths(eigen6, init, DriftSpec.constant(0.0), plan,
                             [x], [0.25])
        est, se = moment_estimator(ens, 2, 0.25, x)
        v2, v3 = deterministic_part(eigen6, init, 0.25, x)
        assert est == pytest.approx((v2 + v3) ** 2, rel=1e-12)
        assert se == pytest.approx(0.0, abs=1e-15)

    def test_additive_matches_isometry(self, eigen6, zero_init):
        plan = _plan(eigen6, seed=7, paths=1500, dt=1e-3, horizon=0.5)
        t, x = 0.5, 0.0
        ens = simulate_paths(eigen6, zero_init, DriftSpec.constant(1.0),
                             plan, [x], [t])
        est, se = moment_estimator(ens, 2, t, x)
        oracle = stochastic_convolution_variance(eigen6, t, x, dt=plan.dt)
        assert abs(est - oracle) < 3.0 * se

    def test_rejects_sub_first_moments(self, eigen6, zero_init):
        plan = _plan(eigen6, paths=4)
        ens = simulate_paths(eigen6, zero_init, DriftSpec.constant(0.0),
                             plan, [0.0], [0.2])
        with pytest.raises(ValueError):
            moment_estimator(ens, 0.5, 0.2, 0.0)
