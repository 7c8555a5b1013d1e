import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import brentq

from kfwave.measure import (
    CoverageError,
    IfsError,
    IfsSpec,
    NotInSupportError,
    OverlapError,
    SizeError,
    WeightError,
    cantor_spec,
    compute_exponents,
    discrete_measure,
    inner_product_with_approximant,
    lebesgue_spec,
    natural_weights,
    neighborhood,
    partition,
    solve_dimension,
    solve_spectral_exponent,
    validate_ifs,
    word_interval,
    word_measure,
    word_ratio,
)

D_H_CANTOR = math.log(2) / math.log(3)
GAMMA_CANTOR = math.log(2) / math.log(6)


class TestValidate:
    def test_cantor_valid(self, cantor):
        assert validate_ifs(cantor) is cantor

    def test_lebesgue_full_interval(self, lebesgue):
        assert validate_ifs(lebesgue) is lebesgue

    def test_overlapping_images(self):
        spec = IfsSpec((0.5, 1 / 3), (0.0, 1 / 3), (0.5, 0.5))
        with pytest.raises(OverlapError):
            validate_ifs(spec)

    def test_weights_must_sum_to_one(self):
        spec = IfsSpec((1 / 3, 1 / 3), (0.0, 2 / 3), (0.5, 0.6))
        with pytest.raises(WeightError):
            validate_ifs(spec)

    def test_weight_outside_unit_interval(self):
        spec = IfsSpec((1 / 3, 1 / 3), (0.0, 2 / 3), (1.2, -0.2))
        with pytest.raises(WeightError):
            validate_ifs(spec)

    def test_left_endpoint_not_pinned(self):
        spec = IfsSpec((1 / 3, 1 / 3), (0.1, 2 / 3), (0.5, 0.5))
        with pytest.raises(CoverageError):
            validate_ifs(spec)

    def test_right_endpoint_not_pinned(self):
        spec = IfsSpec((1 / 3, 1 / 3), (0.0, 0.5), (0.5, 0.5))
        with pytest.raises(CoverageError):
            validate_ifs(spec)

    def test_bad_ratio(self):
        with pytest.raises(IfsError):
            validate_ifs(IfsSpec((1.2, 0.1), (0.0, 0.9), (0.5, 0.5)))

    def test_single_map_rejected(self):
        with pytest.raises(IfsError):
            validate_ifs(IfsSpec((1.0,), (0.0,), (1.0,)))


class TestDimension:
    def test_cantor_closed_form(self, cantor):
        assert solve_dimension(cantor) == pytest.approx(D_H_CANTOR, abs=1e-12)

    def test_full_interval_is_one(self, lebesgue):
        assert solve_dimension(lebesgue) == 1.0

    def test_golden_ratio_case(self):
        spec = validate_ifs(IfsSpec((0.5, 0.25), (0.0, 0.75), (0.5, 0.5)))
        expected = math.log((1 + math.sqrt(5)) / 2) / math.log(2)
        assert solve_dimension(spec) == pytest.approx(expected, abs=1e-12)

    def test_residual_below_tolerance(self, cantor):
        d = solve_dimension(cantor)
        assert abs(sum(r ** d for r in cantor.ratios) - 1) <= 1e-12

    def test_monotone_in_ratios(self):
        lo = validate_ifs(IfsSpec((0.3, 0.3), (0.0, 0.7), (0.5, 0.5)))
        hi = validate_ifs(IfsSpec((0.4, 0.3), (0.0, 0.7), (0.5, 0.5)))
        assert solve_dimension(hi) > solve_dimension(lo)


class TestSpectralExponent:
    def test_cantor_closed_form(self, cantor):
        assert solve_spectral_exponent(cantor) == pytest.approx(
            GAMMA_CANTOR, abs=1e-12)

    def test_lebesgue_is_half(self, lebesgue):
        assert solve_spectral_exponent(lebesgue) == pytest.approx(
            0.5, abs=1e-12)

    def test_uneven_weights_against_brentq(self):
        spec = validate_ifs(
            IfsSpec((1 / 3, 1 / 3), (0.0, 2 / 3), (0.3, 0.7)))
        gamma = solve_spectral_exponent(spec)
        oracle = brentq(lambda g: 0.1 ** g + (0.7 / 3) ** g - 1.0,
                        1e-12, 1.0, xtol=1e-15)
        assert gamma == pytest.approx(oracle, abs=1e-12)
        assert abs(0.1 ** gamma + (0.7 / 3) ** gamma - 1) <= 1e-12


class TestExponents:
    def test_cantor_natural(self, cantor):
        exps = compute_exponents(cantor)
        assert exps.delta == pytest.approx(1.0, abs=1e-10)
        assert 1 / exps.gamma == pytest.approx(math.log(6) / math.log(2),
                                               abs=1e-10)
        assert exps.nu_min == pytest.approx(1.0, abs=1e-10)
        assert exps.hypothesis_i_satisfied

    def test_lebesgue_fails_hypothesis(self, lebesgue):
        exps = compute_exponents(lebesgue)
        assert exps.delta == pytest.approx(1.0, abs=1e-10)
        assert exps.gamma == pytest.approx(0.5, abs=1e-12)
        assert not exps.hypothesis_i_satisfied

    def test_weighted_cantor_nu_min(self):
        spec = validate_ifs(
            IfsSpec((1 / 3, 1 / 3), (0.0, 2 / 3), (0.2, 0.8)))
        exps = compute_exponents(spec)
        # r**d_H = 1/2 for middle-thirds ratios, so nu_min = 0.2 * 2.
        assert exps.nu_min == pytest.approx(0.4, abs=1e-10)

    def test_gamma_never_exceeds_half(self, cantor, lebesgue):
        for spec in (cantor, lebesgue):
            gamma = compute_exponents(spec).gamma
            assert 0 < gamma <= 0.5 + 1e-12

    def test_natural_weights_solve_dimension_identity(self):
        w = natural_weights((1 / 3, 1 / 3))
        assert_allclose(w, (0.5, 0.5), atol=1e-12)


class TestWords:
    def test_interval_two_letter_word(self, cantor):
        lo, hi = word_interval(cantor, (2, 1))
        assert lo == pytest.approx(2 / 3, abs=1e-15)
        assert hi == pytest.approx(7 / 9, abs=1e-15)
        assert word_measure(cantor, (2, 1)) == pytest.approx(0.25)

    def test_single_letter(self, cantor):
        for i, (r, b) in enumerate(zip(cantor.ratios, cantor.offsets), 1):
            assert word_interval(cantor, (i,)) == (b, b + r)
            assert word_measure(cantor, (i,)) == cantor.weights[i - 1]

    def test_full_level_measure_sums_to_one(self, cantor):
        part = partition(cantor, 4)
        assert math.fsum(part.word_measures) == pytest.approx(1.0, abs=1e-12)

    def test_word_ratio_product(self, cantor):
        assert word_ratio(cantor, (1, 2, 1)) == pytest.approx((1 / 3) ** 3)


class TestPartition:
    def test_cantor_level_two(self, cantor):
        part = partition(cantor, 2)
        assert part.words == ((1, 1), (1, 2), (2, 1), (2, 2))
        assert_allclose(part.word_measures, 0.25)

    def test_level_one_is_alphabet(self, cantor):
        part = partition(cantor, 1)
        assert part.words == ((1,), (2,))

    def test_uneven_ratios_against_brute_force(self):
        spec = validate_ifs(IfsSpec((0.5, 0.25), (0.0, 0.75), (0.5, 0.5)))
        part = partition(spec, 2)
        r_max_n = 0.5 ** 2
        expected = []
        for length in range(1, 5):
            for word in np.ndindex(*(2,) * length):
                w = tuple(i + 1 for i in word)
                r_pref = word_ratio(spec, w[:-1])
                if r_pref > r_max_n >= word_ratio(spec, w):
                    expected.append(w)
        assert sorted(part.words) == sorted(expected)
        assert set(part.words) == {(1, 1), (1, 2), (2,)}

    def test_size_cap(self, cantor):
        with pytest.raises(SizeError):
            partition(cantor, 6, cap=10)


class TestNeighborhood:
    def test_left_fixed_point(self, cantor):
        for n in (1, 3, 5):
            approx = neighborhood(cantor, 0.0, n)
            assert approx.support_words == ((1,) * n,)
            assert approx.total_mass == pytest.approx(2.0 ** -n)

    def test_shared_endpoint_is_single_word(self, cantor):
        approx = neighborhood(cantor, 1 / 3, 1)
        assert approx.support_words == ((1,),)
        assert approx.total_mass == pytest.approx(0.5)

    def test_touching_intervals_give_two_words(self, lebesgue):
        approx = neighborhood(lebesgue, 0.5, 1)
        assert approx.support_words == ((1,), (2,))
        assert approx.total_mass == pytest.approx(1.0)

    def test_gap_point_raises(self, cantor):
        with pytest.raises(NotInSupportError):
            neighborhood(cantor, 0.5, 1)

    def test_diameter_bound(self, cantor):
        for n in (1, 2, 4):
            approx = neighborhood(cantor, 2 / 3, n)
            assert approx.diameter <= 2 * (1 / 3) ** n + 1e-15


class TestDiscreteMeasure:
    def test_cantor_level_one_atoms(self, cantor):
        dm = discrete_measure(cantor, 1)
        assert_allclose(dm.positions, [0.0, 2 / 3])
        assert_allclose(dm.masses, [0.5, 0.5])

    def test_lebesgue_uniform_atoms(self, lebesgue):
        k = 5
        dm = discrete_measure(lebesgue, k)
        assert_allclose(dm.positions, np.arange(2 ** k) / 2 ** k)
        assert_allclose(dm.masses, 2.0 ** -k)

    def test_total_mass_one(self, cantor):
        dm = discrete_measure(cantor, 7)
        assert math.fsum(dm.masses) == pytest.approx(1.0, abs=1e-12)

    def test_size_cap(self, cantor):
        with pytest.raises(SizeError):
            discrete_measure(cantor, 9, cap=100)

    def test_prefix_slice_masses(self, cantor):
        dm = discrete_measure(cantor, 5)
        sl = dm.prefix_slice((2, 1))
        assert math.fsum(dm.masses[sl]) == pytest.approx(0.25, abs=1e-14)
        lo, hi = word_interval(cantor, (2, 1))
        assert np.all((dm.positions[sl] >= lo) & (dm.positions[sl] <= hi))


class TestApproximantPairing:
    def test_constant_pairs_to_exactly_one(self, cantor):
        dm = discrete_measure(cantor, 6)
        for x, n in ((0.0, 2), (2 / 3, 4), (1 / 3, 3)):
            approx = neighborhood(cantor, x, n)
            val = inner_product_with_approximant(
                lambda y: np.ones_like(y), approx, dm)
            assert val == 1.0

    def test_identity_function_near_zero(self, cantor):
        dm = discrete_measure(cantor, 8)
        for n in (2, 4, 6):
            approx = neighborhood(cantor, 0.0, n)
            val = inner_product_with_approximant(lambda y: y, approx, dm)
            assert 0 <= val <= 2 * (1 / 3) ** n

    def test_modulus_of_continuity_bound(self, cantor):
        dm = discrete_measure(cantor, 8)
        g = np.sin  # Lipschitz constant 1
        for x in (0.0, 2 / 3, 2 / 9):
            for n in (2, 3, 5):
                approx = neighborhood(cantor, x, n)
                val = inner_product_with_approximant(g, approx, dm)
                assert abs(val - g(x)) <= 2 * (1 / 3) ** n

    def test_coarser_atoms_rejected(self, cantor):
        dm = discrete_measure(cantor, 2)
        approx = neighborhood(cantor, 0.0, 4)
        with pytest.raises(ValueError):
            inner_product_with_approximant(lambda y: y, approx, dm)
