import math

import numpy as np
import pytest

from spectral_appraise.classic import (
    ClusterSizeLaw,
    EpochAwareLaw,
    FacilityLocation,
    PowerSizeLaw,
    build_similarity,
    facility_location_bruteforce,
    scaling_law_value,
)
from spectral_appraise.errors import InvalidArgumentError


class TestBuildSimilarity:
    def test_rbf_self_similarity_is_one(self, rng):
        sim = build_similarity(rng.standard_normal((5, 3)), "rbf", top_k=5)
        for j in range(5):
            assert sim.col_values[j][0] == pytest.approx(1.0)
            assert sim.col_indices[j][0] == j

    def test_rbf_line_points_golden(self):
        design = np.array([[0.0], [1.0], [2.0]])
        sim = build_similarity(design, "rbf", top_k=3, sigma=1.0)
        col = dict(zip(sim.col_indices[0].tolist(), sim.col_values[0].tolist()))
        assert col[0] == pytest.approx(1.0)
        assert col[1] == pytest.approx(math.exp(-1.0))
        assert col[2] == pytest.approx(math.exp(-4.0))

    def test_top_one_keeps_column_maximum(self, rng):
        design = rng.standard_normal((6, 2))
        sim = build_similarity(design, "rbf", top_k=1, sigma=2.0)
        for j in range(6):
            assert sim.col_indices[j].size == 1
            assert sim.col_indices[j][0] == j  # self-similarity 1 dominates

    def test_tie_break_prefers_lower_index(self):
        design = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        sim = build_similarity(design, "dot", top_k=1)
        # rows 0 and 1 are identical; each column's single slot goes to row 0
        assert sim.col_indices[0][0] == 0
        assert sim.col_indices[1][0] == 0

    def test_cosine_zero_row_rejected(self):
        design = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(InvalidArgumentError, match="row 1"):
            build_similarity(design, "cosine", top_k=2)

    def test_dot_kernel_clamps_negative(self):
        design = np.array([[1.0], [-1.0]])
        sim = build_similarity(design, "dot", top_k=2)
        assert np.all(sim.col_values[0] >= 0.0)

    def test_unknown_kernel_and_bad_params(self, rng):
        design = rng.standard_normal((3, 2))
        with pytest.raises(InvalidArgumentError):
            build_similarity(design, "poly", top_k=2)
        with pytest.raises(InvalidArgumentError):
            build_similarity(design, "rbf", top_k=0)
        with pytest.raises(InvalidArgumentError):
            build_similarity(design, "rbf", top_k=2, sigma=0.0)


class TestFacilityLocation:
    def test_gain_from_empty_is_row_mass(self, rng):
        sim = build_similarity(rng.standard_normal((7, 3)), "rbf", top_k=7, sigma=2.0)
        fl = FacilityLocation(sim)
        cols, vals = sim.row_view(4)
        assert fl.gain(4) == pytest.approx(float(vals.sum()))

    def test_duplicate_selection_gains_nothing(self, rng):
        sim = build_similarity(rng.standard_normal((6, 2)), "rbf", top_k=6, sigma=2.0)
        fl = FacilityLocation(sim)
        fl.commit(2)
        assert fl.gain(2) == 0.0

    def test_incremental_matches_bruteforce(self, rng):
        design = rng.standard_normal((8, 3))
        sim = build_similarity(design, "rbf", top_k=8, sigma=2.0)
        fl = FacilityLocation(sim)
        selected = []
        for step in (3, 0, 6, 1):
            for cand in range(8):
                if cand in selected:
                    continue
                brute = facility_location_bruteforce(
                    sim, selected + [cand]
                ) - facility_location_bruteforce(sim, selected)
                assert fl.gain(cand) == pytest.approx(brute, abs=1e-12)
            fl.commit(step)
            selected.append(step)
            assert fl.eval() == pytest.approx(
                facility_location_bruteforce(sim, selected), abs=1e-12
            )

    def test_exact_diminishing_returns_on_small_instances(self, rng):
        for trial in range(10):
            gen = np.random.default_rng(trial)
            sim = build_similarity(
                gen.standard_normal((8, 2)), "rbf", top_k=8, sigma=3.0
            )
            elements = list(range(8))
            for _ in range(30):
                gen.shuffle(elements)
                small_set = elements[:2]
                big_set = elements[:5]
                s = elements[6]
                small = FacilityLocation(sim)
                for i in small_set:
                    small.commit(i)
                big = FacilityLocation(sim)
                for i in big_set:
                    big.commit(i)
                assert small.gain(s) >= big.gain(s) - 1e-12
                assert big.gain(s) >= 0.0

    def test_removal_unsupported(self, rng):
        sim = build_similarity(rng.standard_normal((4, 2)), "rbf", top_k=4)
        fl = FacilityLocation(sim)
        with pytest.raises(InvalidArgumentError):
            fl.gain(0, rho=-1)

    def test_out_of_range(self, rng):
        sim = build_similarity(rng.standard_normal((4, 2)), "rbf", top_k=4)
        with pytest.raises(InvalidArgumentError):
            FacilityLocation(sim).gain(9)


class TestPowerSizeLaw:
    def test_golden_value(self):
        law = PowerSizeLaw(offset=1.0, coeff=1.0, exponent=1.0)
        assert law.value(2) == pytest.approx(0.5)

    def test_empty_sentinel_and_epsilon_mode(self):
        assert PowerSizeLaw().value(0) == -math.inf
        soft = PowerSizeLaw(empty_epsilon=1e-3)
        assert soft.value(0) == soft.value(1e-3)

    def test_second_differences_diminish(self):
        law = PowerSizeLaw(offset=1.0, coeff=1.0, exponent=0.7)
        sizes = np.arange(1, 10_001)
        vals = np.array([law.value(k) for k in sizes])
        first = np.diff(vals)
        assert np.all(np.diff(first) <= 1e-12)

    def test_invalid_parameters(self):
        with pytest.raises(InvalidArgumentError):
            PowerSizeLaw(coeff=-1.0)
        with pytest.raises(InvalidArgumentError):
            PowerSizeLaw(exponent=0.0)


class TestClusterSizeLaw:
    def test_golden_value(self):
        law = ClusterSizeLaw(offset=1.0, shifts=(1.0, 2.0), exponents=(0.5, 1.0))
        assert law.value([3, 1]) == pytest.approx(1 - (4**-0.5 + 3**-1.0))

    def test_second_differences_per_domain(self):
        law = ClusterSizeLaw(offset=0.0, shifts=(0.5,), exponents=(0.8,))
        vals = np.array([law.value([k]) for k in range(1, 10_001)])
        first = np.diff(vals)
        assert np.all(np.diff(first) <= 1e-12)

    def test_validation(self):
        with pytest.raises(InvalidArgumentError):
            ClusterSizeLaw(offset=0.0, shifts=(1.0,), exponents=(0.5, 0.5))
        law = ClusterSizeLaw(offset=0.0, shifts=(1.0,), exponents=(0.5,))
        with pytest.raises(InvalidArgumentError):
            law.value([1, 2])
        with pytest.raises(InvalidArgumentError):
            law.value([-1])


class TestEpochAwareLaw:
    def test_budget_saturation(self):
        law = EpochAwareLaw(budget=1000.0, coeff=2.0, exponent=0.7, half_life=3.0)
        saturated = 2.0 * 1000.0 ** (-0.7)
        assert law.loss(1000.0) == pytest.approx(saturated)
        assert law.loss(5000.0) == pytest.approx(saturated)

    def test_zero_size_sentinel(self):
        law = EpochAwareLaw(budget=100.0)
        assert law.loss(0) == math.inf
        assert law.value(0) == -math.inf

    def test_continuity_at_epoch_boundaries(self):
        law = EpochAwareLaw(budget=1000.0, coeff=1.3, exponent=0.6, half_life=2.5)
        for j in range(2, 11):
            boundary = 1000.0 / j
            eps = 1e-9 * boundary
            jump = abs(law.loss(boundary - eps) - law.loss(boundary + eps))
            assert jump <= 1e-6 * abs(law.loss(boundary))

    def test_monotone_nonincreasing_on_grid(self):
        law = EpochAwareLaw(budget=500.0, coeff=1.0, exponent=0.5, half_life=2.0)
        grid = np.linspace(1e-3, 1000.0, 10_000)
        vals = np.array([law.loss(d) for d in grid])
        assert np.all(np.diff(vals) <= 1e-12 * np.abs(vals[:-1]))

    def test_derivative_jumps_nonnegative(self):
        law = EpochAwareLaw(budget=1000.0, coeff=1.0, exponent=0.5, half_life=2.0)
        for j in range(2, 11):
            boundary = 1000.0 / j
            h = 1e-6 * boundary
            left = (law.loss(boundary) - law.loss(boundary - h)) / h
            right = (law.loss(boundary + h) - law.loss(boundary)) / h
            assert right - left >= -1e-9

    def test_value_second_differences_diminish(self):
        law = EpochAwareLaw(budget=20_000.0, coeff=1.0, exponent=0.5, half_life=2.0)
        sizes = np.arange(1, 10_001)
        vals = np.array([law.value(k) for k in sizes])
        first = np.diff(vals)
        assert np.all(np.diff(first) <= 1e-10 * np.maximum(np.abs(first[:-1]), 1e-30))

    def test_invalid_budget(self):
        with pytest.raises(InvalidArgumentError):
            EpochAwareLaw(budget=0.0)

    def test_dispatch_helper(self):
        law = PowerSizeLaw(offset=1.0, coeff=1.0, exponent=1.0)
        assert scaling_law_value(law, 2) == pytest.approx(0.5)
        cluster = ClusterSizeLaw(offset=1.0, shifts=(1.0,), exponents=(1.0,))
        assert scaling_law_value(cluster, [1]) == pytest.approx(0.5)
