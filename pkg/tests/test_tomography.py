"""Angle estimation: grids, snapping, the two-basis estimator, scaling."""

import math

import numpy as np
import pytest

from piggybank.errors import InsufficientPhotons
from piggybank.qubit import PERIOD, canonical, circular_distance, linear_state
from piggybank.tomography import (
    AngleGrid,
    empirical_success_probability,
    estimate_angle,
    estimation_trials,
    required_photons,
    snap_to_grid,
)


class TestAngleGrid:
    def test_spacing_and_angles(self):
        grid = AngleGrid(8)
        assert grid.spacing == pytest.approx(PERIOD / 8)
        assert grid.angle(3) == pytest.approx(3 * PERIOD / 8)
        assert len(grid.angles) == 8

    def test_index_domain(self):
        grid = AngleGrid(4)
        with pytest.raises(ValueError):
            grid.angle(4)
        with pytest.raises(ValueError):
            grid.angle(-1)

    def test_size_domain(self):
        with pytest.raises(ValueError):
            AngleGrid(0)


class TestRequiredPhotons:
    def test_powers_of_two(self):
        assert required_photons(0) == 1
        assert required_photons(3) == 8
        assert required_photons(10) == 1024

    def test_negative_resolution(self):
        with pytest.raises(ValueError):
            required_photons(-1)


class TestSnapToGrid:
    def test_matches_exhaustive_search(self):
        rng = np.random.default_rng(9)
        for size in (2, 3, 8, 16):
            grid = AngleGrid(size)
            for _ in range(200):
                a = float(rng.random() * PERIOD)
                dists = [circular_distance(a, g) for g in grid.angles]
                assert snap_to_grid(a, grid) == int(np.argmin(dists))

    def test_halfway_tie_keeps_lower_index(self):
        grid = AngleGrid(8)
        assert snap_to_grid(grid.spacing / 2, grid) == 0

    def test_wraps_near_period(self):
        grid = AngleGrid(8)
        assert snap_to_grid(PERIOD - 1e-6, grid) == 0


class TestEstimateAngle:
    def test_needs_two_photons(self):
        rng = np.random.default_rng(0)
        with pytest.raises(InsufficientPhotons):
            estimate_angle([], rng)
        with pytest.raises(InsufficientPhotons):
            estimate_angle([linear_state(0.1)], rng)

    def test_consumes_batch(self):
        rng = np.random.default_rng(0)
        batch = [linear_state(0.3) for _ in range(4)]
        estimate_angle(batch, rng)
        assert all(q.consumed for q in batch)

    def test_odd_photon_goes_to_first_basis(self):
        rng = np.random.default_rng(0)
        result = estimate_angle([linear_state(0.3) for _ in range(5)], rng)
        assert result.basis_counts == (3, 2)
        assert result.photons_used == 5

    def test_counts_bounded_by_bases(self):
        rng = np.random.default_rng(1)
        result = estimate_angle([linear_state(1.0) for _ in range(9)], rng)
        a0, a1 = result.aligned_counts
        n0, n1 = result.basis_counts
        assert 0 <= a0 <= n0 and 0 <= a1 <= n1

    def test_estimate_close_with_many_copies(self):
        rng = np.random.default_rng(10)
        true = PERIOD / 3
        batch = [linear_state(true) for _ in range(4096)]
        result = estimate_angle(batch, rng)
        assert circular_distance(result.estimate, true) < 0.05
        assert 0.0 <= result.estimate < PERIOD

    def test_snaps_when_grid_given(self):
        rng = np.random.default_rng(11)
        grid = AngleGrid(8)
        batch = [linear_state(grid.angle(5)) for _ in range(512)]
        result = estimate_angle(batch, rng, grid=grid)
        assert result.snapped == 5

    def test_estimate_is_canonical(self):
        rng = np.random.default_rng(12)
        for angle in (0.0, 1.5, PERIOD - 0.01):
            batch = [linear_state(angle) for _ in range(64)]
            est = estimate_angle(batch, rng).estimate
            assert 0.0 <= est < PERIOD
            assert est == canonical(est)


class TestEstimationTrials:
    def test_outputs_in_range(self):
        rng = np.random.default_rng(13)
        success, rmse = estimation_trials(AngleGrid(8), 64, 100, rng)
        assert 0.0 <= success <= 1.0
        assert rmse >= 0.0

    def test_more_photons_lower_rmse(self):
        rng = np.random.default_rng(14)
        _, coarse = estimation_trials(AngleGrid(8), 64, 200, rng)
        _, fine = estimation_trials(AngleGrid(8), 1024, 200, rng)
        assert fine < coarse

    def test_success_saturates_with_budget(self):
        rng = np.random.default_rng(15)
        success, _ = estimation_trials(AngleGrid(8), 1024, 200, rng)
        assert success >= 0.95

    def test_trials_domain(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            estimation_trials(AngleGrid(8), 16, 0, rng)

    def test_success_wrapper_matches(self):
        a = empirical_success_probability(AngleGrid(8), 64, 150, np.random.default_rng(16))
        b, _ = estimation_trials(AngleGrid(8), 64, 150, np.random.default_rng(16))
        assert a == b


class TestScaling:
    def test_rmse_inverse_square_root(self):
        # slope of log(rmse) vs log(c) should sit near -1/2
        grid = AngleGrid(8)
        ladder = [64, 256, 1024, 4096]
        rmses = []
        for i, c in enumerate(ladder):
            rng = np.random.default_rng(100 + i)
            _, rmse = estimation_trials(grid, c, 200, rng)
            rmses.append(rmse)
        slope = np.polyfit(np.log(ladder), np.log(rmses), 1)[0]
        assert -0.65 <= slope <= -0.35
