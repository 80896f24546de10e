"""Estimating an unknown linear polarization angle from identical copies.

The estimator splits the copies between two analyzer settings, 0 and pi/4.
With f0 and f1 the aligned fractions in each basis, Malus's law gives
E[2*f0 - 1] = cos(2a) and E[2*f1 - 1] = sin(2a), so

    a_hat = atan2(2*f1 - 1, 2*f0 - 1) / 2

recovers the angle up to the usual period-pi ambiguity.  Statistical error
shrinks like c^(-1/2) in the number of copies c.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientPhotons
from .qubit import (
    PERIOD,
    Outcome,
    Qubit,
    canonical,
    circular_distance,
    linear_state,
    measure,
)


@dataclass(frozen=True)
class AngleGrid:
    """`size` equally spaced angles i*pi/size, i = 0..size-1."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"grid size must be >= 1, got {self.size}")

    @property
    def spacing(self) -> float:
        return PERIOD / self.size

    def angle(self, index: int) -> float:
        if not 0 <= index < self.size:
            raise ValueError(f"index {index} outside grid of size {self.size}")
        return index * self.spacing

    @property
    def angles(self) -> list[float]:
        return [i * self.spacing for i in range(self.size)]


def required_photons(k: int) -> int:
    """Photon budget 2^k for a k-bit angle resolution."""
    if k < 0:
        raise ValueError(f"bit resolution must be >= 0, got {k}")
    return 2**k


def snap_to_grid(angle: float, grid: AngleGrid) -> int:
    """Index of the grid angle nearest to `angle` (period-pi circular
    distance, ties resolved toward the lower index)."""
    best_idx = 0
    best_d = circular_distance(angle, 0.0)
    for i in range(1, grid.size):
        d = circular_distance(angle, grid.angle(i))
        if d < best_d:
            best_idx, best_d = i, d
    return best_idx


@dataclass(frozen=True)
class TomographyResult:
    estimate: float
    photons_used: int
    aligned_counts: tuple[int, int]
    basis_counts: tuple[int, int]
    snapped: int | None = None


def estimate_angle(
    photons: Sequence[Qubit],
    rng: np.random.Generator,
    grid: AngleGrid | None = None,
) -> TomographyResult:
    """Two-basis estimate from a batch of identically prepared photons.

    The batch is consumed.  The first ceil(c/2) photons go to basis 0, the
    rest to basis pi/4 (the odd photon lands in basis 0).  Deterministic
    given the rng state.  Raises InsufficientPhotons for fewer than 2 copies.
    """
    c = len(photons)
    if c < 2:
        raise InsufficientPhotons(f"need at least 2 photons, got {c}")
    n0 = c - c // 2
    aligned0 = 0
    aligned1 = 0
    for i, q in enumerate(photons):
        basis = 0.0 if i < n0 else PERIOD / 4
        if measure(q, basis, rng) is Outcome.ALIGNED:
            if i < n0:
                aligned0 += 1
            else:
                aligned1 += 1
    f0 = aligned0 / n0
    f1 = aligned1 / (c - n0)
    est = canonical(0.5 * math.atan2(2.0 * f1 - 1.0, 2.0 * f0 - 1.0))
    snapped = snap_to_grid(est, grid) if grid is not None else None
    return TomographyResult(
        estimate=est,
        photons_used=c,
        aligned_counts=(aligned0, aligned1),
        basis_counts=(n0, c - n0),
        snapped=snapped,
    )


def estimation_trials(
    grid: AngleGrid,
    photons: int,
    trials: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte Carlo over random grid angles.

    Each trial prepares `photons` copies of a uniformly drawn grid angle,
    estimates and snaps.  Returns (snap success rate, RMSE of the raw
    estimate under circular distance).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    hits = 0
    sq_err = 0.0
    for _ in range(trials):
        idx = int(rng.integers(grid.size))
        true = grid.angle(idx)
        batch = [linear_state(true) for _ in range(photons)]
        result = estimate_angle(batch, rng, grid=grid)
        if result.snapped == idx:
            hits += 1
        err = circular_distance(result.estimate, true)
        sq_err += err * err
    return hits / trials, math.sqrt(sq_err / trials)


def empirical_success_probability(
    grid: AngleGrid,
    photons: int,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Fraction of trials whose snapped estimate recovers the drawn angle."""
    success, _ = estimation_trials(grid, photons, trials, rng)
    return success
