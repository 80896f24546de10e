"""Eavesdropper models and the photon-accounting detector.

Eve never sees angles, only photons.  Her working attack is a difference of
estimates: tomography on a cover-out sample gives chi + phi, tomography on a
cover-return sample gives chi + phi + theta, and subtracting the two cancels
both of Bob's private angles.  Notably she never needs to know chi.

Siphoning photons leaves a counting deficit.  The detector bounds how small a
received count can credibly be: for expected photons sent over a channel with
loss rate p, anything below

    expected * (1 - p) - z(confidence) * sqrt(expected * p * (1 - p))

is flagged.  With p = 0 the band collapses and any deficit at all is flagged,
which is why every attack below assumes a lossy channel to hide in.
"""

import math
from dataclasses import dataclass
from enum import Enum
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .errors import SiphonExceedsBatch
from .qubit import (
    Outcome,
    PhotonBatch,
    Qubit,
    Rotation,
    canonical,
    linear_state,
    measure,
    rotate,
)
from .tomography import AngleGrid, estimate_angle, snap_to_grid


class AttackMode(Enum):
    NONE = "none"
    SIPHON = "siphon"
    INTERCEPT_RESEND = "intercept_resend"


@dataclass(frozen=True)
class AttackStrategy:
    """How many photons Eve takes from each leg, and what she does with them.

    SIPHON removes photons outright (counts drop); INTERCEPT_RESEND measures
    and reinjects fresh photons at her best guess, so counts balance at the
    price of state disturbance.  Takes larger than a leg are clipped to it.
    """

    mode: AttackMode = AttackMode.NONE
    cover_out_take: int = 0
    cover_return_take: int = 0
    message_take: int = 0
    eve_grid: AngleGrid = AngleGrid(8)
    eve_budget_factor: float = 1.0

    def __post_init__(self) -> None:
        for name in ("cover_out_take", "cover_return_take", "message_take"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def null(cls) -> "AttackStrategy":
        return cls()

    @property
    def total_requested(self) -> int:
        return self.cover_out_take + self.cover_return_take + self.message_take


def siphon(
    batch: PhotonBatch, count: int, rng: np.random.Generator
) -> tuple[PhotonBatch, PhotonBatch]:
    """Remove `count` uniformly chosen photons from a batch.

    Returns (taken, remainder); both preserve the original slot order.  A
    zero count touches neither the batch nor the rng.  Raises
    SiphonExceedsBatch when count > len(batch).
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if count > len(batch):
        raise SiphonExceedsBatch(f"asked for {count} of {len(batch)} photons")
    if count == 0:
        empty = PhotonBatch(photons=[], slots=[], stage=batch.stage)
        return empty, batch
    picked = set(rng.choice(len(batch), size=count, replace=False).tolist())
    t_photons, t_slots, r_photons, r_slots = [], [], [], []
    for i, (q, slot) in enumerate(zip(batch.photons, batch.slots)):
        if i in picked:
            t_photons.append(q)
            t_slots.append(slot)
        else:
            r_photons.append(q)
            r_slots.append(slot)
    taken = PhotonBatch(photons=t_photons, slots=t_slots, stage=batch.stage)
    rest = PhotonBatch(photons=r_photons, slots=r_slots, stage=batch.stage)
    return taken, rest


def eve_estimate_theta(
    cover_out_sample: Sequence[Qubit],
    cover_return_sample: Sequence[Qubit],
    rng: np.random.Generator,
    grid: AngleGrid | None = None,
) -> float:
    """Difference-of-estimates attack on Alice's rotation angle.

    Both samples are consumed.  The cover-out estimate carries chi + phi, the
    cover-return estimate chi + phi + theta; their difference mod pi isolates
    theta.  Snapped to `grid` when one is supplied.
    """
    out_est = estimate_angle(cover_out_sample, rng)
    ret_est = estimate_angle(cover_return_sample, rng)
    theta = canonical(ret_est.estimate - out_est.estimate)
    if grid is not None:
        theta = grid.angle(snap_to_grid(theta, grid))
    return theta


def eve_decode_message(
    sample: Sequence[Qubit],
    theta_hat: float,
    basis: float,
    rng: np.random.Generator,
) -> list[int]:
    """Read message photons with a guessed theta: undo the rotation, then
    measure against the public message basis.  Returns one bit per photon."""
    undo = Rotation(theta_hat)
    bits = []
    for q in sample:
        outcome = measure(rotate(q, undo), basis, rng)
        bits.append(0 if outcome is Outcome.ALIGNED else 1)
    return bits


@dataclass(frozen=True)
class LegCheck:
    stage: str
    expected: int
    received: int
    threshold: float
    deficit_detected: bool


@dataclass(frozen=True)
class DetectionReport:
    detected: bool
    legs: tuple[LegCheck, ...]


def detection_threshold(expected: int, loss_rate: float, confidence: float) -> float:
    """Smallest credible received count: binomial mean minus z(confidence)
    standard deviations.  Lossless channels tolerate no deficit at all."""
    if not 0.0 <= loss_rate < 1.0:
        raise ValueError(f"loss_rate must be in [0, 1), got {loss_rate}")
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must be in (0, 1), got {confidence}")
    mean = expected * (1.0 - loss_rate)
    sigma = math.sqrt(expected * loss_rate * (1.0 - loss_rate))
    return mean - NormalDist().inv_cdf(confidence) * sigma


def detect(
    expected: Sequence[int],
    received: Sequence[int],
    loss_rates: float | Sequence[float],
    confidence: float,
    stages: Sequence[str] | None = None,
) -> DetectionReport:
    """Photon accounting across channel legs.

    `loss_rates` may be one rate for all legs or one per leg (a round trip
    has a higher effective loss than a single pass).  A leg whose received
    count falls below its threshold flags the whole report.
    """
    if len(expected) != len(received):
        raise ValueError("expected and received must align")
    if isinstance(loss_rates, (int, float)):
        loss_rates = [float(loss_rates)] * len(expected)
    if stages is None:
        stages = [f"leg{i}" for i in range(len(expected))]
    legs = []
    for stage, exp, got, rate in zip(stages, expected, received, loss_rates):
        threshold = detection_threshold(exp, rate, confidence)
        legs.append(
            LegCheck(
                stage=stage,
                expected=exp,
                received=got,
                threshold=threshold,
                deficit_detected=got < threshold,
            )
        )
    return DetectionReport(detected=any(l.deficit_detected for l in legs), legs=tuple(legs))


def eve_snap_accuracy(
    grid: AngleGrid,
    photons_per_leg: int,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """How often the difference attack recovers the exact grid angle, given
    `photons_per_leg` photons from each cover leg."""
    hits = 0
    for _ in range(trials):
        base = rng.random() * math.pi
        idx = int(rng.integers(grid.size))
        theta = grid.angle(idx)
        out_sample = [linear_state(base) for _ in range(photons_per_leg)]
        ret_sample = [linear_state(base + theta) for _ in range(photons_per_leg)]
        theta_hat = eve_estimate_theta(out_sample, ret_sample, rng)
        if snap_to_grid(theta_hat, grid) == idx:
            hits += 1
    return hits / trials


def eve_required_photons_empirical(
    grid: AngleGrid,
    rng: np.random.Generator,
    target: float = 0.9,
    ladder: Sequence[int] | None = None,
    trials: int = 200,
) -> int | None:
    """First per-leg photon count on a doubling ladder whose snap accuracy
    reaches `target`; None if the ladder tops out first."""
    if ladder is None:
        ladder = [8, 16, 32, 64, 128, 256, 512]
    for c in ladder:
        if eve_snap_accuracy(grid, c, trials, rng) >= target:
            return c
    return None
