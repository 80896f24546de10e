"""Two-stage quantum piggybank session.

Stage 1: Bob draws a private cover angle chi and a private rotation phi and
sends n_cover photons polarized at chi + phi.

Stage 2: Alice applies her secret grid rotation theta to every cover photon
and returns them; afterwards she sends each message bit b as m_message
photons prepared at message_basis + b*pi/2 and counter-rotated by theta's
inverse, so only someone who knows theta can read them.

Stage 3: Bob counts arrivals against expectations, undoes phi, estimates
theta from the returned cover by tomography (subtracting the chi he kept),
snaps the estimate to the public grid, then unlocks the message photons and
decodes each bit by majority vote.

Channel legs optionally pass through an eavesdropper.  When she takes
photons from a leg she is modeled as splicing in a lossless line of her own,
so her removals stand in for the loss Bob would otherwise attribute to the
channel; on untouched legs photons drop independently at the configured loss
rate.  With a lossless channel any deficit at all is flagged, which is the
whole security story for small m.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .adversary import (
    AttackMode,
    AttackStrategy,
    DetectionReport,
    detect,
    eve_decode_message,
    eve_estimate_theta,
    siphon,
)
from .errors import ConfigError, EmptyBatch
from .qubit import (
    PERIOD,
    Outcome,
    PhotonBatch,
    Qubit,
    Rotation,
    Stage,
    canonical,
    linear_state,
    measure,
    rotate,
)
from .tomography import AngleGrid, estimate_angle, snap_to_grid

VERDICT_OK = "OK"
VERDICT_ABORT = "ABORT_DETECTED"


def derive_seed(*parts: int) -> int:
    """Stable per-trial seed from an index path, e.g. (base, row, trial)."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


@dataclass(frozen=True)
class SessionConfig:
    """All public parameters of one session.

    m_message is held well below n_cover (default guard: a quarter) because
    the message photons are the exposed part of the exchange; the security
    argument needs them scarce.
    """

    n_cover: int = 1024
    m_message: int = 3
    grid_size: int = 8
    message_basis: float = 0.0
    message_bits: str = "1"
    seed: int = 0
    loss_rate: float = 0.0
    confidence: float = 0.99
    guard_ratio: float = 0.25

    def __post_init__(self) -> None:
        if self.n_cover < 2:
            raise ConfigError(f"n_cover must be >= 2, got {self.n_cover}")
        if self.m_message < 1:
            raise ConfigError(f"m_message must be >= 1, got {self.m_message}")
        if self.m_message > self.guard_ratio * self.n_cover:
            raise ConfigError(
                f"m_message = {self.m_message} exceeds guard "
                f"{self.guard_ratio} * n_cover = {self.guard_ratio * self.n_cover}"
            )
        if self.grid_size < 2:
            raise ConfigError(f"grid_size must be >= 2, got {self.grid_size}")
        if not self.message_bits or any(b not in "01" for b in self.message_bits):
            raise ConfigError(f"message_bits must be a nonempty 0/1 string, got {self.message_bits!r}")
        if not 0.0 <= self.loss_rate < 1.0:
            raise ConfigError(f"loss_rate must be in [0, 1), got {self.loss_rate}")
        if not 0.0 < self.confidence < 1.0:
            raise ConfigError(f"confidence must be in (0, 1), got {self.confidence}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")

    @property
    def grid(self) -> AngleGrid:
        return AngleGrid(self.grid_size)

    @property
    def bits(self) -> list[int]:
        return [int(b) for b in self.message_bits]


@dataclass(frozen=True)
class BobState:
    """What Bob keeps to himself between stages 1 and 3."""

    phi: float
    chi: float


@dataclass(frozen=True)
class AliceState:
    theta_index: int
    theta: float


def bob_stage1(
    config: SessionConfig,
    rng: np.random.Generator,
    phi: float | None = None,
    chi: float | None = None,
) -> tuple[BobState, PhotonBatch]:
    """Emit n_cover photons at chi + phi; both angles stay with Bob."""
    if phi is None:
        phi = float(rng.random() * PERIOD)
    if chi is None:
        chi = float(rng.random() * PERIOD)
    rot = Rotation(phi)
    photons = [rotate(linear_state(chi), rot) for _ in range(config.n_cover)]
    batch = PhotonBatch.fresh(photons, Stage.COVER_OUT)
    return BobState(phi=canonical(phi), chi=canonical(chi)), batch


def alice_stage2(
    batch: PhotonBatch,
    config: SessionConfig,
    rng: np.random.Generator,
    theta_index: int | None = None,
) -> tuple[AliceState, PhotonBatch, PhotonBatch]:
    """Rotate the cover by a secret grid angle and prepare the message.

    Returns (state, cover_return, message).  The message carries one group of
    m_message photons per bit, counter-rotated by theta's inverse; slots are
    assigned so group i owns slots [i*m, (i+1)*m).
    """
    if len(batch) == 0:
        raise EmptyBatch("no cover photons reached stage 2")
    grid = config.grid
    if theta_index is None:
        theta_index = int(rng.integers(grid.size))
    theta = grid.angle(theta_index)
    rot = Rotation(theta)
    unrot = rot.adjoint()
    cover_return = PhotonBatch(
        photons=[rotate(q, rot) for q in batch.photons],
        slots=list(batch.slots),
        stage=Stage.COVER_RETURN,
    )
    message_photons: list[Qubit] = []
    for bit in config.bits:
        angle = config.message_basis + bit * (PERIOD / 2)
        for _ in range(config.m_message):
            message_photons.append(rotate(linear_state(angle), unrot))
    message = PhotonBatch.fresh(message_photons, Stage.MESSAGE)
    return AliceState(theta_index=theta_index, theta=theta), cover_return, message


@dataclass(frozen=True)
class BobResult:
    report: DetectionReport
    theta_estimate_raw: float | None
    theta_hat_index: int | None
    theta_hat: float | None
    decoded_bits: str | None
    tie_flags: list[bool]
    tallies: list[tuple[int, int]]
    verdict: str


def bob_stage3(
    bob: BobState,
    cover_return: PhotonBatch,
    message: PhotonBatch,
    config: SessionConfig,
    rng: np.random.Generator,
) -> BobResult:
    """Account, estimate, snap, decode.

    Accounting runs first: the cover makes a round trip (two lossy passes),
    the message one pass.  A flagged deficit aborts the session before any
    decoding, yielding no bits by policy.
    """
    n_bits = len(config.bits)
    cover_span_loss = 1.0 - (1.0 - config.loss_rate) ** 2
    report = detect(
        expected=[config.n_cover, config.m_message * n_bits],
        received=[len(cover_return), len(message)],
        loss_rates=[cover_span_loss, config.loss_rate],
        confidence=config.confidence,
        stages=[Stage.COVER_RETURN.value, Stage.MESSAGE.value],
    )
    if report.detected or len(cover_return) < 2:
        return BobResult(
            report=report,
            theta_estimate_raw=None,
            theta_hat_index=None,
            theta_hat=None,
            decoded_bits=None,
            tie_flags=[],
            tallies=[],
            verdict=VERDICT_ABORT,
        )

    undo_phi = Rotation(bob.phi).adjoint()
    undone = [rotate(q, undo_phi) for q in cover_return.photons]
    estimate = estimate_angle(undone, rng)
    theta_raw = canonical(estimate.estimate - bob.chi)
    grid = config.grid
    theta_hat_index = snap_to_grid(theta_raw, grid)
    theta_hat = grid.angle(theta_hat_index)

    unlock = Rotation(theta_hat)
    ones = [0] * n_bits
    zeros = [0] * n_bits
    for q, slot in zip(message.photons, message.slots):
        group = slot // config.m_message
        outcome = measure(rotate(q, unlock), config.message_basis, rng)
        if outcome is Outcome.ALIGNED:
            zeros[group] += 1
        else:
            ones[group] += 1
    decoded = []
    ties = []
    for i in range(n_bits):
        decoded.append("1" if ones[i] > zeros[i] else "0")
        ties.append(ones[i] == zeros[i])
    return BobResult(
        report=report,
        theta_estimate_raw=theta_raw,
        theta_hat_index=theta_hat_index,
        theta_hat=theta_hat,
        decoded_bits="".join(decoded),
        tie_flags=ties,
        tallies=list(zip(zeros, ones)),
        verdict=VERDICT_OK,
    )


class _EveRuntime:
    """Eve's state across the three legs of one session.

    She applies the strategy, hoards what she takes, and forms her own theta
    estimate by differencing the two cover legs.  She sees photon batches and
    public config only.
    """

    def __init__(self, strategy: AttackStrategy, message_basis: float, rng: np.random.Generator):
        self.strategy = strategy
        self.basis = message_basis
        self.rng = rng
        self.taken: dict[str, int] = {}
        self.resent: dict[str, int] = {}
        self.out_sample: list[Qubit] = []
        self.ret_sample: list[Qubit] = []
        self.out_estimate: float | None = None
        self.ret_estimate: float | None = None
        self.theta_hat: float | None = None
        self.guesses: list[tuple[int, int]] = []

    @property
    def active(self) -> bool:
        return self.strategy.mode is not AttackMode.NONE

    def _split(self, batch: PhotonBatch, requested: int) -> tuple[PhotonBatch, PhotonBatch]:
        take = min(requested, len(batch))
        taken, rest = siphon(batch, take, self.rng)
        self.taken[batch.stage.value] = len(taken)
        return taken, rest

    def _resend_at(self, angle: float, taken: PhotonBatch, rest: PhotonBatch) -> PhotonBatch:
        fresh = [(slot, linear_state(angle)) for slot in taken.slots]
        merged = sorted(
            [(s, q) for s, q in zip(rest.slots, rest.photons)] + fresh, key=lambda t: t[0]
        )
        self.resent[rest.stage.value] = len(fresh)
        return PhotonBatch(
            photons=[q for _, q in merged], slots=[s for s, _ in merged], stage=rest.stage
        )

    def tap_cover(self, batch: PhotonBatch, requested: int, outbound: bool) -> PhotonBatch:
        taken, rest = self._split(batch, requested)
        if len(taken) == 0:
            return rest
        if self.strategy.mode is AttackMode.SIPHON:
            # hoard now, estimate once both legs are in hand
            if outbound:
                self.out_sample = taken.photons
            else:
                self.ret_sample = taken.photons
            return rest
        # intercept-resend must act in flight: estimate this leg, refill slots
        est = 0.0
        if len(taken) >= 2:
            est = estimate_angle(taken.photons, self.rng).estimate
        if outbound:
            self.out_estimate = est
        else:
            self.ret_estimate = est
        return self._resend_at(est, taken, rest)

    def finish_cover_estimate(self) -> None:
        if self.strategy.mode is AttackMode.SIPHON:
            if len(self.out_sample) >= 2 and len(self.ret_sample) >= 2:
                self.theta_hat = eve_estimate_theta(
                    self.out_sample, self.ret_sample, self.rng, grid=self.strategy.eve_grid
                )
        elif self.out_estimate is not None and self.ret_estimate is not None:
            diff = canonical(self.ret_estimate - self.out_estimate)
            self.theta_hat = self.strategy.eve_grid.angle(
                snap_to_grid(diff, self.strategy.eve_grid)
            )

    def tap_message(self, batch: PhotonBatch, requested: int) -> PhotonBatch:
        taken, rest = self._split(batch, requested)
        if len(taken) == 0:
            return rest
        theta_guess = self.theta_hat if self.theta_hat is not None else 0.0
        bits = eve_decode_message(taken.photons, theta_guess, self.basis, self.rng)
        self.guesses = list(zip(taken.slots, bits))
        if self.strategy.mode is AttackMode.INTERCEPT_RESEND:
            unrot = Rotation(theta_guess).adjoint()
            fresh = []
            for slot, bit in self.guesses:
                angle = self.basis + bit * (PERIOD / 2)
                fresh.append((slot, rotate(linear_state(angle), unrot)))
            merged = sorted(
                [(s, q) for s, q in zip(rest.slots, rest.photons)] + fresh, key=lambda t: t[0]
            )
            self.resent[batch.stage.value] = len(fresh)
            return PhotonBatch(
                photons=[q for _, q in merged], slots=[s for s, _ in merged], stage=batch.stage
            )
        return rest

    def summary(self) -> dict[str, Any] | None:
        touched = sum(self.taken.values()) + sum(self.resent.values())
        if not self.active or touched == 0:
            return None
        return {
            "mode": self.strategy.mode.value,
            "taken": dict(self.taken),
            "resent": dict(self.resent),
            "theta_hat": self.theta_hat,
            "guesses": [[slot, bit] for slot, bit in self.guesses],
            "read_message": bool(self.guesses),
        }


@dataclass
class QuantumTranscript:
    """Full record of one session: public config, both private angles (this
    is the experimenter's god view, not anything transmitted), per-leg photon
    accounting, Bob's estimate, the decode, and Eve's haul if she acted."""

    n_cover: int
    m_message: int
    grid_size: int
    message_basis: float
    message_bits: str
    seed: int
    loss_rate: float
    confidence: float
    phi: float
    chi: float
    theta: float | None
    theta_index: int | None
    theta_estimate_raw: float | None
    theta_hat: float | None
    theta_hat_index: int | None
    legs: list[dict]
    decoded_bits: str | None
    tie_flags: list[bool]
    tallies: list[tuple[int, int]]
    verdict: str
    detected: bool
    bit_errors: int | None
    eve: dict | None = None
    photon_log: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "n_cover": self.n_cover,
            "m_message": self.m_message,
            "grid_size": self.grid_size,
            "message_basis": self.message_basis,
            "message_bits": self.message_bits,
            "seed": self.seed,
            "loss_rate": self.loss_rate,
            "confidence": self.confidence,
            "phi": self.phi,
            "chi": self.chi,
            "theta": self.theta,
            "theta_index": self.theta_index,
            "theta_estimate_raw": self.theta_estimate_raw,
            "theta_hat": self.theta_hat,
            "theta_hat_index": self.theta_hat_index,
            "legs": self.legs,
            "decoded_bits": self.decoded_bits,
            "tie_flags": self.tie_flags,
            "tallies": [list(t) for t in self.tallies],
            "verdict": self.verdict,
            "detected": self.detected,
            "bit_errors": self.bit_errors,
            "eve": self.eve,
        }
        if self.photon_log is not None:
            d["photon_log"] = self.photon_log
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _state_angle(q: Qubit) -> float:
    """Polarization angle of a real-amplitude state (debug views only)."""
    return canonical(math.atan2(q.amp1.real, q.amp0.real))


def _lossy_pass(
    batch: PhotonBatch, loss_rate: float, rng: np.random.Generator
) -> tuple[PhotonBatch, int]:
    """Drop each photon independently with probability loss_rate."""
    if loss_rate <= 0.0 or len(batch) == 0:
        return batch, 0
    keep = rng.random(len(batch)) >= loss_rate
    photons = [q for q, k in zip(batch.photons, keep) if k]
    slots = [s for s, k in zip(batch.slots, keep) if k]
    lost = len(batch) - len(photons)
    return PhotonBatch(photons=photons, slots=slots, stage=batch.stage), lost


def run_session(
    config: SessionConfig,
    strategy: AttackStrategy | None = None,
    god_view: bool = False,
) -> QuantumTranscript:
    """Run one full session, fully deterministic given config.seed.

    An eavesdropper taking zero photons leaves the run bit-identical to one
    with no eavesdropper at all.
    """
    rng = np.random.default_rng(config.seed)
    strategy = strategy if strategy is not None else AttackStrategy.null()
    eve = _EveRuntime(strategy, config.message_basis, rng)

    legs: list[dict] = []
    photon_log: dict | None = {} if god_view else None

    def transit(batch: PhotonBatch, tap, requested: int) -> PhotonBatch:
        sent = len(batch)
        stage = batch.stage.value
        take = min(requested, sent) if eve.active else 0
        if take > 0:
            delivered = tap(batch)
            lost = 0
        else:
            delivered, lost = _lossy_pass(batch, config.loss_rate, rng)
        legs.append(
            {
                "stage": stage,
                "sent": sent,
                "received": len(delivered),
                "taken": eve.taken.get(stage, 0),
                "resent": eve.resent.get(stage, 0),
                "lost": lost,
            }
        )
        return delivered

    bob_state, cover_out = bob_stage1(config, rng)
    if photon_log is not None:
        photon_log["cover_out"] = [_state_angle(q) for q in cover_out.photons]

    at_alice = transit(
        cover_out, lambda b: eve.tap_cover(b, strategy.cover_out_take, outbound=True),
        strategy.cover_out_take,
    )

    theta = theta_index = None
    decoded = None
    result: BobResult | None = None

    if len(at_alice) == 0:
        verdict, detected = VERDICT_ABORT, True
        tie_flags: list[bool] = []
        tallies: list[tuple[int, int]] = []
        theta_raw = theta_hat = theta_hat_index = None
    else:
        alice_state, cover_return, message = alice_stage2(at_alice, config, rng)
        theta, theta_index = alice_state.theta, alice_state.theta_index
        if photon_log is not None:
            photon_log["cover_return"] = [_state_angle(q) for q in cover_return.photons]
            photon_log["message"] = [_state_angle(q) for q in message.photons]

        back_at_bob = transit(
            cover_return,
            lambda b: eve.tap_cover(b, strategy.cover_return_take, outbound=False),
            strategy.cover_return_take,
        )
        eve.finish_cover_estimate()
        message_at_bob = transit(
            message, lambda b: eve.tap_message(b, strategy.message_take), strategy.message_take
        )

        result = bob_stage3(bob_state, back_at_bob, message_at_bob, config, rng)
        verdict, detected = result.verdict, result.report.detected
        decoded = result.decoded_bits
        tie_flags, tallies = result.tie_flags, result.tallies
        theta_raw = result.theta_estimate_raw
        theta_hat, theta_hat_index = result.theta_hat, result.theta_hat_index
        for leg in legs:
            for check in result.report.legs:
                if check.stage == leg["stage"]:
                    leg["threshold"] = check.threshold
                    leg["deficit_detected"] = check.deficit_detected

    bit_errors = None
    if decoded is not None:
        bit_errors = sum(a != b for a, b in zip(decoded, config.message_bits))

    eve_summary = eve.summary()
    if eve_summary is not None and eve_summary["guesses"]:
        truth = config.bits
        hits = sum(
            1 for slot, bit in eve_summary["guesses"] if truth[slot // config.m_message] == bit
        )
        eve_summary["accuracy"] = hits / len(eve_summary["guesses"])
    elif eve_summary is not None:
        eve_summary["accuracy"] = None

    return QuantumTranscript(
        n_cover=config.n_cover,
        m_message=config.m_message,
        grid_size=config.grid_size,
        message_basis=config.message_basis,
        message_bits=config.message_bits,
        seed=config.seed,
        loss_rate=config.loss_rate,
        confidence=config.confidence,
        phi=bob_state.phi,
        chi=bob_state.chi,
        theta=theta,
        theta_index=theta_index,
        theta_estimate_raw=theta_raw,
        theta_hat=theta_hat,
        theta_hat_index=theta_hat_index,
        legs=legs,
        decoded_bits=decoded,
        tie_flags=tie_flags,
        tallies=tallies,
        verdict=verdict,
        detected=detected,
        bit_errors=bit_errors,
        eve=eve_summary,
        photon_log=photon_log,
    )
