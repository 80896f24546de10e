"""Single-photon polarization states and the little algebra the protocol needs.

Linear polarization is periodic in pi: the states at angle a and a + pi differ
only by a global sign, which no measurement here can see.  Angles are therefore
canonicalized to [0, pi) and state comparisons are made at ray level (equality
up to that sign).
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import QubitConsumed

PERIOD = math.pi

NORM_TOL = 1e-12


class Outcome(Enum):
    ALIGNED = 0
    ORTHOGONAL = 1


def canonical(angle: float) -> float:
    """Reduce an angle to the canonical range [0, pi)."""
    a = math.fmod(angle, PERIOD)
    if a < 0.0:
        a += PERIOD
    # fmod of a tiny negative can land exactly on pi after the shift
    if a >= PERIOD:
        a = 0.0
    return a


def circular_distance(a: float, b: float) -> float:
    """Smallest separation between two angles on the period-pi circle."""
    d = abs(canonical(a) - canonical(b))
    return min(d, PERIOD - d)


@dataclass
class Qubit:
    """A single photon's polarization state, (amp0, amp1) in the H/V basis.

    Measurement destroys the photon: once measured, the value refuses any
    further rotation or measurement.  This models the no-cloning constraint
    that keeps an eavesdropper from reusing what she has already read.
    """

    amp0: complex
    amp1: complex
    consumed: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        norm = abs(self.amp0) ** 2 + abs(self.amp1) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL}")

    def _require_live(self) -> None:
        if self.consumed:
            raise QubitConsumed("photon was already measured")


def linear_state(angle: float) -> Qubit:
    """Photon linearly polarized at `angle`: cos(a)|0> + sin(a)|1>."""
    return Qubit(complex(math.cos(angle)), complex(math.sin(angle)))


@dataclass(frozen=True)
class Rotation:
    """Planar rotation R(theta) = [[cos, -sin], [sin, cos]].

    The angle is stored canonically in [0, pi); R(a + pi) = -R(a) acts
    identically on polarization rays.  Any two Rotations commute.
    """

    angle: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "angle", canonical(self.angle))

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def adjoint(self) -> "Rotation":
        """Inverse rotation R(-theta); undoes this one up to global sign."""
        return Rotation(-self.angle)

    def compose(self, other: "Rotation") -> "Rotation":
        return Rotation(self.angle + other.angle)


def rotate(q: Qubit, rot: Rotation) -> Qubit:
    """Apply a rotation, returning a fresh state; the input stays live."""
    q._require_live()
    c, s = math.cos(rot.angle), math.sin(rot.angle)
    return Qubit(c * q.amp0 - s * q.amp1, s * q.amp0 + c * q.amp1)


def measure(q: Qubit, basis: float, rng: np.random.Generator) -> Outcome:
    """Measure a photon against the linear basis {basis, basis + pi/2}.

    Args:
        q: photon to measure; consumed by this call.
        basis: analyzer angle in radians.
        rng: seeded generator; one uniform draw decides the outcome.

    Returns:
        ALIGNED with probability |<basis|q>|^2 (Malus's law for linear
        states), ORTHOGONAL otherwise.
    """
    q._require_live()
    q.consumed = True
    amp = math.cos(basis) * q.amp0 + math.sin(basis) * q.amp1
    p_aligned = min(1.0, abs(amp) ** 2)
    return Outcome.ALIGNED if rng.random() < p_aligned else Outcome.ORTHOGONAL


def states_equal(a: Qubit, b: Qubit, tol: float = NORM_TOL) -> bool:
    """Ray-level equality: states matching up to a global sign."""
    direct = max(abs(a.amp0 - b.amp0), abs(a.amp1 - b.amp1))
    flipped = max(abs(a.amp0 + b.amp0), abs(a.amp1 + b.amp1))
    return min(direct, flipped) <= tol


class Stage(Enum):
    COVER_OUT = "cover_out"
    COVER_RETURN = "cover_return"
    MESSAGE = "message"


@dataclass
class PhotonBatch:
    """Photons in flight on one channel leg.

    Slots are the photons' time positions, assigned at creation and kept when
    photons are removed, so a receiver can tell which positions went missing.
    The batch deliberately carries no angle metadata: anyone holding it learns
    only what measurement can tell them.
    """

    photons: list[Qubit]
    slots: list[int]
    stage: Stage

    def __post_init__(self) -> None:
        if len(self.photons) != len(self.slots):
            raise ValueError("photons and slots must align")
        if any(b <= a for a, b in zip(self.slots, self.slots[1:])):
            raise ValueError("slots must be strictly increasing")

    def __len__(self) -> int:
        return len(self.photons)

    @classmethod
    def fresh(cls, photons: list[Qubit], stage: Stage) -> "PhotonBatch":
        return cls(photons=photons, slots=list(range(len(photons))), stage=stage)
