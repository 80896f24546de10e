"""Polarization state algebra: canonicalization, rotation, measurement."""

import math

import numpy as np
import pytest

from piggybank.errors import QubitConsumed
from piggybank.qubit import (
    PERIOD,
    Outcome,
    PhotonBatch,
    Qubit,
    Rotation,
    Stage,
    canonical,
    circular_distance,
    linear_state,
    measure,
    rotate,
    states_equal,
)


class TestCanonical:
    def test_range(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            a = float(rng.normal(scale=20.0))
            c = canonical(a)
            assert 0.0 <= c < PERIOD

    def test_period_identification(self):
        assert canonical(PERIOD) == 0.0
        assert canonical(-0.1) == pytest.approx(PERIOD - 0.1)
        assert canonical(3 * PERIOD + 0.2) == pytest.approx(0.2)

    def test_circular_distance_wraps(self):
        # 0.1 and pi - 0.1 are 0.2 apart around the seam, not pi - 0.2
        assert circular_distance(0.1, PERIOD - 0.1) == pytest.approx(0.2)
        assert circular_distance(0.3, 0.3) == 0.0

    def test_circular_distance_symmetric_and_bounded(self):
        rng = np.random.default_rng(1)
        for _ in range(300):
            a, b = rng.normal(scale=10.0, size=2)
            d = circular_distance(a, b)
            assert d == pytest.approx(circular_distance(b, a))
            assert 0.0 <= d <= PERIOD / 2 + 1e-12


class TestQubit:
    def test_norm_enforced(self):
        with pytest.raises(ValueError):
            Qubit(complex(1.0), complex(1.0))

    def test_linear_state_amplitudes(self):
        q = linear_state(0.7)
        assert q.amp0 == pytest.approx(math.cos(0.7))
        assert q.amp1 == pytest.approx(math.sin(0.7))

    def test_measurement_consumes(self):
        rng = np.random.default_rng(0)
        q = linear_state(0.2)
        measure(q, 0.0, rng)
        with pytest.raises(QubitConsumed):
            measure(q, 0.0, rng)
        with pytest.raises(QubitConsumed):
            rotate(q, Rotation(0.1))

    def test_states_equal_ignores_global_sign(self):
        q = linear_state(0.4)
        neg = Qubit(-q.amp0, -q.amp1)
        assert states_equal(q, neg)
        assert not states_equal(q, linear_state(0.5))


class TestRotation:
    def test_angle_canonicalized(self):
        assert Rotation(PERIOD + 0.3).angle == pytest.approx(0.3)
        assert Rotation(-0.3).angle == pytest.approx(PERIOD - 0.3)

    def test_matrix_orthogonal(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            m = Rotation(float(rng.random() * PERIOD)).matrix
            assert np.allclose(m @ m.T, np.eye(2), atol=1e-12)

    def test_rotation_adds_angle_to_linear_state(self):
        q = rotate(linear_state(0.2), Rotation(0.5))
        assert states_equal(q, linear_state(0.7))

    def test_adjoint_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            a = float(rng.random() * PERIOD)
            q = linear_state(float(rng.random() * PERIOD))
            r = Rotation(a)
            assert states_equal(rotate(rotate(q, r), r.adjoint()), q)

    def test_compose_adds(self):
        r = Rotation(0.4).compose(Rotation(0.5))
        assert r.angle == pytest.approx(0.9)

    def test_rotations_commute(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            a, b = rng.random(2) * PERIOD
            q = linear_state(float(rng.random() * PERIOD))
            ab = rotate(rotate(q, Rotation(a)), Rotation(b))
            ba = rotate(rotate(q, Rotation(b)), Rotation(a))
            assert states_equal(ab, ba)


class TestMeasure:
    def test_aligned_certain(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            assert measure(linear_state(0.3), 0.3, rng) is Outcome.ALIGNED

    def test_orthogonal_certain(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            assert measure(linear_state(0.3), 0.3 + PERIOD / 2, rng) is Outcome.ORTHOGONAL

    def test_malus_statistics(self):
        # P(ALIGNED) = cos^2(pi/6) = 0.75; binomial sigma ~ 0.007 at 4000 shots
        rng = np.random.default_rng(5)
        delta = PERIOD / 6
        hits = sum(
            measure(linear_state(0.0), delta, rng) is Outcome.ALIGNED for _ in range(4000)
        )
        assert hits / 4000 == pytest.approx(math.cos(delta) ** 2, abs=0.03)


class TestPhotonBatch:
    def test_fresh_numbers_slots(self):
        batch = PhotonBatch.fresh([linear_state(0.0) for _ in range(3)], Stage.COVER_OUT)
        assert batch.slots == [0, 1, 2]
        assert len(batch) == 3

    def test_slots_strictly_increasing(self):
        photons = [linear_state(0.0), linear_state(0.0)]
        with pytest.raises(ValueError):
            PhotonBatch(photons=photons, slots=[1, 1], stage=Stage.MESSAGE)

    def test_slot_photon_mismatch(self):
        with pytest.raises(ValueError):
            PhotonBatch(photons=[linear_state(0.0)], slots=[0, 1], stage=Stage.MESSAGE)

    def test_no_angle_metadata(self):
        # the batch is what an eavesdropper holds; angles must not ride along
        assert set(PhotonBatch.__dataclass_fields__) == {"photons", "slots", "stage"}
