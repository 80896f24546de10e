"""Deterministic simulator and analysis toolkit for piggybank key exchange.

Two protocol families share one idea: the secret rides inside a container
only the intended party can open.  Classically the container is an RSA-style
one-way transform; in the quantum variant it is a random polarization
rotation that an eavesdropper cannot estimate from the few photons she can
safely steal.
"""

__version__ = "0.1.0"

from .adversary import (
    AttackMode,
    AttackStrategy,
    DetectionReport,
    LegCheck,
    detect,
    detection_threshold,
    eve_decode_message,
    eve_estimate_theta,
    eve_required_photons_empirical,
    eve_snap_accuracy,
    siphon,
)
from .classical import (
    ClassicalTranscript,
    EncodedMessage,
    HashMode,
    HashSpec,
    PiggyBankKeys,
    alice_encode,
    bob_recover,
    forward,
    keygen,
    run_classical_session,
)
from .errors import (
    ConfigError,
    EmptyBatch,
    ExponentNotCoprime,
    HashOutOfRange,
    InputOutOfRange,
    InsufficientPhotons,
    NonPrimeFactor,
    PatternMismatch,
    PiggybankError,
    QubitConsumed,
    RecoveryMismatch,
    SecretOutOfRange,
    SiphonExceedsBatch,
)
from .game import (
    EXPECTED_PATTERN,
    GameCell,
    GameMatrixResult,
    Verdict,
    evaluate_game,
    format_text_table,
)
from .protocol import (
    AliceState,
    BobResult,
    BobState,
    QuantumTranscript,
    SessionConfig,
    alice_stage2,
    bob_stage1,
    bob_stage3,
    derive_seed,
    run_session,
)
from .qubit import (
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
from .sweeps import (
    DEFAULT_SWEEP_LOSS,
    M_NOT_FOUND,
    BenchRow,
    SweepRow,
    find_required_m,
    sweep_nm,
    tomography_bench,
)
from .tomography import (
    AngleGrid,
    TomographyResult,
    empirical_success_probability,
    estimate_angle,
    estimation_trials,
    required_photons,
    snap_to_grid,
)
