"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class so
the CLI can map it to a machine-readable error record and a stable exit code.
"""


class PiggybankError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PiggybankError):
    """A run configuration is malformed or internally inconsistent."""


# --- classical exchange -----------------------------------------------------

class NonPrimeFactor(PiggybankError):
    """A key factor failed the primality check."""


class ExponentNotCoprime(PiggybankError):
    """The public exponent shares a factor with phi(n)."""


class InputOutOfRange(PiggybankError):
    """An integer input lies outside [0, n)."""


class SecretOutOfRange(PiggybankError):
    """The secret S lies outside [0, n)."""


class HashOutOfRange(PiggybankError):
    """The derived multiplier K lies outside [1, n)."""


class RecoveryMismatch(PiggybankError):
    """Decoding produced values inconsistent with the transmitted record."""


# --- quantum exchange -------------------------------------------------------

class QubitConsumed(PiggybankError):
    """A photon was measured twice; measurement destroys the state."""


class InsufficientPhotons(PiggybankError):
    """Too few photons to run the requested estimate."""


class EmptyBatch(PiggybankError):
    """A protocol stage received a batch with no photons."""


class SiphonExceedsBatch(PiggybankError):
    """An eavesdropper asked for more photons than the batch holds."""


class PatternMismatch(PiggybankError):
    """A game-matrix run did not reproduce the expected verdict pattern."""
