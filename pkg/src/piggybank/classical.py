"""Classical piggybank exchange built on an RSA-style one-way transform.

Bob owns the trapdoor (d) and sends Alice only f(R) = R^e mod n for a random
probe R he keeps to himself.  Alice multiplies f(R) by a secret-dependent
factor K, adds her secret S, and returns C = K*f(R) + S together with
f(K) = K^e mod n.  Bob inverts f(K) with d, strips K*f(R) from C, and reads
S.  An observer holds C, f(K), f(R) and n, e; recovering S without d requires
inverting the transform.

All arithmetic is arbitrary precision.  C may be kept unreduced (the sum as
an integer) or reduced mod n; both forms round-trip and the flag travels with
the message.
"""

from dataclasses import dataclass
from enum import Enum
from math import gcd

import numpy as np
from sympy import isprime

from .errors import (
    ExponentNotCoprime,
    HashOutOfRange,
    InputOutOfRange,
    NonPrimeFactor,
    RecoveryMismatch,
    SecretOutOfRange,
)


@dataclass(frozen=True)
class PiggyBankKeys:
    """RSA-style key material: n = p*q, e*d = 1 mod phi(n)."""

    p: int
    q: int
    e: int
    d: int
    n: int

    @property
    def phi(self) -> int:
        return (self.p - 1) * (self.q - 1)


def keygen(p: int, q: int, e: int) -> PiggyBankKeys:
    """Build keys from two primes and a public exponent.

    Raises NonPrimeFactor if p or q fails a primality check (or p == q),
    ExponentNotCoprime if gcd(e, phi) != 1.
    """
    if p < 2 or not isprime(p):
        raise NonPrimeFactor(f"p = {p} is not prime")
    if q < 2 or not isprime(q):
        raise NonPrimeFactor(f"q = {q} is not prime")
    if p == q:
        raise NonPrimeFactor("p and q must be distinct")
    phi = (p - 1) * (q - 1)
    if e < 2 or e >= phi or gcd(e, phi) != 1:
        raise ExponentNotCoprime(f"e = {e} is not a unit mod phi = {phi}")
    d = pow(e, -1, phi)
    return PiggyBankKeys(p=p, q=q, e=e, d=d, n=p * q)


def forward(x: int, n: int, e: int) -> int:
    """One-way transform f(x) = x^e mod n (modular square-and-multiply)."""
    if not 0 <= x < n:
        raise InputOutOfRange(f"x = {x} outside [0, {n})")
    return pow(x, e, n)


class HashMode(Enum):
    EXPLICIT = "explicit"
    MODULAR = "modular"


@dataclass(frozen=True)
class HashSpec:
    """Rule mapping the secret S to the multiplier K = h(S).

    EXPLICIT pins K directly (how the worked examples fix K = 5 or K = 8).
    MODULAR derives K = (S mod prime) + 2 from a small public prime, so K
    stays >= 2 and both sides compute the same value from S alone.
    """

    mode: HashMode
    k: int | None = None
    prime: int | None = None

    @classmethod
    def explicit(cls, k: int) -> "HashSpec":
        return cls(mode=HashMode.EXPLICIT, k=k)

    @classmethod
    def modular(cls, prime: int) -> "HashSpec":
        if prime < 2 or not isprime(prime):
            raise NonPrimeFactor(f"hash prime {prime} is not prime")
        return cls(mode=HashMode.MODULAR, prime=prime)

    def derive(self, s: int, n: int) -> int:
        if self.mode is HashMode.EXPLICIT:
            k = self.k if self.k is not None else 0
        else:
            assert self.prime is not None
            k = (s % self.prime) + 2
        if not 1 <= k < n:
            raise HashOutOfRange(f"K = {k} outside [1, {n})")
        return k


@dataclass(frozen=True)
class EncodedMessage:
    """What Alice transmits: C and f(K), plus the reduction convention."""

    c: int
    f_k: int
    reduced: bool


def alice_encode(
    f_r: int, s: int, hash_spec: HashSpec, n: int, e: int, reduce: bool = True
) -> EncodedMessage:
    """Combine the secret with Bob's transformed probe.

    C = K*f(R) + S, reduced mod n when `reduce` is set; f(K) = K^e mod n goes
    along so Bob can recover K with his trapdoor.
    """
    if not 0 <= f_r < n:
        raise InputOutOfRange(f"f(R) = {f_r} outside [0, {n})")
    if not 0 <= s < n:
        raise SecretOutOfRange(f"S = {s} outside [0, {n})")
    k = hash_spec.derive(s, n)
    c = k * f_r + s
    if reduce:
        c %= n
    return EncodedMessage(c=c, f_k=pow(k, e, n), reduced=reduce)


def bob_recover(msg: EncodedMessage, f_r: int, keys: PiggyBankKeys) -> tuple[int, int]:
    """Invert f(K) with the trapdoor, then strip K*f(R) out of C.

    Returns (K, S).  In unreduced mode a subtraction landing outside [0, n)
    means the record cannot have come from a well-formed encode and raises
    RecoveryMismatch; in reduced mode the residue is always in range.
    """
    k = pow(msg.f_k, keys.d, keys.n)
    if msg.reduced:
        s = (msg.c - k * f_r) % keys.n
    else:
        s = msg.c - k * f_r
        if not 0 <= s < keys.n:
            raise RecoveryMismatch(f"recovered S = {s} outside [0, {keys.n})")
    return k, s


@dataclass(frozen=True)
class ClassicalTranscript:
    """Every value exchanged in one run, plus what Bob recovered."""

    n: int
    e: int
    r: int
    f_r: int
    k: int
    s: int
    c: int
    f_k: int
    recovered_k: int
    recovered_s: int
    reduced: bool

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "e": self.e,
            "R": self.r,
            "fR": self.f_r,
            "K": self.k,
            "S": self.s,
            "C": self.c,
            "fK": self.f_k,
            "recovered_K": self.recovered_k,
            "recovered_S": self.recovered_s,
            "reduced": self.reduced,
        }


def _randbelow(rng: np.random.Generator, n: int) -> int:
    """Uniform integer in [0, n) for arbitrary-precision n."""
    if n <= 1 << 63:
        return int(rng.integers(n))
    nbits = n.bit_length()
    nbytes = (nbits + 7) // 8
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "big") >> (nbytes * 8 - nbits)
        if x < n:
            return x


def run_classical_session(
    keys: PiggyBankKeys,
    s: int,
    hash_spec: HashSpec,
    r: int | None = None,
    reduce: bool = True,
    rng: np.random.Generator | None = None,
) -> ClassicalTranscript:
    """Run one full exchange and verify Bob's recovery against the originals.

    R is drawn from `rng` when not pinned.  Raises RecoveryMismatch if the
    round trip does not reproduce (K, S) exactly.
    """
    if r is None:
        if rng is None:
            rng = np.random.default_rng()
        r = _randbelow(rng, keys.n)
    f_r = forward(r, keys.n, keys.e)
    k = hash_spec.derive(s, keys.n)
    msg = alice_encode(f_r, s, hash_spec, keys.n, keys.e, reduce=reduce)
    rec_k, rec_s = bob_recover(msg, f_r, keys)
    if (rec_k, rec_s) != (k, s):
        raise RecoveryMismatch(
            f"round trip produced (K, S) = ({rec_k}, {rec_s}), expected ({k}, {s})"
        )
    return ClassicalTranscript(
        n=keys.n,
        e=keys.e,
        r=r,
        f_r=f_r,
        k=k,
        s=s,
        c=msg.c,
        f_k=msg.f_k,
        recovered_k=rec_k,
        recovered_s=rec_s,
        reduced=reduce,
    )
