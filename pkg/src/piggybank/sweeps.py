"""Parameter studies: the n-m tradeoff curve and the tomography benchmark.

The tradeoff sweep asks, for each cover budget n, how much per-bit
redundancy m the decoder needs before its bit error rate drops to a target.
The sessions run over a lossy channel by default: on a perfect channel a
single photon per bit already decodes almost every message, and the curve
degenerates to m = 1 everywhere. With loss, a lone surviving photon can
vanish and the group falls back to a guess, so redundancy buys real error
reduction, while more cover photons sharpen Bob's theta estimate. Required
m therefore falls as n grows; the curve is the quantitative version of
"spend photons on cover, save them on the message".
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .protocol import SessionConfig, derive_seed, run_session
from .tomography import AngleGrid, estimation_trials, required_photons

M_NOT_FOUND = -1

# Channel loss used by the default tradeoff study. Chosen so that at the
# 0.01 error target the small end of the standard cover ladder still needs
# m = 3 while the rest get away with m = 2: double losses leave a residual
# error near loss^2 / 2 ~ 0.007 that only the sharper theta estimates of
# the larger covers can stay under.
DEFAULT_SWEEP_LOSS = 0.12


@dataclass(frozen=True)
class SweepRow:
    """One ladder point; required_m is M_NOT_FOUND (-1) when even max_m
    missed the error target, with achieved_error reporting the max_m rate."""

    n_cover: int
    required_m: int
    achieved_error: float
    trials: int
    seed: int


def _bit_error_rate(
    n_cover: int,
    m: int,
    trials: int,
    grid_size: int,
    bits_per_session: int,
    seed: int,
    loss_rate: float,
) -> float:
    """Observed decode error rate over adversary-free sessions with fresh
    random message bits each trial.

    Sessions aborted by the loss monitor carry no decoded bits and drop out
    of the denominator; if every trial aborts the rate is inf, so the point
    can never be accepted on zero evidence.
    """
    errors = 0
    total = 0
    for t in range(trials):
        s = derive_seed(seed, n_cover, m, t)
        bit_rng = np.random.default_rng(derive_seed(seed, n_cover, m, t, 1))
        bits = "".join("1" if b else "0" for b in bit_rng.integers(0, 2, bits_per_session))
        config = SessionConfig(
            n_cover=n_cover,
            m_message=m,
            grid_size=grid_size,
            message_bits=bits,
            seed=s,
            loss_rate=loss_rate,
        )
        transcript = run_session(config)
        if transcript.decoded_bits is None:
            continue
        errors += transcript.bit_errors
        total += bits_per_session
    return errors / total if total else math.inf


def find_required_m(
    n_cover: int,
    epsilon: float,
    max_m: int,
    trials: int,
    grid_size: int,
    bits_per_session: int,
    seed: int,
    loss_rate: float = 0.0,
) -> SweepRow:
    """Smallest m in 1..max_m whose error rate is <= epsilon."""
    if not 0.0 < epsilon <= 1.0:
        raise ConfigError(f"epsilon must be in (0, 1], got {epsilon}")
    if max_m < 1:
        raise ConfigError(f"max_m must be >= 1, got {max_m}")
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    rate = 1.0
    for m in range(1, max_m + 1):
        if m > 0.25 * n_cover:
            break  # session guard: message redundancy may not crowd the cover
        rate = _bit_error_rate(
            n_cover, m, trials, grid_size, bits_per_session, seed, loss_rate
        )
        if rate <= epsilon:
            return SweepRow(
                n_cover=n_cover, required_m=m, achieved_error=rate, trials=trials, seed=seed
            )
    return SweepRow(
        n_cover=n_cover, required_m=M_NOT_FOUND, achieved_error=rate, trials=trials, seed=seed
    )


def sweep_nm(
    n_ladder: list[int],
    epsilon: float = 0.01,
    max_m: int = 16,
    trials: int = 400,
    grid_size: int = 16,
    bits_per_session: int = 8,
    seed: int = 0,
    loss_rate: float = DEFAULT_SWEEP_LOSS,
) -> list[SweepRow]:
    """Required-m curve over a ladder of cover budgets."""
    if not n_ladder:
        raise ConfigError("n_ladder must be nonempty")
    return [
        find_required_m(
            n, epsilon, max_m, trials, grid_size, bits_per_session, seed, loss_rate
        )
        for n in n_ladder
    ]


@dataclass(frozen=True)
class BenchRow:
    grid_size: int
    photons: int
    paper_budget: int
    success_rate: float
    rmse: float
    trials: int


def tomography_bench(
    grid_sizes: list[int],
    photon_ladder: list[int],
    trials: int = 400,
    seed: int = 0,
) -> list[BenchRow]:
    """Snap success and estimator RMSE across grids and photon budgets.

    paper_budget is the 2^k rule evaluated at k = log2(grid size), i.e. the
    nominal budget for distinguishing that many angles; the measured success
    column sits next to it so the two readings of the rule can be compared.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    rows = []
    for g in grid_sizes:
        grid = AngleGrid(g)
        budget = required_photons(round(math.log2(g)))
        for c in photon_ladder:
            rng = np.random.default_rng(derive_seed(seed, g, c))
            success, rmse = estimation_trials(grid, c, trials, rng)
            rows.append(
                BenchRow(
                    grid_size=g,
                    photons=c,
                    paper_budget=budget,
                    success_rate=success,
                    rmse=rmse,
                    trials=trials,
                )
            )
    return rows
