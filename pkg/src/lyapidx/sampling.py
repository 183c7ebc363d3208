"""Random streams, file-length laws and the per-user slot transitions.

Every stream is a numpy ``Philox`` (counter-based, 64-bit) generator keyed
by ``SeedSequence(master_seed, spawn_key=(trial, user))``, so a given
(master_seed, trial, user) triple always yields the same sequence and
distinct triples give independent streams.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

# spawn-key slot reserved for streams that are not tied to one user
SHARED_STREAM = 2**31 - 1


def rng_stream(master_seed: int, trial: int = 0, user: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(trial), int(user)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class Geometric:
    mu: float

    def __post_init__(self):
        if not 0 < self.mu <= 1:
            raise DomainError(f"geometric mu must lie in (0, 1], got {self.mu}")

    @property
    def mean(self) -> float:
        return 1.0 / self.mu


@dataclass(frozen=True)
class UniformInt:
    lo: int
    hi: int

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi:
            raise DomainError(f"uniform file lengths need 1 <= lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def mean(self) -> float:
        return (self.lo + self.hi) / 2


@dataclass(frozen=True)
class Poisson:
    """Poisson(mean) conditioned on being >= 1 (zeros are redrawn)."""

    mean: float

    def __post_init__(self):
        if not self.mean > 0:
            raise DomainError(f"poisson mean must be positive, got {self.mean}")

    @property
    def effective_mean(self) -> float:
        return self.mean / -np.expm1(-self.mean)


FileLengthLaw = Union[Geometric, UniformInt, Poisson]


def sample_lengths(law: FileLengthLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    if isinstance(law, Geometric):
        return rng.geometric(law.mu, size).astype(np.int64)
    if isinstance(law, UniformInt):
        return rng.integers(law.lo, law.hi + 1, size, dtype=np.int64)
    if isinstance(law, Poisson):
        out = rng.poisson(law.mean, size).astype(np.int64)
        bad = out == 0
        while bad.any():
            out[bad] = rng.poisson(law.mean, int(bad.sum()))
            bad = out == 0
        return out
    raise DomainError(f"unknown file length law {law!r}")


def sample_file_length(law: FileLengthLaw, rng: np.random.Generator) -> int:
    return int(sample_lengths(law, rng, 1)[0])


def step_user_packet_mode(residual: int, q_hat: float, rng: np.random.Generator):
    """One served slot of a packet-mode user: returns ``(residual, completed)``."""
    if not 0 <= q_hat <= 1:
        raise DomainError(f"q_hat must lie in [0, 1], got {q_hat}")
    if residual < 1:
        raise DomainError("an active user needs at least one residual packet")
    if rng.random() < q_hat:
        residual -= 1
    return residual, residual == 0


def step_idle(lam: float, rng: np.random.Generator, law: FileLengthLaw | None = None):
    """One idle slot: returns ``(became_active, residual)``; residual is 0 in memoryless mode."""
    if rng.random() < lam:
        return True, (sample_file_length(law, rng) if law is not None else 0)
    return False, 0
