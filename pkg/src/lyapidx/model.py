"""Domain types for the power-constrained file-downloading system."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .sampling import FileLengthLaw, Geometric


def completion_prob_exponential(rate_bits: float, link_success: float, mean_file: float) -> float:
    """Completion probability of an exponentially sized file sent at ``rate_bits``."""
    if not mean_file > 0:
        raise DomainError(f"mean_file must be positive, got {mean_file}")
    if rate_bits < 0 or not 0 <= link_success <= 1:
        raise DomainError("rate_bits must be >= 0 and link_success in [0, 1]")
    return link_success * -math.expm1(-rate_bits / mean_file)


def completion_prob_geometric(mu: float, link_success: float) -> float:
    """Completion probability of a geometric packet file (one packet per slot)."""
    if not 0 < mu <= 1:
        raise DomainError(f"mu must lie in (0, 1], got {mu}")
    if not 0 <= link_success <= 1:
        raise DomainError(f"link_success must lie in [0, 1], got {link_success}")
    return mu * link_success


def expected_frame_length(phi: float, lam: float) -> float:
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    return 1.0 + phi / lam


@dataclass(frozen=True)
class Action:
    id: int
    power: float
    success_prob: float
    rate_bits: Optional[float] = None
    link_success: Optional[float] = None

    @classmethod
    def idle(cls) -> "Action":
        return cls(0, 0.0, 0.0)

    @classmethod
    def exponential(cls, id: int, power: float, rate_bits: float, link_success: float,
                    mean_file: float) -> "Action":
        phi = completion_prob_exponential(rate_bits, link_success, mean_file)
        return cls(id, power, phi, rate_bits, link_success)

    @classmethod
    def geometric(cls, id: int, power: float, mu: float, link_success: float) -> "Action":
        return cls(id, power, completion_prob_geometric(mu, link_success), None, link_success)


@dataclass(frozen=True)
class UserParams:
    """One user.

    ``mean_file`` is the expected file size used in the objective: bits for
    bit-level users, packets (1/mu) when ``packet_based`` is set.
    """

    lam: float
    mean_file: float
    actions: tuple
    weight: float = 1.0
    packet_based: bool = False
    file_law: Optional[FileLengthLaw] = None

    def __post_init__(self):
        object.__setattr__(self, "actions", tuple(sorted(self.actions, key=lambda a: a.id)))

    @property
    def mu(self) -> float:
        return 1.0 / self.mean_file

    @property
    def law(self) -> FileLengthLaw:
        """Actual file-length law used in packet mode (geometric by default)."""
        return self.file_law if self.file_law is not None else Geometric(self.mu)

    def action(self, action_id: int) -> Action:
        for a in self.actions:
            if a.id == action_id:
                return a
        raise DomainError(f"action {action_id} is not in the user's action set")

    @property
    def p_min(self) -> float:
        powers = [a.power for a in self.actions if a.id != 0]
        return min(powers) if powers else math.inf

    @property
    def p_max(self) -> float:
        return max(a.power for a in self.actions)


@dataclass(frozen=True)
class SystemConfig:
    users: tuple
    servers: int
    power_budget: float
    tradeoff: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))

    @property
    def n_users(self) -> int:
        return len(self.users)

    def with_tradeoff(self, v: float) -> "SystemConfig":
        return SystemConfig(self.users, self.servers, self.power_budget, v)


@dataclass
class SystemState:
    file_state: np.ndarray
    residual_packets: Optional[np.ndarray] = None

    @classmethod
    def all_active(cls, n: int) -> "SystemState":
        return cls(np.ones(n, dtype=np.int64))


def _validate_user(i: int, u: UserParams) -> list:
    out = []
    tag = f"users[{i}]"
    if not u.lam > 0 or u.lam > 1:
        out.append(f"{tag}.lambda: must lie in (0, 1] (got {u.lam})")
    if not u.mean_file > 0:
        out.append(f"{tag}.mean_file: must be positive (got {u.mean_file})")
    if not u.weight > 0:
        out.append(f"{tag}.weight: must be positive (got {u.weight})")
    if u.packet_based and u.mean_file < 1:
        out.append(f"{tag}.mean_packets: must be >= 1 (got {u.mean_file})")
    ids = [a.id for a in u.actions]
    if len(set(ids)) != len(ids):
        out.append(f"{tag}.actions: action ids must be unique")
    if 0 not in ids:
        out.append(f"{tag}.actions: idle action 0 must be present")
    for a in u.actions:
        atag = f"{tag}.actions[id={a.id}]"
        if a.id < 0:
            out.append(f"{atag}: id must be nonnegative")
        if not 0 <= a.success_prob <= 1:
            out.append(f"{atag}.success_prob: must lie in [0, 1] (got {a.success_prob})")
        if a.id == 0:
            if a.power != 0 or a.success_prob != 0:
                out.append(f"{atag}: idle action must have power 0 and success_prob 0")
        elif not a.power > 0:
            out.append(f"{atag}.power: p^min must be positive (got {a.power})")
        if u.packet_based and a.success_prob > u.mu:
            out.append(f"{atag}.success_prob: exceeds mu, per-packet success would be > 1")
    return out


def validate_config(config: SystemConfig) -> list:
    """Return every violated invariant as a human-readable string."""
    out = []
    if not config.users:
        out.append("users: at least one user is required")
    for i, u in enumerate(config.users):
        out.extend(_validate_user(i, u))
    if not (isinstance(config.servers, (int, np.integer)) and config.servers >= 1):
        out.append(f"servers: must be a positive integer (got {config.servers})")
    elif config.servers >= len(config.users):
        out.append(f"servers: servers must be < users (M={config.servers}, N={len(config.users)})")
    if not config.power_budget > 0:
        out.append(f"power_budget: must be positive (got {config.power_budget})")
    if not config.tradeoff >= 0:
        out.append(f"tradeoff_v: must be nonnegative (got {config.tradeoff})")
    return out


@dataclass(frozen=True)
class PackedUsers:
    """Dense per-user arrays consumed by the compiled kernels.

    Action slots beyond ``n_actions[n]`` are padding and never read.
    """

    lam: np.ndarray          # (N,)
    reward_scale: np.ndarray  # (N,) weight * mean_file
    weight: np.ndarray       # (N,)
    n_actions: np.ndarray    # (N,)
    action_ids: np.ndarray   # (N, A)
    phi: np.ndarray          # (N, A)
    power: np.ndarray        # (N, A)
    qhat: np.ndarray = field(default=None)  # (N, A) per-packet success, packet users only


def pack_users(users: Sequence[UserParams]) -> PackedUsers:
    n = len(users)
    a_max = max(len(u.actions) for u in users)
    ids = np.zeros((n, a_max), dtype=np.int64)
    phi = np.zeros((n, a_max))
    power = np.zeros((n, a_max))
    qhat = np.zeros((n, a_max))
    for i, u in enumerate(users):
        for j, a in enumerate(u.actions):
            ids[i, j] = a.id
            phi[i, j] = a.success_prob
            power[i, j] = a.power
            qhat[i, j] = a.success_prob / u.mu if u.packet_based else np.nan
    return PackedUsers(
        lam=np.array([u.lam for u in users], dtype=float),
        reward_scale=np.array([u.weight * u.mean_file for u in users], dtype=float),
        weight=np.array([u.weight for u in users], dtype=float),
        n_actions=np.array([len(u.actions) for u in users], dtype=np.int64),
        action_ids=ids,
        phi=phi,
        power=power,
        qhat=qhat,
    )
