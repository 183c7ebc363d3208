"""Lyapunov indexing for N users sharing M servers and one power budget."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels as K
from .engine import CHUNK, Metrics
from .errors import DomainError
from .model import Action, SystemConfig, SystemState, UserParams, pack_users, validate_config
from .sampling import rng_stream, sample_lengths


@dataclass(frozen=True)
class SlotQueue:
    value: float
    budget: float


@dataclass(frozen=True)
class SlotDecision:
    actions: tuple   # per-user action id, 0 when not served

    @property
    def served(self) -> tuple:
        return tuple(n for n, a in enumerate(self.actions) if a != 0)


def reward_g(user: UserParams, action: Action, queue_value: float, v: float) -> float:
    if action not in user.actions:
        raise DomainError(f"action {action.id} is not in the user's action set")
    phi = action.success_prob
    num = v * (user.weight * user.mean_file) * phi - queue_value * action.power
    return num / (1.0 + phi / user.lam)


def user_index(user: UserParams, queue_value: float, v: float):
    """Best reward over the user's actions and the action attaining it."""
    best, gamma = None, None
    for a in user.actions:
        g = reward_g(user, a, queue_value, v)
        if best is None or g > gamma:
            best, gamma = a, g
    return gamma, best


def select_and_act(state: SystemState, queue: SlotQueue, config: SystemConfig) -> SlotDecision:
    """Serve the (at most M) active users with the largest positive index."""
    ranked = []
    chosen = {}
    for n, (user, f) in enumerate(zip(config.users, state.file_state)):
        if f != 1:
            continue
        gamma, act = user_index(user, queue.value, config.tradeoff)
        if gamma > 0:
            ranked.append((-gamma, n))
            chosen[n] = act.id
    ranked.sort()
    actions = [0] * config.n_users
    for _, n in ranked[: config.servers]:
        actions[n] = chosen[n]
    return SlotDecision(tuple(actions))


def update_slot_queue(queue: SlotQueue, total_power: float) -> SlotQueue:
    if total_power < 0:
        raise DomainError("total power must be nonnegative")
    return SlotQueue(max(queue.value + total_power - queue.budget, 0.0), queue.budget)


def queue_bound_multi(config: SystemConfig) -> float:
    p_min = min(u.p_min for u in config.users)
    if not p_min > 0:
        raise DomainError("p^min must be positive")
    c_max = max(u.weight for u in config.users)
    b_max = max(u.mean_file for u in config.users)
    p_sum = 0.0
    for u in config.users:
        p_sum += u.p_max
    return max(config.tradeoff * c_max * b_max / p_min + p_sum - config.power_budget, 0.0)


def simulate_slots(config: SystemConfig, uniforms, state: SystemState | None = None):
    """Slow memoryless-mode reference driven by a (T, N) array of uniforms.

    Returns per-slot decisions, queue values and weighted throughput sum.
    """
    n = config.n_users
    f = np.ones(n, dtype=np.int64) if state is None else state.file_state.copy()
    queue = SlotQueue(0.0, config.power_budget)
    decisions, queues, thr = [], [], 0.0
    for row in uniforms:
        queues.append(queue.value)
        d = select_and_act(SystemState(f.copy()), queue, config)
        decisions.append(d)
        total_power = 0.0
        for k, (user, a_id) in enumerate(zip(config.users, d.actions)):
            if f[k] == 1:
                if a_id:
                    a = user.action(a_id)
                    total_power += a.power
                    thr += user.weight * user.mean_file * a.success_prob
                    if row[k] < a.success_prob:
                        f[k] = 0
            elif row[k] < user.lam:
                f[k] = 1
        queue = update_slot_queue(queue, total_power)
    return decisions, np.array(queues), thr


def run_multi_user(config: SystemConfig, horizon: int, seed: int, trial: int = 0,
                   mode: str = "memoryless", thin: int = 0,
                   initial: np.ndarray | None = None) -> Metrics:
    """Simulate Lyapunov indexing; throughput is sum_n c_n * (mean file) * phi in
    memoryless mode and c_n * (packets delivered) in packet mode."""
    problems = validate_config(config)
    if problems:
        raise DomainError("; ".join(problems))
    if mode not in ("memoryless", "packet"):
        raise DomainError(f"unknown file length mode {mode!r}")
    packet = mode == "packet"
    if packet and not all(u.packet_based for u in config.users):
        raise DomainError("packet mode needs packet-based users (mean_packets)")
    p = pack_users(config.users)
    n = config.n_users
    gens = [rng_stream(seed, trial, k) for k in range(n)]
    F = np.ones(n, dtype=np.int64) if initial is None else np.asarray(initial, dtype=np.int64).copy()
    resid = np.zeros(n, dtype=np.int64)
    if packet:
        for k, u in enumerate(config.users):
            if F[k]:
                resid[k] = sample_lengths(u.law, gens[k], 1)[0]
    fs = np.zeros(K.FS_SIZE)
    ist = np.zeros(K.IS_SIZE, dtype=np.int64)
    served = np.zeros(n, dtype=np.int64)
    series = np.zeros((horizon // thin if thin else 0, 3))
    dummy = np.zeros((1, n), dtype=np.int64)
    for start in range(0, horizon, CHUNK):
        size = min(CHUNK, horizon - start)
        u = np.empty((size, n))
        lengths = np.empty((size, n), dtype=np.int64) if packet else dummy
        for k, g in enumerate(gens):
            u[:, k] = g.random(size)
            if packet:
                lengths[:, k] = sample_lengths(config.users[k].law, g, size)
        K.multi_user_chunk(p.lam, p.reward_scale, p.weight, p.n_actions, p.phi, p.power, p.qhat,
                           float(config.tradeoff), float(config.power_budget), config.servers,
                           packet, u, lengths, F, resid, fs, ist, served, thin, series)
    return Metrics(
        horizon=horizon,
        throughput=fs[K.FS_THR] / horizon,
        power=fs[K.FS_POW] / horizon,
        mean_queue=fs[K.FS_QSUM] / horizon,
        max_queue=fs[K.FS_QMAX],
        max_power_excess=fs[K.FS_EXCESS],
        served=served,
        thin=thin,
        series=series if thin else None,
    )
