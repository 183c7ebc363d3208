"""Renewal-frame drift-plus-penalty control of a single downloading user."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels as K
from .engine import CHUNK, Metrics
from .errors import DomainError
from .model import Action, UserParams, expected_frame_length, pack_users
from .sampling import rng_stream


@dataclass(frozen=True)
class FrameQueue:
    value: float
    budget: float

    def __post_init__(self):
        if self.value < 0:
            raise DomainError("queue value must be nonnegative")


@dataclass(frozen=True)
class FrameRecord:
    frame_index: int
    action_id: int
    frame_length: int
    power_used: float
    completed: bool


def dpp_index(action: Action, queue: FrameQueue, v: float, user: UserParams) -> float:
    if action not in user.actions:
        raise DomainError(f"action {action.id} is not in the user's action set")
    num = v * user.mean_file * action.success_prob - queue.value * action.power
    return num / expected_frame_length(action.success_prob, user.lam)


def choose_action(queue: FrameQueue, v: float, user: UserParams) -> Action:
    # actions are sorted by id, so the first maximiser has the smallest id
    best, best_val = None, None
    for a in user.actions:
        val = dpp_index(a, queue, v, user)
        if best is None or val > best_val:
            best, best_val = a, val
    return best


def update_frame_queue(queue: FrameQueue, power: float, frame_length: int) -> FrameQueue:
    if power < 0 or frame_length < 1:
        raise DomainError("power must be >= 0 and frame_length >= 1")
    return FrameQueue(max(queue.value + power - queue.budget * frame_length, 0.0), queue.budget)


def queue_bound(v: float, user: UserParams, beta: float) -> float:
    """Deterministic upper bound on the frame queue under ``choose_action``."""
    if not user.p_min > 0:
        raise DomainError("p^min must be positive")
    p_max = max(a.power for a in user.actions if a.id != 0)
    return max(v * user.mean_file / user.p_min + p_max - beta, 0.0)


def simulate_frames(user: UserParams, beta: float, v: float, uniforms):
    """Slow reference simulation driven by one uniform per slot.

    Uses exactly the same draws as the compiled kernel (a slot with an active
    file completes when u < phi; an idle slot activates when u < lambda) and
    returns ``(records, queue_per_slot, throughput_sum, power_sum)``.
    """
    queue = FrameQueue(0.0, beta)
    records, queues = [], []
    active, thr, pw = True, 0.0, 0.0
    start, act = 0, None
    for t, x in enumerate(uniforms):
        queues.append(queue.value)
        if active:
            act = choose_action(queue, v, user)
            start = t
            thr += user.mean_file * act.success_prob
            pw += act.power
            if x < act.success_prob:
                active = False
            else:
                records.append(FrameRecord(len(records), act.id, 1, act.power, False))
                queue = update_frame_queue(queue, act.power, 1)
        elif x < user.lam:
            active = True
            length = t + 1 - start
            records.append(FrameRecord(len(records), act.id, length, act.power, True))
            queue = update_frame_queue(queue, act.power, length)
    return records, np.array(queues), thr, pw


def run_single_user(user: UserParams, beta: float, v: float, horizon: int, seed: int,
                    trial: int = 0, thin: int = 0) -> Metrics:
    """Simulate the single-user algorithm from F(0)=1, Q[0]=0 for ``horizon`` slots."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    packed = pack_users([user])
    phi, power, n_act = packed.phi[0], packed.power[0], int(packed.n_actions[0])
    gen = rng_stream(seed, trial, 0)
    fs = np.zeros(K.FS_SIZE)
    ist = np.zeros(K.IS_SIZE, dtype=np.int64)
    ist[K.IS_F] = 1
    series = np.zeros((horizon // thin if thin else 0, 3))
    for start in range(0, horizon, CHUNK):
        u = gen.random(min(CHUNK, horizon - start))
        K.single_user_chunk(phi, power, n_act, user.lam, user.mean_file, beta, float(v), u,
                            fs, ist, thin, series)
    return Metrics(
        horizon=horizon,
        throughput=fs[K.FS_THR] / horizon,
        power=fs[K.FS_POW] / horizon,
        mean_queue=fs[K.FS_QSUM] / horizon,
        max_queue=fs[K.FS_QMAX],
        max_power_excess=fs[K.FS_EXCESS],
        thin=thin,
        series=series if thin else None,
    )
