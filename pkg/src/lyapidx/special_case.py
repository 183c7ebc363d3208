"""N single-buffer queues with M servers: the unconstrained special case.

With c_n = 1, phi_n = mu_n = 1 - lambda_n and no binding power budget, the
file-downloading system has the same Markov dynamics as N one-packet
buffers fed by Bernoulli(lambda_n) arrivals, and Lyapunov indexing reduces
to serving the non-empty queues with the largest arrival rates.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels as K
from .engine import CHUNK, Stat, mean_stderr
from .errors import DomainError
from .model import Action, SystemConfig, UserParams
from .oracle.markov import steady_state
from .sampling import SHARED_STREAM, rng_stream


@dataclass(frozen=True)
class WorkConservingPolicy:
    """A priority rule over non-empty queues; see ``kernels.choose_served``."""

    name: str
    code: int
    priority: tuple = ()

    def prio_array(self, n: int) -> np.ndarray:
        if self.priority:
            return np.asarray(self.priority, dtype=float)
        return np.zeros(n)


MAX_LAMBDA = WorkConservingPolicy("max-lambda", K.MAX_LAMBDA)
MIN_LAMBDA = WorkConservingPolicy("min-lambda", K.MIN_LAMBDA)
RANDOM = WorkConservingPolicy("random", K.RANDOM)
ROUND_ROBIN = WorkConservingPolicy("round-robin", K.ROUND_ROBIN)


def fixed_priority(order) -> WorkConservingPolicy:
    """Strict priority: ``order[0]`` is served first, then ``order[1]``, ..."""
    rank = np.empty(len(order))
    rank[np.asarray(order)] = np.arange(len(order))
    return WorkConservingPolicy("priority:" + ",".join(map(str, order)), K.FIXED_PRIORITY,
                                tuple(rank))


def policy_by_name(name: str) -> WorkConservingPolicy:
    if name.startswith("priority:"):
        return fixed_priority([int(x) for x in name.split(":", 1)[1].split(",")])
    for p in (MAX_LAMBDA, MIN_LAMBDA, RANDOM, ROUND_ROBIN):
        if p.name == name:
            return p
    raise DomainError(f"unknown policy {name!r}")


def zoo(n: int, rng: np.random.Generator | None = None) -> list:
    """Work-conserving comparison policies (Max-lambda first)."""
    pols = [MAX_LAMBDA, MIN_LAMBDA, RANDOM, ROUND_ROBIN]
    if rng is not None:
        pols.append(fixed_priority(list(rng.permutation(n))))
    return pols


def _served_set(buffer, lambdas, m, policy: WorkConservingPolicy) -> set:
    f = np.asarray(buffer, dtype=np.int64)
    lam = np.asarray(lambdas, dtype=float)
    out = np.zeros(f.size, dtype=np.int64)
    K.choose_served.py_func(f, lam, m, policy.code, policy.prio_array(f.size), np.zeros(f.size), 0, out)
    return set(np.nonzero(out)[0].tolist())


def max_lambda_serve(buffer, lambdas, m: int) -> set:
    """0-based positions served: largest rates first, ties to the lower position."""
    return _served_set(buffer, lambdas, m, MAX_LAMBDA)


def min_lambda_serve(buffer, lambdas, m: int) -> set:
    return _served_set(buffer, lambdas, m, MIN_LAMBDA)


def special_case_config(lambdas, servers: int, v: float = 1.0) -> SystemConfig:
    """File-downloading config equivalent to the single-buffer system.

    Every action costs one unit of power and the budget equals N, so the
    power constraint never binds and the virtual queue stays at zero.
    """
    users = []
    for lam in lambdas:
        mu = 1.0 - lam
        users.append(UserParams(lam=lam, mean_file=1.0 / mu, weight=1.0, packet_based=True,
                                actions=(Action.idle(), Action(1, 1.0, mu))))
    return SystemConfig(tuple(users), servers, float(len(users)), v)


def _check_rates(lambdas):
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or ((lam <= 0) | (lam >= 1)).any():
        raise DomainError("arrival rates must lie in (0, 1)")
    return lam


def run_single_buffer(policy: WorkConservingPolicy, lambdas, m: int, horizon: int, seed: int,
                      trial: int = 0, initial=None) -> float:
    """Packets served per slot over ``horizon`` slots (buffers start full by default)."""
    lam = _check_rates(lambdas)
    n = lam.size
    gens = [rng_stream(seed, trial, k) for k in range(n)]
    pol_gen = rng_stream(seed, trial, SHARED_STREAM)
    F = np.ones(n, dtype=np.int64) if initial is None else np.asarray(initial, dtype=np.int64).copy()
    ist = np.zeros(K.IS_SIZE, dtype=np.int64)
    counts = np.zeros(n, dtype=np.int64)
    prio = policy.prio_array(n)
    total = 0
    for start in range(0, horizon, CHUNK):
        size = min(CHUNK, horizon - start)
        u_arr = np.empty((size, n))
        for k, g in enumerate(gens):
            u_arr[:, k] = g.random(size)
        u_pol = pol_gen.random((size, n)) if policy.code == K.RANDOM else np.zeros((size, n))
        total += K.single_buffer_chunk(lam, m, policy.code, prio, u_arr, u_pol, F, ist, counts)
    return total / horizon


def _enumerate_served(f, lam, m, policy):
    """(probability, served set) pairs for a state; RANDOM averages over subsets."""
    nonempty = [k for k in range(f.size) if f[k]]
    if policy.code == K.RANDOM:
        s = min(m, len(nonempty))
        subsets = list(itertools.combinations(nonempty, s))
        return [(1.0 / len(subsets), set(c)) for c in subsets]
    if policy.code == K.ROUND_ROBIN:
        raise DomainError("round-robin depends on time, not only on the buffer state")
    return [(1.0, _served_set(f, lam, m, policy))]


def single_buffer_chain(lambdas, m: int, policy: WorkConservingPolicy) -> np.ndarray:
    """Transition matrix over buffer states (queue 1 is the least significant bit)."""
    lam = _check_rates(lambdas)
    n = lam.size
    P = np.zeros((2 ** n, 2 ** n))
    for s in range(2 ** n):
        f = (s >> np.arange(n)) & 1
        for w, served in _enumerate_served(f, lam, m, policy):
            temp = f.copy()
            temp[list(served)] = 0
            empty = np.nonzero(temp == 0)[0]
            base = int(sum(1 << k for k in range(n) if temp[k]))
            for arr in itertools.product((0, 1), repeat=empty.size):
                p = w
                nxt = base
                for k, a in zip(empty, arr):
                    p *= lam[k] if a else 1.0 - lam[k]
                    nxt |= a << int(k)
                P[s, nxt] += p
    return P


def exact_throughput(lambdas, m: int, policy: WorkConservingPolicy) -> float:
    P = single_buffer_chain(lambdas, m, policy)
    pi = steady_state(P)
    n = len(lambdas)
    occupied = np.array([bin(s).count("1") for s in range(2 ** n)])
    return float(pi @ np.minimum(occupied, m))


def exact_priority_two_queue(lambda1: float, lambda2: float) -> float:
    """Steady-state throughput of two one-packet buffers, one server, queue 1 first.

    States are indexed F1 + 2*F2. From every state except (1, 1) the server
    empties the only packet present, so both buffers are empty before arrivals.
    """
    l1, l2 = _check_rates([lambda1, lambda2])
    fresh = [(1 - l1) * (1 - l2), l1 * (1 - l2), (1 - l1) * l2, l1 * l2]
    P = np.array([fresh, fresh, fresh, [0.0, 0.0, 1 - l1, l1]])
    return float(1.0 - steady_state(P)[0])


@dataclass
class CouplingReport:
    holds: bool
    first_violation_slot: int
    violation: str
    slots: int
    a_lam_ones: np.ndarray
    tx_pi: int
    tx_max_lambda: int

    def marginal_z(self, lambdas) -> np.ndarray:
        """z-scores of the coupled Max-lambda arrival frequencies against lambda."""
        lam = np.asarray(lambdas, dtype=float)
        rate = self.a_lam_ones / self.slots
        return (rate - lam) / np.sqrt(lam * (1 - lam) / self.slots)


_VIOLATIONS = {0: "", 1: "buffer prefix sums", 2: "temporary prefix sums",
               3: "transmit count", 4: "empty-buffer ordering"}


def _coupled_streams(seed, trial, n):
    a = [rng_stream(seed, trial, k) for k in range(n)]
    b = [rng_stream(seed, trial, n + k) for k in range(n)]
    return a, b, rng_stream(seed, trial, SHARED_STREAM)


def _draw(gens, size):
    u = np.empty((size, len(gens)))
    for k, g in enumerate(gens):
        u[:, k] = g.random(size)
    return u


def coupled_dominance_check(policy: WorkConservingPolicy, lambdas, m: int, horizon: int,
                            seed: int, trial: int = 0, initial=None) -> CouplingReport:
    """Run ``policy`` and Max-lambda on coupled arrivals and check the orderings every slot."""
    lam = _check_rates(lambdas)
    if (np.diff(lam) < 0).any():
        raise DomainError("coupling needs arrival rates sorted ascending")
    n = lam.size
    ga, gb, gp = _coupled_streams(seed, trial, n)
    Fpi = np.ones(n, dtype=np.int64) if initial is None else np.asarray(initial, dtype=np.int64).copy()
    Flam = Fpi.copy()
    ist = np.zeros(K.IS_SIZE, dtype=np.int64)
    ones = np.zeros(n, dtype=np.int64)
    tx = np.zeros(2, dtype=np.int64)
    prio = policy.prio_array(n)
    slot, code = -1, 0
    for start in range(0, horizon, CHUNK):
        size = min(CHUNK, horizon - start)
        u_a, u_b = _draw(ga, size), _draw(gb, size)
        u_pol = gp.random((size, n))
        slot, code = K.coupled_chunk(lam, m, policy.code, prio, u_a, u_b, u_pol, Fpi, Flam, ist,
                                     ones, tx)
        if slot >= 0:
            break
    return CouplingReport(slot < 0, int(slot), _VIOLATIONS[int(code)], int(ist[K.IS_T]), ones,
                          int(tx[0]), int(tx[1]))


def coupling_trace_csv(policy: WorkConservingPolicy, lambdas, m: int, slots: int, seed: int,
                       trial: int = 0) -> str:
    """Per-slot prefix sums of both coupled systems for the first ``slots`` slots."""
    lam = _check_rates(lambdas)
    n = lam.size
    ga, gb, gp = _coupled_streams(seed, trial, n)
    Fpi = np.ones(n, dtype=np.int64)
    Flam = Fpi.copy()
    ist = np.zeros(K.IS_SIZE, dtype=np.int64)
    ones = np.zeros(n, dtype=np.int64)
    tx = np.zeros(2, dtype=np.int64)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["slot"] + [f"pi_prefix_{j + 1}" for j in range(n)] + [f"maxlambda_prefix_{j + 1}" for j in range(n)])
    # same stream consumption as coupled_dominance_check as long as slots <= CHUNK
    size = min(slots, CHUNK)
    u_a, u_b, u_pol = _draw(ga, size), _draw(gb, size), gp.random((size, n))
    for t in range(size):
        w.writerow([t] + list(np.cumsum(Fpi)) + list(np.cumsum(Flam)))
        slot, _ = K.coupled_chunk(lam, m, policy.code, policy.prio_array(n), u_a[t:t + 1],
                                  u_b[t:t + 1], u_pol[t:t + 1], Fpi, Flam, ist, ones, tx)
        if slot >= 0:
            break
    return buf.getvalue()


def empirical_dominance(policy: WorkConservingPolicy, lambdas, m: int, horizon: int, trials: int,
                        seed: int = 0):
    """Independent (uncoupled) runs of ``policy`` and Max-lambda: (Stat, Stat) of packets/slot."""
    pi_runs = [run_single_buffer(policy, lambdas, m, horizon, seed, trial=2 * k) for k in range(trials)]
    ml_runs = [run_single_buffer(MAX_LAMBDA, lambdas, m, horizon, seed, trial=2 * k + 1)
               for k in range(trials)]
    return mean_stderr(pi_runs), mean_stderr(ml_runs)


def dominates(pi: Stat, ml: Stat, k: float = 3.0) -> bool:
    return pi.mean <= ml.mean + k * math.hypot(pi.stderr, ml.stderr)
