"""Composite-state constrained MDP and its occupation-measure linear program.

States are bitmasks over users with user 1 (index 0) as the least
significant bit. Variables ``x(s, a)`` are ordered state-major, then by the
order of :func:`enumerate_feasible_actions`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError, DomainError
from ..model import SystemConfig
from .simplex import LPResult, solve_lp

MAX_VARIABLES = 10**6

FeasibleAction = tuple  # per-user action ids


def state_bits(state: int, n: int) -> np.ndarray:
    return (state >> np.arange(n)) & 1


def enumerate_feasible_actions(state: int, config: SystemConfig) -> list:
    """All joint actions with idle inactive users and at most M users served."""
    choices = []
    for n, user in enumerate(config.users):
        if (state >> n) & 1:
            choices.append([a.id for a in user.actions])
        else:
            choices.append([0])
    m = config.servers
    return [a for a in itertools.product(*choices) if sum(1 for x in a if x) <= m]


def count_pairs(config: SystemConfig) -> int:
    """Number of (state, feasible action) pairs, without enumerating them."""
    total = 0
    n, m = config.n_users, config.servers
    busy = [sum(1 for a in u.actions if a.id != 0) for u in config.users]
    for s in range(2 ** n):
        # elementary symmetric sums of the active users' non-idle counts, up to degree m
        e = [1] + [0] * m
        for k in range(n):
            if (s >> k) & 1:
                for d in range(m, 0, -1):
                    e[d] += e[d - 1] * busy[k]
        total += sum(e)
    return total


def _check_feasible(state: int, action, config: SystemConfig):
    if len(action) != config.n_users:
        raise DomainError("action length must equal the number of users")
    served = 0
    for n, (user, a) in enumerate(zip(config.users, action)):
        if a:
            if not (state >> n) & 1:
                raise DomainError(f"user {n} is inactive but assigned action {a}")
            user.action(a)
            served += 1
    if served > config.servers:
        raise DomainError(f"{served} users served but only {config.servers} servers")


def _next_active_probs(state: int, action, config: SystemConfig) -> np.ndarray:
    p1 = np.empty(config.n_users)
    for n, (user, a) in enumerate(zip(config.users, action)):
        if (state >> n) & 1:
            p1[n] = 1.0 - user.action(a).success_prob
        else:
            p1[n] = user.lam
    return p1


def transition_prob(state: int, action, next_state: int, config: SystemConfig) -> float:
    """Product over (independent) users of the per-user file-state transitions."""
    _check_feasible(state, action, config)
    p1 = _next_active_probs(state, action, config)
    bits = state_bits(next_state, config.n_users)
    return float(np.prod(np.where(bits == 1, p1, 1.0 - p1)))


@dataclass
class CompositeLP:
    """max c.x  s.t.  A_eq x = b_eq (balance rows then normalisation), A_ub x <= b_ub (power)."""

    n_users: int
    states: np.ndarray     # state of each variable
    actions: list          # joint action of each variable
    c: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    redundant_rows: tuple = ()

    @property
    def n_variables(self) -> int:
        return self.c.size

    @property
    def n_constraints(self) -> int:
        return self.A_eq.shape[0] + self.A_ub.shape[0]

    def permuted(self, perm) -> "CompositeLP":
        perm = np.asarray(perm)
        return CompositeLP(self.n_users, self.states[perm], [self.actions[i] for i in perm],
                           self.c[perm], self.A_eq[:, perm], self.b_eq, self.A_ub[:, perm],
                           self.b_ub, self.redundant_rows)

    def without_power(self) -> "CompositeLP":
        return CompositeLP(self.n_users, self.states, self.actions, self.c, self.A_eq, self.b_eq,
                           self.A_ub[:0], self.b_ub[:0], self.redundant_rows)

    def to_text(self) -> str:
        """Plain-text tabular dump: objective, constraint senses/rhs, nonzero coefficients."""
        lines = [f"# occupation LP, {self.n_users} users",
                 f"VARIABLES {self.n_variables}", "OBJECTIVE max"]
        lines += [f"{j} {float(v)!r}" for j, v in enumerate(self.c) if v != 0]
        rows = [("E", b) for b in self.b_eq] + [("L", b) for b in self.b_ub]
        lines.append(f"CONSTRAINTS {len(rows)}")
        lines += [f"{i} {s} {float(b)!r}" for i, (s, b) in enumerate(rows)]
        lines.append("COEFFICIENTS")
        full = np.vstack([self.A_eq, self.A_ub])
        for i, j in zip(*np.nonzero(full)):
            lines.append(f"{i} {j} {float(full[i, j])!r}")
        lines.append("BOUNDS")
        lines.append("all >= 0")
        return "\n".join(lines) + "\n"


def read_lp_text(text: str):
    """Parse :meth:`CompositeLP.to_text` output into ``(c, A, senses, rhs)``."""
    it = iter(text.splitlines())
    section = None
    c = A = None
    senses, rhs = [], []
    for line in it:
        if not line or line.startswith("#"):
            continue
        head = line.split()
        if head[0] == "VARIABLES":
            c = np.zeros(int(head[1]))
        elif head[0] == "OBJECTIVE":
            section = "obj"
        elif head[0] == "CONSTRAINTS":
            A = np.zeros((int(head[1]), c.size))
            section = "rows"
        elif head[0] in ("COEFFICIENTS", "BOUNDS"):
            section = head[0]
        elif section == "obj":
            c[int(head[0])] = float(head[1])
        elif section == "rows":
            senses.append(head[1])
            rhs.append(float(head[2]))
        elif section == "COEFFICIENTS":
            A[int(head[0]), int(head[1])] = float(head[2])
    return c, A, senses, np.array(rhs)


def build_occupation_lp(config: SystemConfig, max_variables: int = MAX_VARIABLES) -> CompositeLP:
    n = config.n_users
    if n > 20 or count_pairs(config) > max_variables:
        raise CapacityError(f"occupation LP for {n} users exceeds {max_variables} variables")
    n_states = 2 ** n
    states, actions, p1_rows, reward, power = [], [], [], [], []
    for s in range(n_states):
        for a in enumerate_feasible_actions(s, config):
            states.append(s)
            actions.append(a)
            p1_rows.append(_next_active_probs(s, a, config))
            r = pw = 0.0
            for user, aid in zip(config.users, a):
                if aid:
                    act = user.action(aid)
                    r += user.weight * user.mean_file * act.success_prob
                    pw += act.power
            reward.append(r)
            power.append(pw)
    states = np.array(states, dtype=np.int64)
    p1 = np.array(p1_rows)
    bits = np.array([state_bits(s, n) for s in range(n_states)])  # (S, N)
    P = np.ones((states.size, n_states))
    for k in range(n):
        P *= np.where(bits[None, :, k] == 1, p1[:, k:k + 1], 1.0 - p1[:, k:k + 1])
    A_bal = (states[None, :] == np.arange(n_states)[:, None]).astype(float) - P.T
    A_eq = np.vstack([A_bal, np.ones((1, states.size))])
    b_eq = np.zeros(n_states + 1)
    b_eq[-1] = 1.0
    return CompositeLP(
        n_users=n, states=states, actions=actions, c=np.array(reward),
        A_eq=A_eq, b_eq=b_eq,
        A_ub=np.array([power]), b_ub=np.array([float(config.power_budget)]),
        # balance rows sum to zero, so one of them is implied by the others
        redundant_rows=(n_states - 1,),
    )


def optimal_value(config: SystemConfig) -> float:
    return solve_lp(build_occupation_lp(config)).value


def occupation_policy(lp: CompositeLP, result: LPResult) -> dict:
    """Conditional action distribution per visited state (diagnostic only)."""
    out = {}
    for s in np.unique(lp.states):
        idx = np.nonzero(lp.states == s)[0]
        mass = result.x[idx].sum()
        if mass > 1e-12:
            out[int(s)] = {lp.actions[i]: result.x[i] / mass for i in idx if result.x[i] > 1e-12}
    return out
