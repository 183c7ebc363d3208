import numpy as np
import pytest

from lyapidx.config_io import preset_config
from lyapidx.model import Action, SystemConfig, UserParams


@pytest.fixture(scope="session")
def table1():
    return preset_config("table1")


def binary_user(lam, mu, phi, power, weight=1.0):
    return UserParams(lam=lam, mean_file=1.0 / mu, weight=weight, packet_based=True,
                      actions=(Action.idle(), Action(1, power, phi)))


def random_config(rng: np.random.Generator, n=None, m=None, n_actions=None, v=None):
    """Random valid packet-based config for property checks."""
    n = int(rng.integers(2, 7)) if n is None else n
    m = int(rng.integers(1, n)) if m is None else m
    users = []
    for _ in range(n):
        mu = rng.uniform(0.05, 1.0)
        k = int(rng.integers(1, 4)) if n_actions is None else n_actions
        acts = [Action.idle()]
        for j in range(1, k + 1):
            acts.append(Action(j, rng.uniform(0.5, 4.0), mu * rng.uniform(0.0, 1.0)))
        users.append(UserParams(lam=rng.uniform(0.01, 1.0), mean_file=1.0 / mu,
                                weight=rng.uniform(1.0, 5.0), packet_based=True,
                                actions=tuple(acts)))
    return SystemConfig(tuple(users), m, rng.uniform(0.5, 8.0),
                        rng.uniform(0.0, 200.0) if v is None else v)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
