"""Metrics, trial aggregation and experiment descriptors."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .model import SystemConfig

CHUNK = 1 << 16
SERIES_COLUMNS = ("running_throughput", "running_power", "queue_value")


@dataclass
class Metrics:
    """Outcome of one simulation run.

    ``series`` rows are recorded every ``thin`` slots (none when thin == 0);
    ``max_power_excess`` is the largest value of cum_power(t) - beta*(t+1).
    """

    horizon: int
    throughput: float
    power: float
    mean_queue: float
    max_queue: float
    max_power_excess: float = 0.0
    served: Optional[np.ndarray] = None
    thin: int = 0
    series: Optional[np.ndarray] = None

    @property
    def service_shares(self) -> Optional[np.ndarray]:
        if self.served is None:
            return None
        total = self.served.sum()
        return self.served / total if total else np.zeros_like(self.served, dtype=float)

    def series_rows(self):
        if self.series is None or not self.thin:
            return []
        slots = self.thin * np.arange(1, self.series.shape[0] + 1)
        return [(int(s), *map(float, row)) for s, row in zip(slots, self.series)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("slot",) + SERIES_COLUMNS)
        for row in self.series_rows():
            w.writerow(_fmt_row(row))
        w.writerow(_fmt_row(("summary", self.throughput, self.power, self.mean_queue)))
        return buf.getvalue()


def _fmt_row(row):
    return [f"{x:.12g}" if isinstance(x, float) else x for x in row]


@dataclass
class Stat:
    mean: float
    stderr: float

    def __str__(self):
        return f"{self.mean:.6g} +- {self.stderr:.2g}"


def mean_stderr(values) -> Stat:
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        return Stat(float(x.mean()) if x.size else math.nan, 0.0)
    return Stat(float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)))


@dataclass
class TrialSummary:
    runs: list
    throughput: Stat = field(init=False)
    power: Stat = field(init=False)
    mean_queue: Stat = field(init=False)
    max_queue: float = field(init=False)

    def __post_init__(self):
        self.throughput = mean_stderr([r.throughput for r in self.runs])
        self.power = mean_stderr([r.power for r in self.runs])
        self.mean_queue = mean_stderr([r.mean_queue for r in self.runs])
        self.max_queue = max(r.max_queue for r in self.runs)

    @property
    def trials(self) -> int:
        return len(self.runs)


@dataclass
class Experiment:
    """What to simulate: a config, a policy, and run lengths."""

    config: SystemConfig
    policy: str = "lyapunov"   # "lyapunov" (multi-user) or "single" (one user, renewal frames)
    horizon: int = 1_000_000
    trials: int = 1
    file_length_mode: str = "memoryless"
    thinning: int = 0


def run_one(exp: Experiment, master_seed: int, trial: int) -> Metrics:
    from .multi_user import run_multi_user
    from .single_user import run_single_user

    cfg = exp.config
    if exp.policy == "single":
        return run_single_user(cfg.users[0], cfg.power_budget, cfg.tradeoff, exp.horizon,
                               master_seed, trial=trial, thin=exp.thinning)
    if exp.policy == "lyapunov":
        return run_multi_user(cfg, exp.horizon, master_seed, trial=trial,
                              mode=exp.file_length_mode, thin=exp.thinning)
    raise ValueError(f"unknown policy {exp.policy!r}")


def run_trials(exp: Experiment, trials: Optional[int] = None, master_seed: int = 0,
               workers: int = 1, runner: Callable = run_one) -> TrialSummary:
    """Run independent trials (trial index k uses spawn key k) and aggregate them."""
    n = exp.trials if trials is None else trials
    if n < 1:
        raise ValueError("trials must be >= 1")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            runs = list(pool.map(lambda k: runner(exp, master_seed, k), range(n)))
    else:
        runs = [runner(exp, master_seed, k) for k in range(n)]
    return TrialSummary(runs)
