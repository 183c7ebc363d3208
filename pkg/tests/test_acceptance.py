"""Acceptance criteria 1-11, one test each.

Each test prints ``criterion N: PASS|FAIL  <measurements>`` and the lines are
repeated in an "acceptance criteria" section at the end of the pytest run.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, random_config
from lyapidx.config_io import preset_config
from lyapidx.engine import mean_stderr
from lyapidx.model import Action, SystemConfig, UserParams
from lyapidx.multi_user import queue_bound_multi, run_multi_user
from lyapidx.oracle import build_occupation_lp, optimal_value, solve_lp
from lyapidx.single_user import queue_bound, run_single_user
from lyapidx.special_case import (MAX_LAMBDA, RANDOM, coupled_dominance_check, dominates,
                                  exact_priority_two_queue, fixed_priority, run_single_buffer,
                                  special_case_config, zoo)

MILLION = 1_000_000


def verdict(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_exact_two_queue():
    a = exact_priority_two_queue(0.5, 0.25)
    b = exact_priority_two_queue(0.25, 0.5)
    times = []
    for _ in range(200):
        t = time.perf_counter()
        exact_priority_two_queue(0.5, 0.25)
        times.append(time.perf_counter() - t)
    ms = 1e3 * float(np.median(times))
    ok = abs(a - 0.7) <= 1e-10 and abs(b - 0.6786) <= 5e-5 and ms < 1.0
    verdict(1, ok, f"theta(1/2,1/4)={a:.12f} theta(1/4,1/2)={b:.6f} median {ms:.3f} ms")


def test_criterion_02_simulated_two_queue():
    prio = fixed_priority([0, 1])
    a = run_single_buffer(prio, [0.5, 0.25], 1, MILLION, seed=2)
    b = run_single_buffer(prio, [0.25, 0.5], 1, MILLION, seed=2)
    ok = abs(a - 0.7) <= 0.005 and abs(b - 0.6786) <= 0.005
    verdict(2, ok, f"simulated {a:.5f} (target 0.7), {b:.5f} (target 0.6786)")


def _random_single_user(rng):
    k = int(rng.integers(1, 4))
    acts = [Action.idle()] + [Action(j, rng.uniform(0.2, 6.0), rng.uniform(0.0, 1.0))
                              for j in range(1, k + 1)]
    return UserParams(rng.uniform(0.01, 1.0), rng.uniform(1.0, 20.0), tuple(acts))


def test_criterion_03_queue_bounds():
    rng = np.random.default_rng(3)
    horizon, violations = 100_000, 0
    for k in range(200):
        u = _random_single_user(rng)
        beta, v = rng.uniform(0.1, 5.0), rng.uniform(0.0, 500.0)
        m = run_single_user(u, beta, v, horizon, seed=3, trial=k)
        violations += m.max_queue > queue_bound(v, u, beta)
        cfg = random_config(rng)
        m = run_multi_user(cfg, horizon, seed=3, trial=k,
                           mode="packet" if k % 2 else "memoryless")
        violations += m.max_queue > queue_bound_multi(cfg)
    verdict(3, violations == 0, f"{violations} violations over 200 single-user and 200 "
                                f"multi-user configs x {horizon} slots")


def test_criterion_04_power_constraint(table1):
    worst = {}
    for v in (1, 10, 70, 200):
        m = run_multi_user(table1.with_tradeoff(v), MILLION, seed=4)
        worst[v] = m.power
    ok = all(p <= 5 + 1e-3 for p in worst.values())
    verdict(4, ok, "final average power " + ", ".join(f"V={v}: {p:.5f}" for v, p in worst.items()))


def _protocol_instance(rng, base, protocol):
    users = []
    for u in base:
        act = u.action(1)
        q = act.success_prob * u.mean_file  # phi / mu
        if protocol == "A":
            lam, mu, c = rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(1, 5)
            power, phi = act.power, q * mu
        else:
            lam, mu, c = u.lam, 1 / u.mean_file, u.weight
            power, phi = rng.uniform(2, 4), mu * rng.uniform(0, 1)
        users.append(UserParams(lam, 1 / mu, (Action.idle(), Action(1, power, phi)), c, True))
    return SystemConfig(tuple(users), 2, 5.0, 70.0)


def test_criterion_05_near_optimality(table1):
    opt = optimal_value(table1)
    runs = [run_multi_user(table1, MILLION, seed=5, trial=k).throughput for k in range(20)]
    obj = mean_stderr(runs)
    rel = abs(obj.mean - opt) / opt
    rng = np.random.default_rng(5)
    errs = {"A": [], "B": []}
    for protocol in ("A", "B"):
        for k in range(25):
            cfg = _protocol_instance(rng, table1.users[:4], protocol)
            o = optimal_value(cfg)
            thr = run_multi_user(cfg, MILLION, seed=50, trial=len(errs["A"]) + k).throughput
            errs[protocol].append(abs(thr - o) / o)
    mean_err = float(np.mean(errs["A"] + errs["B"]))
    ok = rel <= 0.005 and mean_err <= 0.01
    verdict(5, ok, f"table1 OPT={opt:.6f} OBJ={obj} rel={rel:.5f} (<=0.005); random N=4 "
                   f"mean rel={mean_err:.5f} (<=0.01; A {np.mean(errs['A']):.5f}, "
                   f"B {np.mean(errs['B']):.5f})")


def test_criterion_06_gap_slope():
    cfg = preset_config("single-demo")
    u, beta = cfg.users[0], cfg.power_budget
    mu_star = solve_lp(build_occupation_lp(SystemConfig((u,), 1, beta))).value
    horizon = 10 * MILLION
    grid = (1, 10, 100, 1000)
    trials = {1: 10, 10: 10, 100: 40, 1000: 320}
    gaps = {}
    for v in grid:
        s = mean_stderr([run_single_user(u, beta, v, horizon, seed=6, trial=k).throughput
                         for k in range(trials[v])])
        gaps[v] = (mu_star - s.mean, s.stderr)
    if min(g for g, _ in gaps.values()) <= 0:
        verdict(6, False, f"nonpositive gap, cannot fit: {gaps}")
    slope = np.polyfit(np.log(grid), np.log([gaps[v][0] for v in grid]), 1)[0]
    detail = ", ".join(f"V={v}: {g:.3g}+-{se:.1g}" for v, (g, se) in gaps.items())
    verdict(6, abs(slope + 1) <= 0.3, f"mu*={mu_star:.6f} gaps {detail}; slope {slope:.3f}")


def test_criterion_07_max_lambda_optimal():
    rng = np.random.default_rng(7)
    horizon, trials, bad = 100_000, 10, []
    for inst in range(20):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, min(3, n - 1) + 1))
        lam = np.sort(rng.uniform(0.02, 0.98, n))
        opt = optimal_value(special_case_config(lam, m))
        stats = {}
        for p in zoo(n, rng):
            stats[p.name] = mean_stderr([run_single_buffer(p, lam, m, horizon, seed=7,
                                                           trial=1000 * inst + k)
                                         for k in range(trials)])
        ml = stats[MAX_LAMBDA.name]
        for name, s in stats.items():
            if name != MAX_LAMBDA.name and not dominates(s, ml):
                bad.append(f"instance {inst}: {name} {s} beats max-lambda {ml}")
        # a saturated run can show zero spread; stderr cannot resolve below one slot in all runs
        resolution = 1.0 / (trials * horizon)
        if abs(ml.mean - opt) > 3 * max(ml.stderr, resolution):
            bad.append(f"instance {inst}: max-lambda {ml} vs OPT {opt:.6f}")
    verdict(7, not bad, "20 instances ok" if not bad else "; ".join(bad))


def test_criterion_08_coupling():
    rng = np.random.default_rng(8)
    horizon, violations = 100_000, []
    dev = np.zeros(4)
    var = np.zeros(4)
    for seed in range(100):
        lam = np.sort(rng.uniform(0.02, 0.98, 4))
        rep = coupled_dominance_check(RANDOM, lam, 2, horizon, seed=seed)
        if not rep.holds:
            violations.append((seed, rep.first_violation_slot, rep.violation))
        dev += rep.a_lam_ones - rep.slots * lam
        var += rep.slots * lam * (1 - lam)
    z = dev / np.sqrt(var)
    ok = not violations and np.abs(z).max() < 4
    verdict(8, ok, f"violations {violations or 0}; pooled marginal z per position "
                   + " ".join(f"{x:+.2f}" for x in z))


def test_criterion_09_file_length_robustness():
    res = {}
    for law in ("geometric", "uniform", "poisson"):
        cfg = preset_config(f"table2-{law}").with_tradeoff(70.0)
        res[law] = mean_stderr([run_multi_user(cfg, MILLION, seed=9, trial=k, mode="packet")
                                .throughput for k in range(5)])
    vals = [s.mean for s in res.values()]
    spread = (max(vals) - min(vals)) / min(vals)
    verdict(9, spread <= 0.05, ", ".join(f"{k} {s}" for k, s in res.items())
            + f"; max relative spread {spread:.4f}")


def test_criterion_10_oracle_dimensions(table1):
    lp = build_occupation_lp(table1)
    ok = lp.n_constraints == 258 and lp.n_variables == 5984
    verdict(10, ok, f"{lp.n_variables} variables, {lp.n_constraints} constraints")


def test_criterion_11_memoryless_vs_packet(table1):
    mem = mean_stderr([run_multi_user(table1, MILLION, seed=11, trial=k).throughput
                       for k in range(20)])
    pkt = mean_stderr([run_multi_user(table1, MILLION, seed=11, trial=100 + k, mode="packet")
                       .throughput for k in range(20)])
    tol = 3 * math.hypot(mem.stderr, pkt.stderr)
    verdict(11, abs(mem.mean - pkt.mean) <= tol,
            f"memoryless {mem} vs packet {pkt}; |diff| {abs(mem.mean - pkt.mean):.5f} "
            f"<= {tol:.5f}")
