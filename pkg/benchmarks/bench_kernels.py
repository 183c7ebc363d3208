"""Compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--slots 20000] [--repeat 3] [--no-end-to-end]

Kernel rows time each slot kernel through numba and through its ``py_func``
on identical inputs (compile time excluded). The end-to-end rows run a table1
simulation in a subprocess with LYAPIDX_DISABLE_NUMBA unset and set.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from lyapidx import _jit
from lyapidx import kernels as K
from lyapidx.config_io import preset_config
from lyapidx.model import pack_users
from lyapidx.special_case import MAX_LAMBDA, RANDOM


def _cases(slots):
    rng = np.random.default_rng(0)
    cfg = preset_config("table1")
    p, n = pack_users(cfg.users), cfg.n_users
    yield "multi_user_chunk", K.multi_user_chunk, lambda: (
        p.lam, p.reward_scale, p.weight, p.n_actions, p.phi, p.power, p.qhat, 70.0,
        cfg.power_budget, cfg.servers, False, rng.random((slots, n)),
        np.ones((slots, n), np.int64), np.ones(n, np.int64), np.zeros(n, np.int64),
        np.zeros(K.FS_SIZE), np.zeros(K.IS_SIZE, np.int64), np.zeros(n, np.int64), 0,
        np.zeros((1, 3)))

    u = cfg.users[3]
    phi, power, n_act = p.phi[3], p.power[3], int(p.n_actions[3])

    def single_args():
        ist = np.zeros(K.IS_SIZE, np.int64)
        ist[K.IS_F] = 1
        return (phi, power, n_act, u.lam, u.mean_file, 1.0, 70.0, rng.random(slots),
                np.zeros(K.FS_SIZE), ist, 0, np.zeros((1, 3)))
    yield "single_user_chunk", K.single_user_chunk, single_args

    lam = np.sort(rng.uniform(0.05, 0.95, 6))
    yield "single_buffer_chunk", K.single_buffer_chunk, lambda: (
        lam, 2, MAX_LAMBDA.code, MAX_LAMBDA.prio_array(6), rng.random((slots, 6)),
        rng.random((slots, 6)), np.ones(6, np.int64), np.zeros(K.IS_SIZE, np.int64),
        np.zeros(6, np.int64))
    yield "coupled_chunk", K.coupled_chunk, lambda: (
        lam, 2, RANDOM.code, RANDOM.prio_array(6), rng.random((slots, 6)),
        rng.random((slots, 6)), rng.random((slots, 6)), np.ones(6, np.int64),
        np.ones(6, np.int64), np.zeros(K.IS_SIZE, np.int64), np.zeros(6, np.int64),
        np.zeros(2, np.int64))


def _best(fn, make_args, repeat):
    times = []
    for _ in range(repeat):
        args = make_args()
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def bench_kernels(slots, repeat):
    if not _jit.USE_NUMBA:
        print("numba path disabled; kernel comparison skipped")
        return
    print(f"{'kernel':<22}{'numba s':>12}{'python s':>12}{'speedup':>10}")
    for name, fn, make_args in _cases(slots):
        fn(*make_args())  # compile or load from cache
        fast = _best(fn, make_args, repeat)
        slow = _best(fn.py_func, make_args, repeat)
        print(f"{name:<22}{fast:>12.4f}{slow:>12.4f}{slow / fast:>10.0f}")


E2E = ("import time; from lyapidx.config_io import preset_config;"
       "from lyapidx.multi_user import run_multi_user;"
       "cfg = preset_config('table1'); run_multi_user(cfg, 1000, seed=0);"
       "t = time.perf_counter(); run_multi_user(cfg, {slots}, seed=0);"
       "print(time.perf_counter() - t)")


def bench_end_to_end(slots):
    print(f"\ntable1 run, {slots} slots (warm start, subprocess per path)")
    for label, flag in (("numba", "0"), ("python", "1")):
        env = dict(os.environ, LYAPIDX_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", E2E.format(slots=slots)], env=env,
                             capture_output=True, text=True, check=True)
        print(f"{label:<8}{float(out.stdout):>10.4f} s")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--slots", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--no-end-to-end", action="store_true")
    args = ap.parse_args()
    bench_kernels(args.slots, args.repeat)
    if not args.no_end_to_end:
        bench_end_to_end(args.slots)


if __name__ == "__main__":
    main()
