"""Command-line front end.

Every subcommand writes CSV or ``key=value`` lines to stdout (or ``--out``).
Exit codes: 0 ok, 1 usage, 2 domain or capacity error, 3 invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import sys

import numpy as np

from .config_io import load_json, load_preset, experiment_from_json
from .engine import SERIES_COLUMNS, Experiment, run_trials
from .errors import CapacityError, DomainError, InvariantViolation
from .oracle import build_occupation_lp, solve_lp

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_INVARIANT = 0, 1, 2, 3
SWEEP_COLUMNS = ("v", "trials", "throughput_mean", "throughput_stderr", "power_mean",
                 "power_stderr", "queue_mean", "queue_stderr", "max_queue")


class UsageError(Exception):
    pass


def _fmt(x):
    return f"{x:.12g}" if isinstance(x, float) else str(x)


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _descriptor(args, default_preset=None) -> dict:
    if args.config and args.preset:
        raise UsageError("give --config or --preset, not both")
    if args.config:
        d = load_json(args.config)
    elif args.preset or default_preset:
        d = load_preset(args.preset or default_preset)
    else:
        raise UsageError("need --config or --preset")
    return {"config": d} if "users" in d else d


def _experiment(args, default_preset=None) -> tuple[Experiment, dict]:
    d = _descriptor(args, default_preset)
    if "config" not in d:
        raise UsageError("descriptor has no system config")
    exp = experiment_from_json(d)
    cfg = exp.config
    if args.v is not None:
        cfg = cfg.with_tradeoff(args.v)
    changes = {"config": cfg}
    for flag, name in (("horizon", "horizon"), ("trials", "trials"), ("thin", "thinning"),
                       ("mode", "file_length_mode")):
        val = getattr(args, flag, None)
        if val is not None:
            changes[name] = val
    return dataclasses.replace(exp, **changes), d


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_csv(exp: Experiment, seed: int, workers: int) -> str:
    summary = run_trials(exp, master_seed=seed, workers=workers)
    rows = [("slot",) + SERIES_COLUMNS]
    rows += summary.runs[0].series_rows()
    rows.append(("summary", summary.throughput.mean, summary.power.mean, summary.mean_queue.mean))
    if summary.trials > 1:
        rows.append(("stderr", summary.throughput.stderr, summary.power.stderr,
                     summary.mean_queue.stderr))
    return _csv(rows)


def cmd_single(args) -> int:
    exp, _ = _experiment(args, "single-demo")
    if exp.config.n_users != 1:
        raise UsageError(f"single needs exactly one user, config has {exp.config.n_users}")
    exp = dataclasses.replace(exp, policy="single")
    _emit(args, _run_csv(exp, args.seed, args.workers))
    return EXIT_OK


def cmd_multi(args) -> int:
    exp, _ = _experiment(args)
    exp = dataclasses.replace(exp, policy="lyapunov")
    _emit(args, _run_csv(exp, args.seed, args.workers))
    return EXIT_OK


def _parse_grid(text):
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad --v-grid {text!r}") from None
    if not grid:
        raise UsageError("empty V grid")
    return grid


def cmd_sweep_v(args) -> int:
    exp, d = _experiment(args)
    if args.v_grid is not None:
        grid = _parse_grid(args.v_grid)
    else:
        grid = [float(v) for v in d.get("v_grid", [])]
        if not grid:
            raise UsageError("empty V grid")
    rows = [SWEEP_COLUMNS]
    for v in grid:
        e = dataclasses.replace(exp, config=exp.config.with_tradeoff(v), thinning=0)
        s = run_trials(e, master_seed=args.seed, workers=args.workers)
        rows.append((v, s.trials, s.throughput.mean, s.throughput.stderr, s.power.mean,
                     s.power.stderr, s.mean_queue.mean, s.mean_queue.stderr, s.max_queue))
    _emit(args, _csv(rows))
    return EXIT_OK


def _special_case_args(args, d):
    spec = d.get("special_case", {}) if d else {}
    lambdas = args.lambdas if args.lambdas is not None else spec.get("lambdas")
    servers = args.servers if args.servers is not None else spec.get("servers")
    if lambdas is None or servers is None:
        raise UsageError("need --lambdas and --servers (or a special_case preset)")
    if isinstance(lambdas, str):
        try:
            lambdas = [float(x) for x in lambdas.split(",")]
        except ValueError:
            raise UsageError(f"bad --lambdas {lambdas!r}") from None
    return [float(x) for x in lambdas], int(servers)


def cmd_oracle(args) -> int:
    explicit = args.lambdas is not None and not (args.config or args.preset)
    d = {"special_case": {}} if explicit else _descriptor(args)
    if "special_case" in d:
        from .special_case import special_case_config
        lambdas, m = _special_case_args(args, d)
        cfg = special_case_config(lambdas, m)
    else:
        exp, _ = _experiment(args)
        cfg = exp.config
    lp = build_occupation_lp(cfg)
    res = solve_lp(lp)
    if args.lp_out:
        with open(args.lp_out, "w") as fh:
            fh.write(lp.to_text())
    _emit(args, f"opt_value={res.value:.12g}\nvariables={lp.n_variables}\n"
                f"constraints={lp.n_constraints}\n")
    return EXIT_OK


def cmd_relative_error(args) -> int:
    exp, _ = _experiment(args)
    opt = solve_lp(build_occupation_lp(exp.config)).value
    if opt == 0:
        raise DomainError("OPT is zero, relative error undefined")
    s = run_trials(dataclasses.replace(exp, thinning=0), master_seed=args.seed,
                   workers=args.workers)
    rel = abs(s.throughput.mean - opt) / opt
    _emit(args, f"opt_value={opt:.12g}\nthroughput_mean={s.throughput.mean:.12g}\n"
                f"throughput_stderr={s.throughput.stderr:.12g}\ntrials={s.trials}\n"
                f"relative_error={rel:.12g}\n")
    return EXIT_OK


def cmd_appendix_a(args) -> int:
    from .special_case import fixed_priority, exact_priority_two_queue, run_single_buffer
    d = load_preset(args.preset) if args.preset else load_preset("appendix-a")
    (l1, l2), _ = _special_case_args(args, d)
    horizon = args.horizon or 1_000_000
    rows = [("label", "lambda1", "lambda2", "exact", "simulated")]
    prio = fixed_priority([0, 1])
    for label, a, b in (("max-lambda", l1, l2), ("min-lambda", l2, l1)):
        sim = run_single_buffer(prio, [a, b], 1, horizon, args.seed)
        rows.append((label, a, b, exact_priority_two_queue(a, b), sim))
    _emit(args, _csv(rows))
    return EXIT_OK


def cmd_coupling_check(args) -> int:
    from .special_case import coupled_dominance_check, coupling_trace_csv, policy_by_name
    d = load_preset(args.preset) if args.preset else None
    lambdas, m = _special_case_args(args, d)
    if any(b < a for a, b in zip(lambdas, lambdas[1:])):
        raise UsageError("coupling needs --lambdas sorted ascending")
    policy = policy_by_name(args.policy)
    horizon = args.horizon or 100_000
    lines = []
    failed = None
    for k in range(args.seeds):
        rep = coupled_dominance_check(policy, lambdas, m, horizon, args.seed, trial=k)
        if not rep.holds:
            failed = (k, rep)
            break
        z = np.abs(rep.marginal_z(lambdas)).max()
        lines.append(f"seed={k} holds=true tx_pi={rep.tx_pi} tx_max_lambda={rep.tx_max_lambda} "
                     f"max_marginal_z={z:.3f}")
    if failed is None:
        lines.append(f"verdict=holds seeds={args.seeds} slots={horizon}")
        _emit(args, "\n".join(lines) + "\n")
        return EXIT_OK
    k, rep = failed
    lines.append(f"verdict=violated seed={k} slot={rep.first_violation_slot} check={rep.violation}")
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(coupling_trace_csv(policy, lambdas, m, rep.first_violation_slot + 1,
                                        args.seed, trial=k))
    return EXIT_INVARIANT


def _common(p, sim=True):
    p.add_argument("--config", help="experiment or config JSON file")
    p.add_argument("--preset", help="preset name (see LYAPIDX_PRESET_DIR)")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--seed", type=int, default=0)
    if sim:
        p.add_argument("--v", type=float, help="tradeoff parameter V")
        p.add_argument("--horizon", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--thin", type=int, help="record the series every THIN slots")
        p.add_argument("--mode", choices=("memoryless", "packet"))
        p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lyapidx", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in (("single", cmd_single), ("multi", cmd_multi), ("sweep-v", cmd_sweep_v),
                     ("relative-error", cmd_relative_error)):
        p = sub.add_parser(name)
        _common(p)
        if name == "sweep-v":
            p.add_argument("--v-grid", help="comma-separated V values")
        p.set_defaults(func=fn)

    p = sub.add_parser("oracle")
    _common(p, sim=False)
    p.add_argument("--v", type=float)
    p.add_argument("--lambdas")
    p.add_argument("--servers", type=int)
    p.add_argument("--lp-out", help="also write the LP in text form")
    p.set_defaults(func=cmd_oracle)

    for name, fn in (("appendix-a", cmd_appendix_a), ("coupling-check", cmd_coupling_check)):
        p = sub.add_parser(name)
        _common(p, sim=False)
        p.add_argument("--lambdas", help="comma-separated arrival rates")
        p.add_argument("--servers", type=int)
        p.add_argument("--horizon", type=int)
        if name == "coupling-check":
            p.add_argument("--policy", default="random")
            p.add_argument("--seeds", type=int, default=1)
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantViolation as e:
        print(f"invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except (DomainError, CapacityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
