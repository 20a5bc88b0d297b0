"""Command-line entry point: oracle computation, simulation, and the
three experiment drivers, all reproducible from (config, seed).

Exit codes: 0 success, 2 configuration/input error, 3 numerical
non-convergence.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import sim
from .model import Instance, Mode, load_instance, validate
from .oracle import solve_saddle, tstar_ab_gaussian, DEFAULT_TOL
from .policy import make_policy

EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3


class ConfigError(Exception):
    pass


def _master_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("ABCS_SEED")
    return int(env) if env else 0


def _load_instance(path) -> Instance:
    try:
        inst = load_instance(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load instance {path}: {exc}") from exc
    diag = validate(inst)
    if diag.errors:
        raise ConfigError(f"invalid instance {path}: " + "; ".join(diag.errors))
    for w in diag.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return inst


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, config: dict, artifacts: list[Path]):
    (out / "config.json").write_text(json.dumps(config, indent=2,
                                                default=str) + "\n")
    manifest = {"config": config}
    hashes = {}
    for p in artifacts:
        if p.exists():
            hashes[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
    manifest["artifacts"] = hashes
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                  default=str) + "\n")


def cmd_oracle(args) -> int:
    inst = _load_instance(args.instance)
    modes = ([Mode.ACTIVE, Mode.PROPORTIONAL, Mode.AGNOSTIC, Mode.OBLIVIOUS]
             if args.all_modes else [Mode.parse(args.mode)])
    results = {}
    worst_gap = 0.0
    for mode in modes:
        if args.closed_form:
            res = tstar_ab_gaussian(inst, mode)
        else:
            res = solve_saddle(inst, mode, tol=args.tol)
        results[mode.value] = res.to_dict()
        worst_gap = max(worst_gap, res.gap)
    if args.all_modes:
        order = [results[m.value]["tstar"] for m in modes]
        results["ordering_ok"] = bool(
            all(order[k] <= order[k + 1] * (1 + 1e-3)
                for k in range(len(order) - 1)))
    payload = json.dumps(results, indent=2) + "\n"
    if args.out:
        out = _out_dir(args)
        (out / "oracle.json").write_text(payload)
        _write_manifest(out, vars(args), [out / "oracle.json"])
    print(payload, end="")
    if worst_gap > args.tol:
        print(f"warning: solver gap {worst_gap:.2e} above tolerance",
              file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return 0


def _make_env_and_instance(args, rng):
    if args.instance:
        inst = _load_instance(args.instance)
    else:
        K, J = args.arms, args.subpops
        inst = sim.gen_instance_uniform(K, J, rng)
    return inst


def cmd_simulate(args) -> int:
    seed = _master_seed(args)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0)))
    inst = _make_env_and_instance(args, rng)
    mode = Mode.parse(args.mode)
    out = _out_dir(args)
    records = []
    trace_dir = out / "trace"
    for rep in range(args.reps):
        run_rng = np.random.default_rng(np.random.SeedSequence((seed, rep)))
        env = sim.SyntheticEnv(inst, run_rng)
        policy = make_policy(args.policy, env.meta(), mode,
                             threshold=args.threshold,
                             tracking=args.tracking)
        rec = sim.run_episode(env, policy, mode, args.delta,
                              horizon=args.horizon, seed=rep,
                              policy_name=args.policy,
                              keep_trace=args.trace)
        records.append(rec)
        if args.trace and rec.trace is not None:
            trace_dir.mkdir(exist_ok=True)
            sim.write_trace_csv(trace_dir / f"run_{rep}.csv", rec.trace)
    runs = out / "runs.csv"
    sim.write_runs_csv(runs, records)
    _write_manifest(out, vars(args), [runs])
    return 0


def cmd_calibrate(args) -> int:
    seed = _master_seed(args)
    grid = [float(x) for x in args.delta_grid.split(",")]
    rows = sim.experiment_calibrate(args.instances, args.arms, grid,
                                    seed=seed, horizon=args.horizon,
                                    threshold=args.threshold)
    out = _out_dir(args)
    path = out / "calibration.csv"
    sim.write_calibration_csv(path, rows)
    _write_manifest(out, vars(args), [path])
    return 0


def cmd_sweep(args) -> int:
    seed = _master_seed(args)
    records = sim.experiment_sweep(args.instances, seed=seed,
                                   delta=args.delta, horizon=args.horizon)
    out = _out_dir(args)
    path = out / "runs.csv"
    sim.write_runs_csv(path, records)
    summary = {}
    for pol, mode in sim.SWEEP_POLICIES:
        times = [r.stop_time for r in records
                 if r.policy == pol and r.mode == mode
                 and r.stop_time is not None]
        summary[f"{pol}/{mode}"] = {
            "episodes": len(times),
            "mean_stop_time": float(np.mean(times)) if times else None,
        }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    _write_manifest(out, vars(args), [path, out / "summary.json"])
    print(json.dumps(summary, indent=2))
    return 0


def cmd_replay(args) -> int:
    seed = _master_seed(args)
    out = _out_dir(args)
    records = []
    trace_dir = out / "trace"
    policies = [p.split(":") for p in args.policies.split(",")]
    for k, (pol_name, mode_name) in enumerate(policies):
        mode = Mode.parse(mode_name)
        env = sim.load_event_log(args.data, seed=seed + k,
                                 bootstrap=args.bootstrap)
        horizon = args.horizon or env.capacity
        policy = make_policy(pol_name, env.meta(), mode)
        rec = sim.run_episode(env, policy, mode, args.delta,
                              horizon=horizon, seed=seed,
                              policy_name=pol_name, keep_trace=True,
                              risk_every=args.risk_every)
        records.append(rec)
        trace_dir.mkdir(exist_ok=True)
        sim.write_trace_csv(trace_dir / f"{pol_name}_{mode.value}.csv",
                            rec.trace)
    path = out / "runs.csv"
    sim.write_runs_csv(path, records)
    _write_manifest(out, vars(args), [path])
    for r in records:
        print(f"{r.policy}/{r.mode}: stop={r.stop_time} censored={r.censored} "
              f"delta_final={r.delta_final:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abcs",
        description="Identify all arms better than a control across "
                    "subpopulations: oracles, policies, simulations.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="characteristic time and weights")
    p.add_argument("--instance", required=True)
    p.add_argument("--mode", default="agnostic")
    p.add_argument("--all-modes", action="store_true")
    p.add_argument("--closed-form", action="store_true",
                   help="use the two-arm Gaussian closed form")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("simulate", help="run episodes on one instance")
    p.add_argument("--instance", default=None)
    p.add_argument("--arms", type=int, default=2, help="K (non-control)")
    p.add_argument("--subpops", type=int, default=1)
    p.add_argument("--policy", default="tas",
                   choices=("tas", "bc", "uniform"))
    p.add_argument("--mode", default="agnostic")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--horizon", type=int, default=sim.DEFAULT_HORIZON)
    p.add_argument("--threshold", default="stylized",
                   choices=("stylized", "theory"))
    p.add_argument("--tracking", default="d", choices=("d", "c"))
    p.add_argument("--trace", action="store_true")
    p.add_argument("--out", default="abcs-out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="risk-calibration study")
    p.add_argument("--instances", type=int, default=1000)
    p.add_argument("--arms", type=int, default=2)
    p.add_argument("--delta-grid", default="0.5,0.2,0.1,0.05,0.02,0.01")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--horizon", type=int, default=1_000_000)
    p.add_argument("--threshold", default="stylized",
                   choices=("stylized", "theory"))
    p.add_argument("--out", default="abcs-out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("sweep", help="stopping-time sweep over instances")
    p.add_argument("--instances", type=int, default=3000)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--horizon", type=int, default=sim.DEFAULT_HORIZON)
    p.add_argument("--out", default="abcs-out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="replay a recorded event log")
    p.add_argument("--data", required=True)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--policies",
                   default="tas:active,tas:proportional,tas:agnostic,"
                           "tas:oblivious,uniform:agnostic")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--risk-every", type=int, default=1)
    p.add_argument("--bootstrap", action="store_true",
                   help="sample pools with replacement")
    p.add_argument("--out", default="abcs-out")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
