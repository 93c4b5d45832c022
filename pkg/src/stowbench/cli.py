"""Command-line interface.

Subcommands:
  run       train repetitions of one (scenario, algorithm, environment) cell
            and emit curves.csv / finals.csv / plotdata
  oracle    brute-force optimum for a serialized problem instance
  compare   Welch-tested comparison of two experiment output directories
  plotdata  regenerate plot-ready CSV series from persisted runs
  validate  dry-run invariant check of an experiment config file
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import brute_force_min_makespan, brute_force_min_shifters
from .envs.clocked import TimeModel
from .errors import StowbenchError
from .harness.config import ExperimentConfig
from .harness.outputs import compare_variants, emit_outputs, write_plotdata
from .harness.runner import load_records, run_experiment
from .model import ProblemInstance


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stowbench",
                                     description="Container stowage planning benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="train one experiment cell")
    run.add_argument("--scenario", type=int, help="scenario id 1-8")
    run.add_argument("--algo", choices=("dqn", "qrdqn", "a2c", "ppo", "trpo"))
    run.add_argument("--env", choices=("spge", "spge-mc", "spaec"))
    run.add_argument("--reps", type=int, help="training repetitions")
    run.add_argument("--timesteps", type=int, help="environment steps per repetition")
    run.add_argument("--seed", type=int, help="base seed; repetition i uses seed+i")
    run.add_argument("--out", help="output directory")
    run.add_argument("--eval-every", type=int, dest="eval_every")
    run.add_argument("--eval-episodes", type=int, dest="eval_episodes")
    run.add_argument("--lambda-time", type=float, dest="lambda_time")
    run.add_argument("--workers", type=int, help="concurrent repetitions")
    run.add_argument("--trace", help="JSON-lines step trace file (workers=1 only)")
    run.add_argument("--config", help="experiment config JSON; flags override it")

    oracle = sub.add_parser("oracle", help="exact optimum for a problem instance")
    oracle.add_argument("--instance", required=True, help="ProblemInstance JSON file")
    oracle.add_argument("--objective", choices=("shifters", "makespan"), default="shifters")
    oracle.add_argument("--t-load", type=float, default=60.0)
    oracle.add_argument("--t-shift", type=float, default=50.0)
    oracle.add_argument("--out", help="write the result JSON here instead of stdout")

    compare = sub.add_parser("compare", help="compare two experiment directories")
    compare.add_argument("--a", required=True, help="first output directory (e.g. spge-mc)")
    compare.add_argument("--b", required=True, help="second output directory (e.g. spaec)")
    compare.add_argument("--out", required=True, help="comparison CSV path")
    compare.add_argument("--label-a", default="a")
    compare.add_argument("--label-b", default="b")

    plotdata = sub.add_parser("plotdata", help="regenerate plot-ready CSV series")
    plotdata.add_argument("--in", dest="in_dir", required=True, help="experiment output directory")
    plotdata.add_argument("--out", required=True, help="directory for the series CSVs")

    validate = sub.add_parser("validate", help="check an experiment config file")
    validate.add_argument("--config", required=True)
    return parser


def _merged_run_config(args: argparse.Namespace) -> ExperimentConfig:
    payload: dict = {}
    if args.config:
        payload = json.loads(Path(args.config).read_text())
    overrides = {
        "scenario": args.scenario,
        "algo": args.algo,
        "env": args.env,
        "reps": args.reps,
        "total_timesteps": args.timesteps,
        "seed": args.seed,
        "out": args.out,
        "eval_every": args.eval_every,
        "eval_episodes": args.eval_episodes,
        "lambda_time": args.lambda_time,
        "workers": args.workers,
        "trace": args.trace,
    }
    payload.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(payload)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _merged_run_config(args)
    records = run_experiment(cfg)
    paths = emit_outputs(records, cfg.out_dir)
    print(f"wrote {paths['curves']} and {paths['finals']} "
          f"({len(records)} runs, {len(paths['plotdata'])} plot series)")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = ProblemInstance.from_json(Path(args.instance).read_text())
    if args.objective == "shifters":
        result = brute_force_min_shifters(instance)
    else:
        result = brute_force_min_makespan(instance, TimeModel(args.t_load, args.t_shift))
    payload = json.dumps({
        "objective": args.objective,
        "best_value": result.best_value,
        "best_sequence": list(result.best_sequence),
        "nodes_explored": result.nodes_explored,
    }, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n")
    else:
        print(payload)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    rows = compare_variants(load_records(args.a), load_records(args.b), args.out,
                            label_a=args.label_a, label_b=args.label_b)
    significant = sum(1 for r in rows if r["significant"])
    print(f"wrote {args.out}: {len(rows)} comparisons, {significant} significant at p<0.05")
    return 0


def cmd_plotdata(args: argparse.Namespace) -> int:
    written = write_plotdata(load_records(args.in_dir), Path(args.out))
    print(f"wrote {len(written)} plot series under {args.out}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = ExperimentConfig.from_json_file(args.config)
    print(f"config ok: scenario={cfg.scenario} algo={cfg.algo} env={cfg.variant} "
          f"reps={cfg.resolved_repetitions} eval_every={cfg.resolved_eval_every}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "oracle": cmd_oracle,
    "compare": cmd_compare,
    "plotdata": cmd_plotdata,
    "validate": cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StowbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: invalid JSON input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
