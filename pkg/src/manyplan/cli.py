"""Command-line front end: seed databases, single plans, suites, summaries.

Subcommands:
  build-seeds  --chain <file|name> --env <name|file> --count N --out <file>
  plan         --chain ... --env ... --start <q...|random> --goal-pose <7 vals>
               --planner {rrtstar,connect,many} [--out path.txt] [--trace t.csv]
  make-suite   generate a resolved, certified suite file
  bench        --suite <file> --out-dir <dir>
  summarize    --in <dir> --format {csv,json,md}
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path as FilePath

import numpy as np

from . import bench as bench_mod
from .bench import (TrialSpec, load_suite, make_suite, run_suite, save_suite,
                    summarize, summary_csv, summary_markdown)
from .collision import (CollisionChecker, default_sphere_model, load_world,
                        make_environment)
from .ik import build_seed_database, save_seed_database, solve_ik_sqp
from .kinematics import Pose, resolve_chain
from .many import ManyConfig, plan_many
from .planners import plan_rrt_star, plan_rrt_star_connect
from .tree import PlannerConfig, save_path


def _add_env_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--env", required=True,
                   help="table|wall|passage|random or a world YAML file")
    p.add_argument("--env-seed", type=int, default=0)
    p.add_argument("--n-obstacles", type=int, default=20)


def _resolve_env(args, reach: float):
    if args.env in ("table", "wall", "passage", "random"):
        return make_environment(args.env, reach, args.env_seed, args.n_obstacles)
    return load_world(args.env)


def _cmd_build_seeds(args) -> int:
    chain = resolve_chain(args.chain)
    world = _resolve_env(args, chain.reach)
    db = build_seed_database(chain, world, args.count, seed=args.seed)
    save_seed_database(db, args.out)
    print(f"wrote {len(db)} seeds to {args.out}")
    return 0


def _cmd_plan(args) -> int:
    chain = resolve_chain(args.chain)
    world = _resolve_env(args, chain.reach)
    model = default_sphere_model(chain)
    config = PlannerConfig(max_iterations=args.max_iters,
                           max_runtime_ms=args.timeout_ms,
                           nodes_max=args.nodes_max, seed=args.seed)
    target = Pose.from_array(np.asarray(args.goal_pose, dtype=float))
    if len(args.start) == 1 and args.start[0] == "random":
        checker = CollisionChecker(chain, model, world)
        q_start = bench_mod.sample_free_config(
            chain, checker, np.random.default_rng(args.seed))
    else:
        q_start = np.array([float(v) for v in args.start])

    if args.planner == "many":
        db = build_seed_database(chain, world, args.db_count, seed=args.seed)
        result = plan_many(chain, world, q_start, target, db,
                           ManyConfig(base=config, k=args.k), model=model)
    else:
        ik = solve_ik_sqp(chain, target, q_start)
        if not ik.success:
            print("IK from the start configuration failed; no goal config",
                  file=sys.stderr)
            return 1
        planner = plan_rrt_star if args.planner == "rrtstar" \
            else plan_rrt_star_connect
        result = planner(chain, world, q_start, ik.config, config, model)

    if result.success:
        print(f"solved: cost {result.path.cost:.4f} "
              f"({len(result.path)} waypoints, "
              f"first solution at iteration {result.first_iteration})")
    else:
        print("no solution within budget")
    if args.out and result.success:
        with open(args.out, "w") as fh:
            save_path(result.path, fh)
        print(f"path written to {args.out}")
    if args.trace:
        import csv as _csv
        with open(args.trace, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["iteration", "wall_ms", "best_cost"])
            for it, ms, best in result.trace:
                writer.writerow([it, f"{ms:.3f}",
                                 "" if not np.isfinite(best) else f"{best:.9f}"])
        print(f"trace written to {args.trace}")
    return 0 if result.success else 2


def _cmd_make_suite(args) -> int:
    overrides = {"max_iterations": args.max_iters,
                 "max_runtime_ms": args.timeout_ms,
                 "nodes_max": args.nodes_max}
    specs = make_suite(args.chain, args.env, args.trials,
                       planners=tuple(args.planners.split(",")),
                       env_seed=args.env_seed, n_obstacles=args.n_obstacles,
                       seed=args.seed, planner_config=overrides,
                       many={"k": args.k}, certify=not args.no_certify,
                       env_seed_per_instance=args.env_seed_per_instance)
    save_suite(specs, args.out)
    print(f"wrote {len(specs)} trial specs to {args.out}")
    return 0


def _cmd_bench(args) -> int:
    specs = load_suite(args.suite)
    failures = 0

    def progress(result):
        nonlocal failures
        status = "ok" if result.error is None else "ERROR"
        if result.error is not None:
            failures += 1
        print(f"[{status}] {result.trial_id} {result.planner}: "
              f"success={result.success} cost={result.final_cost}")

    run_suite(specs, out_dir=args.out_dir, progress=progress)
    print(f"{len(specs)} trials executed, outputs in {args.out_dir}")
    return 0 if failures == 0 else 1


def _cmd_summarize(args) -> int:
    in_dir = FilePath(args.in_dir)
    summary_path = in_dir / "summary.json"
    if not summary_path.exists():
        print(f"{summary_path} not found; run bench first", file=sys.stderr)
        return 1
    with open(summary_path) as fh:
        groups = json.load(fh)["groups"]
    if args.format == "json":
        print(json.dumps(groups, indent=1))
    elif args.format == "csv":
        print(summary_csv(groups), end="")
    else:
        print(summary_markdown(groups), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="manyplan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-seeds", help="precompute an IK seed database")
    p.add_argument("--chain", required=True)
    _add_env_args(p)
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_build_seeds)

    p = sub.add_parser("plan", help="plan a single query")
    p.add_argument("--chain", required=True)
    _add_env_args(p)
    p.add_argument("--start", nargs="+", required=True,
                   help="joint values in radians, or 'random'")
    p.add_argument("--goal-pose", nargs=7, type=float, required=True,
                   metavar=("X", "Y", "Z", "QW", "QX", "QY", "QZ"))
    p.add_argument("--planner", choices=("rrtstar", "connect", "many"),
                   default="many")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=3000)
    p.add_argument("--timeout-ms", type=float, default=3000.0)
    p.add_argument("--nodes-max", type=int, default=3000)
    p.add_argument("--db-count", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the path as structured text")
    p.add_argument("--trace", help="write the per-iteration trace CSV")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("make-suite", help="generate a certified trial suite")
    p.add_argument("--chain", required=True)
    _add_env_args(p)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--planners", default="rrtstar,connect,many")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=3000)
    p.add_argument("--timeout-ms", type=float, default=3000.0)
    p.add_argument("--nodes-max", type=int, default=3000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-certify", action="store_true")
    p.add_argument("--env-seed-per-instance", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_make_suite)

    p = sub.add_parser("bench", help="run a suite file")
    p.add_argument("--suite", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("summarize", help="render a suite summary")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--format", choices=("csv", "json", "md"), default="md")
    p.set_defaults(func=_cmd_summarize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
