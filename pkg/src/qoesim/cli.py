"""Command-line entry point: dataset generation, experiment runs, report prep.

Exit codes: 0 success, 1 validation error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import harness, trip
from .gateway import HttpBackend
from .scenario import ScenarioValidationError, load_scenario

REPORT_SCHEMAS = {
    "episodes.csv": harness.EPISODE_COLUMNS,
    "aggregates.csv": harness.AGGREGATE_COLUMNS,
    "moving_average.csv": harness.MOVING_AVERAGE_COLUMNS,
    "traces.csv": harness.TRACE_COLUMNS,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trip",
        description="Seeded benchmark and simulator for QoE-centric tool routing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a benchmark dataset")
    gen.add_argument("--scenario", default="random", help="scenario file or bundled name")
    gen.add_argument("--topics", help="comma-separated topic subset (default: all)")
    gen.add_argument("--n", type=int, default=9, help="number of user profiles")
    gen.add_argument("--per-user", type=int, default=100, help="queries per user")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--rewriter", choices=["template", "llm"], default="template")
    gen.add_argument("--no-ambiguity", action="store_true")
    gen.add_argument("--no-tone", action="store_true")
    gen.add_argument("--out", required=True, help="output dataset JSON path")

    run = sub.add_parser("run", help="run the policy comparison experiment")
    run.add_argument("--scenario", default="random", help="scenario file or bundled name")
    run.add_argument("--out", required=True, help="output directory for CSVs")
    run.add_argument("--seed", type=int, action="append", help="override config seeds")
    run.add_argument("--policy", action="append", help="override config policies")
    run.add_argument("--backend", choices=["mock", "http"])
    run.add_argument("--no-profile-update", action="store_true")
    run.add_argument("--profile-init", choices=["warm", "cold", "opposite"])
    run.add_argument("--parallel", action="store_true", help="run episodes in a thread pool")
    run.add_argument("--dataset", help="use a previously generated dataset JSON")

    report = sub.add_parser("report", help="validate run outputs for plotting")
    report.add_argument("--in", dest="in_dir", required=True, help="directory of run CSVs")
    return parser


def _make_gateway(backend: str):
    return HttpBackend() if backend == "http" else None


def cmd_gen(args) -> int:
    config = load_scenario(args.scenario)
    topics = config.topics
    if args.topics:
        topics = [t.strip() for t in args.topics.split(",") if t.strip()]
        unknown = [t for t in topics if t not in config.topics]
        if unknown:
            raise ScenarioValidationError([f"--topics: unknown topic {t!r}" for t in unknown])
    rewriter = None
    if args.rewriter == "llm":
        rewriter = trip.LlmRewriter(HttpBackend())
    profiles, queries = trip.build_dataset(
        config.registry,
        topics,
        args.n,
        args.per_user,
        args.seed,
        rewriter=rewriter,
        ambiguity=not args.no_ambiguity,
        tone=not args.no_tone,
    )
    trip.export_dataset(profiles, queries, args.out)
    print(f"wrote {len(profiles)} profiles and {len(queries)} queries to {args.out}")
    return 0


def cmd_run(args) -> int:
    config = load_scenario(args.scenario)
    if args.seed:
        config.seeds = list(args.seed)
    if args.policy:
        unknown = [p for p in args.policy if p not in ("dir_rout", "pre_rout", "jaunt_greedy", "jaunt")]
        if unknown:
            raise ScenarioValidationError([f"--policy: unknown policy {p!r}" for p in unknown])
        config.policies = list(args.policy)
    if args.backend:
        config.backend = args.backend
    if args.no_profile_update:
        config.profile_update = False
    if args.profile_init:
        config.profile_init = args.profile_init
    gateway = _make_gateway(config.backend)
    dataset = trip.import_dataset(args.dataset) if args.dataset else None
    results, profiles = harness.run_matrix(
        config, gateway=gateway, parallel=args.parallel, dataset=dataset
    )
    metrics = harness.aggregate(results)
    env = harness.NetworkEnv(config, config.seeds[0])
    paths = harness.emit_csv(metrics, results, args.out, config, profiles, env=env)
    by_policy: dict[str, list[float]] = {}
    for (policy, _), row in metrics.rows.items():
        by_policy.setdefault(policy, []).append(row["mean_qoe"])
    for policy in config.policies:
        values = by_policy.get(policy, [])
        mean = sum(values) / len(values) if values else float("nan")
        print(f"{policy}: mean QoE {mean:.4f} over {len(values)} users")
    print("wrote " + ", ".join(sorted(paths.values())))
    return 0


def cmd_report(args) -> int:
    problems = []
    manifest = {"directory": os.path.abspath(args.in_dir), "files": {}}
    for name, columns in REPORT_SCHEMAS.items():
        path = os.path.join(args.in_dir, name)
        if not os.path.exists(path):
            problems.append(f"{path}: missing")
            continue
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, [])
            missing = [c for c in columns if c not in header]
            if missing:
                problems.append(f"{path}: missing columns {missing}")
                continue
            rows = sum(1 for _ in reader)
        manifest["files"][name] = {"rows": rows, "columns": header}
    if problems:
        for problem in problems:
            print(problem, file=sys.stderr)
        return 1
    manifest_path = os.path.join(args.in_dir, "report_manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    for name, info in manifest["files"].items():
        print(f"{name}: {info['rows']} rows")
    print(f"wrote {manifest_path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "run":
            return cmd_run(args)
        return cmd_report(args)
    except ScenarioValidationError as exc:
        print(exc, file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
