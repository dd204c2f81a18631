"""Command line: single runs, benchmark sweeps and scenario validation.

Exit codes: 0 solved (or valid), 2 unsolved (or invalid scenario), 1 error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import report
from .domains import TEMPLATES, generate_clutter, hanoi_scenario, kitchen_scenario
from .errors import TmpidanError
from .planner import PlannerConfig, run_multi, run_single
from .workspace import FIXTURE, Scenario, dumps_scenario, load_scenario, save_scenario, validate_snapshot

TABLE3_SWEEP = (4, 8, 15, 20, 30, 42, 49, 64)
EXIT_OK, EXIT_ERROR, EXIT_UNSOLVED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors share the generic error exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


@dataclass
class RunSpec:
    domain: str
    config: PlannerConfig
    seed: int
    sizes: Sequence[int] = ()
    robots: int = 1
    targets: Optional[int] = None
    reps: int = 1
    scenario: Optional[Path] = None
    out: Optional[Path] = None
    fmt: str = "csv"
    timing: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise UsageError("--reps must be at least 1")
        if self.domain not in TEMPLATES:
            raise UsageError(f"unknown domain {self.domain!r}")


def row_seed(seed: int, index: int) -> int:
    """Independent seed per batch row so that row order and threading never matter."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def resolve_seed(value: Optional[int]) -> int:
    if value is not None:
        return value
    env = os.environ.get("TMPIDAN_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"TMPIDAN_SEED must be an integer, got {env!r}") from None


def make_scenario(spec: RunSpec, size: Optional[int], seed: int) -> Scenario:
    if spec.scenario is not None:
        return load_scenario(spec.scenario)
    if spec.domain == "clutter":
        return generate_clutter(size or 8, spec.robots, seed, spec.targets)
    if spec.domain == "hanoi":
        return hanoi_scenario(size or 3)
    return kitchen_scenario(seed)


def scenario_size(domain: str, sc: Scenario) -> int:
    movable = [o for o in sc.snapshot.objects if o.category != FIXTURE]
    return len(movable)


def _execute(spec: RunSpec, size: Optional[int], scenario_seed: int, planner_seed: int, rep: int) -> list[dict]:
    template = TEMPLATES[spec.domain]()
    try:
        sc = make_scenario(spec, size, scenario_seed)
    except TmpidanError as exc:
        return [_error_row(spec, size, scenario_seed, rep, exc)]
    n = scenario_size(spec.domain, sc)
    config = PlannerConfig(**{**spec.config.__dict__, "seed": planner_seed})
    if len(sc.snapshot.robots) > 1:
        multi = run_multi(template, sc, config)
        return [report.run_row(m, spec.domain, n, scenario_seed, rep, robot=r)
                for r, m in multi.per_robot.items()]
    m = run_single(template, sc, config)
    return [report.run_row(m, spec.domain, n, scenario_seed, rep, robot=sc.snapshot.robots[0].id)]


def _error_row(spec: RunSpec, size, seed, rep, exc) -> dict:
    row = {c: "" for c in report.RUN_COLUMNS}
    row.update(domain=spec.domain, objects=size or 0, seed=seed, rep=rep, solved=False,
               exit=f"error: {type(exc).__name__}")
    return row


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_run(spec: RunSpec) -> int:
    """One row per repetition (per robot for multi-robot scenes)."""
    size = spec.sizes[0] if spec.sizes else None
    rows = []
    for rep in range(spec.reps):
        rows += _execute(spec, size, spec.seed, row_seed(spec.seed, rep), rep)
    _emit(report.format_table(rows, report.RUN_COLUMNS, spec.fmt, spec.timing), spec.out)
    return EXIT_OK if all(r["solved"] is True for r in rows) else EXIT_UNSOLVED


def cmd_bench(spec: RunSpec) -> int:
    """Sweep sizes x repetitions; write aggregates, raw rows, plot data and a figure."""
    if not spec.sizes:
        raise UsageError("the sweep needs at least one size")
    jobs = [(size, rep, i) for i, (size, rep) in enumerate((s, r) for s in spec.sizes for r in range(spec.reps))]

    def work(job):
        size, rep, i = job
        s = row_seed(spec.seed, i)
        return _execute(spec, size, s, s, rep)

    with ThreadPoolExecutor(max_workers=max(1, spec.jobs)) as pool:
        rows = [r for batch in pool.map(work, jobs) for r in batch]
    ok = [r for r in rows if not str(r["exit"]).startswith("error")]
    multi = len({r["robot"] for r in ok}) > 1
    agg = report.aggregate(ok, by_robot=multi)
    columns = report.MULTI_BENCH_COLUMNS if multi else report.BENCH_COLUMNS
    out = spec.out or Path(f"bench.{spec.fmt}")
    report.write_table(out, agg, columns, spec.fmt, spec.timing)
    report.write_table(report.sibling(out, "runs"), rows, report.RUN_COLUMNS, spec.fmt, spec.timing)
    report.write_table(report.sibling(out, "plot"), report.plot_rows(ok), report.PLOT_COLUMNS, spec.fmt,
                       spec.timing)
    if spec.timing and ok:
        report.plot_depth_time(ok, report.sibling(out, "fig", "png"), title=f"{spec.domain} sweep")
    return EXIT_OK if any(r["solved"] is True for r in rows) else EXIT_UNSOLVED


def cmd_validate(path: Path) -> int:
    sc = load_scenario(path)
    problems = validate_snapshot(sc.snapshot)
    for p in problems:
        print(p)
    if problems:
        return EXIT_UNSOLVED
    print(f"{path}: ok")
    return EXIT_OK


def cmd_generate(spec: RunSpec) -> int:
    size = spec.sizes[0] if spec.sizes else None
    sc = make_scenario(spec, size, spec.seed)
    if spec.out is None:
        sys.stdout.write(dumps_scenario(sc))
    else:
        save_scenario(sc, spec.out)
    return EXIT_OK


def _common(p: argparse.ArgumentParser, sweep: bool) -> None:
    p.add_argument("--domain", choices=sorted(TEMPLATES), default="clutter")
    nargs = "+" if sweep else None
    p.add_argument("--objects", type=int, nargs=nargs, help="clutter object count(s)")
    p.add_argument("--disks", type=int, nargs=nargs, help="Hanoi disk count(s)")
    p.add_argument("--robots", type=int, default=1)
    p.add_argument("--targets", type=int, default=None, help="targets to sample (default: one per robot)")
    p.add_argument("--seed", type=int, default=None, help="falls back to $TMPIDAN_SEED, then 0")
    p.add_argument("--reps", type=int, default=3 if sweep else 1)
    p.add_argument("--depth-limit", type=int, default=64)
    p.add_argument("--motion-budget-ms", type=float, default=1000.0)
    p.add_argument("--fail-prob", type=float, default=0.0)
    p.add_argument("--ideal-motion", action="store_true")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--scenario", type=Path, default=None, help="scenario JSON instead of a generator")
    p.add_argument("--no-timing", action="store_true", help="blank the timing columns (reproducible bytes)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tmpidan", description="AND/OR graph network task and motion planner")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="solve one scenario, one row per repetition")
    _common(run, sweep=False)
    bench = sub.add_parser("bench", help="sweep object or disk counts and aggregate")
    _common(bench, sweep=True)
    bench.add_argument("--jobs", type=int, default=1, help="worker threads")
    gen = sub.add_parser("generate", help="write a generated scenario as JSON")
    _common(gen, sweep=False)
    val = sub.add_parser("validate", help="check a scenario file against the workspace invariants")
    val.add_argument("scenario", type=Path)
    return parser


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    sweep = args.command == "bench"
    sizes = args.disks if args.domain == "hanoi" else args.objects
    if sizes is None:
        sizes = []
    elif not sweep:
        sizes = [sizes]
    if sweep and not sizes:
        sizes = list(TABLE3_SWEEP) if args.domain == "clutter" else [3] if args.domain == "hanoi" else [0]
    try:
        config = PlannerConfig(depth_limit=args.depth_limit, budget_ms=args.motion_budget_ms,
                               fail_prob=args.fail_prob, ideal_motion=args.ideal_motion)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunSpec(
        domain=args.domain, config=config, seed=resolve_seed(args.seed), sizes=sizes,
        robots=args.robots, targets=args.targets, reps=args.reps, scenario=args.scenario,
        out=args.out, fmt=args.format, timing=not args.no_timing, jobs=getattr(args, "jobs", 1),
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args.scenario)
        spec = spec_from_args(args)
        return {"run": cmd_run, "bench": cmd_bench, "generate": cmd_generate}[args.command](spec)
    except (UsageError, TmpidanError, ValueError, OSError) as exc:
        print(f"tmpidan: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
