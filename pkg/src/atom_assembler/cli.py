"""Command-line entry point.

Exit status: 0 success, 1 usage/domain/config error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .engine import AssemblyTrace, PlanningError, plan_exchange, reconstruct_repeatedly, run_assembly
from .lattice import DomainError, Site, Workspace
from .montecarlo import (DEFAULT_SEED, FORECAST_PARAMS, AggregateStats, ExperimentConfig, forecast_config,
                         run_experiment, run_trials, stats_to_csv, stats_to_json, wilson_interval)
from .patterns import PatternParseError, TargetPattern, checkerboard, inverse, parse_grid, parse_pattern, square_pattern
from .physics import ConfigError, PhysicsParams, execute_cycle, load_initial, rng_stream
from .planner import IllegalMoveError, MovePlan, Occupancy, plan_cycle, replay

RECIPES = ("fig2b_success_curves", "fig2c_filling", "fig2a_trace", "fig3a_reconstruct",
           "fig3b_morph", "fig3c_exchange", "forecast_50x50", "custom")
HEADER = f"# atom-assembler v{__version__}\n"
FILLING_COLUMNS = ("target", "size", "mean_max_filling", "std_max_filling", "trials")
SUMMARY_COLUMNS = ("metric", "value")
HISTOGRAM_COLUMNS = ("reconstructions", "runs")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    buf.write(HEADER)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _params(args, default: PhysicsParams) -> PhysicsParams:
    if args.params:
        override = json.loads(_read(args.params))
        if not isinstance(override, dict):
            raise ConfigError("physics parameters must be a JSON object")
        return PhysicsParams.from_dict({**default.to_dict(), **override})
    return default


# ------------------------------------------------------------------- recipes

def _recipe_curves(args, out: Path, sizes=range(4, 11)):
    params = _params(args, PhysicsParams())
    stats = [run_experiment(ExperimentConfig(target=f"square:{n}", params=params, max_cycles=args.max_cycles or 15,
                                             trials=args.trials or 1000, seed=args.seed), args.workers)
             for n in sizes]
    return params, stats


def recipe_fig2b(args, out: Path) -> dict:
    params, stats = _recipe_curves(args, out)
    _write_atomic(out / "success_curves.csv", stats_to_csv(stats))
    _write_atomic(out / "summary.json", stats_to_json(stats, {"recipe": args.recipe, "seed": args.seed,
                                                              "params": params.to_dict()}))
    return {s.target: s.final_success for s in stats}


def recipe_fig2c(args, out: Path) -> dict:
    params, stats = _recipe_curves(args, out)
    rows = [[s.target, int(round(s.target_size ** 0.5)), f"{s.mean_max_filling:.6f}", f"{s.std_max_filling:.6f}",
             s.trials] for s in stats]
    _write_atomic(out / "filling.csv", _csv(FILLING_COLUMNS, rows))
    _write_atomic(out / "summary.json", stats_to_json(stats, {"recipe": args.recipe, "seed": args.seed,
                                                              "params": params.to_dict()}))
    return {s.target: s.mean_max_filling for s in stats}


def recipe_fig2a(args, out: Path) -> dict:
    params = _params(args, PhysicsParams())
    ws = Workspace(19, 19)
    target = square_pattern(10, ws)
    rng = rng_stream(args.seed, 0)
    occ = load_initial(ws, params, rng)
    trace = run_assembly(occ, target, params, args.max_cycles or 15, rng)
    _write_atomic(out / "trace.json", trace.to_json())
    _write_atomic(out / "trace.csv", HEADER + trace.to_csv())
    _write_atomic(out / "initial.txt", occ.to_text())
    _write_atomic(out / "final.txt", trace.final.to_text())
    return {"success_cycle": trace.success_cycle, "max_filling_fraction": trace.max_filling_fraction}


def recipe_fig3a(args, out: Path) -> dict:
    params = _params(args, PhysicsParams())
    ws = Workspace(11, 11)
    target = square_pattern(3, ws)
    counts = []
    for i in range(args.trials or 200):
        rng = rng_stream(args.seed, i)
        n, _ = reconstruct_repeatedly(load_initial(ws, params, rng), target, params, rng)
        counts.append(n)
    hist = np.bincount(counts)
    _write_atomic(out / "reconstructions.csv", _csv(HISTOGRAM_COLUMNS, [[k, int(v)] for k, v in enumerate(hist)]))
    summary = {"version": __version__, "recipe": args.recipe, "runs": len(counts),
               "mean_reconstructions": float(np.mean(counts)), "max_reconstructions": int(max(counts)),
               "params": params.to_dict()}
    _write_atomic(out / "summary.json", json.dumps(summary, indent=2))
    return {"mean_reconstructions": summary["mean_reconstructions"]}


def _stage_rate(successes: int, n: int) -> list:
    lo, hi = wilson_interval(successes, n)
    return [successes / n, lo, hi]


def _summary_outputs(out: Path, args, metrics: dict, params: PhysicsParams) -> None:
    _write_atomic(out / "summary.csv", _csv(SUMMARY_COLUMNS, [[k, v] for k, v in metrics.items()]))
    doc = {"version": __version__, "recipe": args.recipe, "seed": args.seed, "params": params.to_dict(), **metrics}
    _write_atomic(out / "summary.json", json.dumps(doc, indent=2))


def recipe_fig3b(args, out: Path) -> dict:
    params = _params(args, PhysicsParams())
    ws = Workspace(19, 19)
    first = checkerboard(8, ws)
    second = inverse(first)
    cycles = args.max_cycles or 15
    n = args.trials or 200
    built = morphed = 0
    for i in range(n):
        rng = rng_stream(args.seed, i)
        t1 = run_assembly(load_initial(ws, params, rng), first, params, cycles, rng, stop_on_success=True)
        if t1.success_cycle is None:
            continue
        built += 1
        t2 = run_assembly(t1.final, second, params, cycles, rng, stop_on_success=True)
        morphed += t2.success_cycle is not None
    metrics = {"trials": n, "first_pattern_rate": built / n,
               "morph_rate_given_first": morphed / built if built else 0.0,
               "morph_rate_ci": _stage_rate(morphed, built)[1:] if built else [0.0, 1.0]}
    _summary_outputs(out, args, metrics, params)
    _write_atomic(out / "first.txt", Occupancy(ws, first.sites).to_text())
    _write_atomic(out / "second.txt", Occupancy(ws, second.sites).to_text())
    return {"first_pattern_rate": metrics["first_pattern_rate"], "morph_rate_given_first": metrics["morph_rate_given_first"]}


def exchange_setup(ws: Workspace):
    """Two 2x2 clusters three columns apart; the right column of A swaps with the left column of B."""
    r0 = ws.rows // 2 - 1
    c0 = ws.cols // 2 - 3
    a = square_pattern(2, ws, (r0, c0), name="cluster_a")
    b = square_pattern(2, ws, (r0, c0 + 4), name="cluster_b")
    pairs = [(Site(r0, c0 + 1), Site(r0, c0 + 4)), (Site(r0 + 1, c0 + 1), Site(r0 + 1, c0 + 4))]
    return a, b, pairs


def recipe_fig3c(args, out: Path) -> dict:
    params = _params(args, PhysicsParams())
    ws = Workspace(19, 19)
    a, b, pairs = exchange_setup(ws)
    union = TargetPattern("clusters", a.sites | b.sites, ws)
    n = args.trials or 200
    built = exchanged = 0
    for i in range(n):
        rng = rng_stream(args.seed, i)
        trace = run_assembly(load_initial(ws, params, rng), union, params, args.max_cycles or 15, rng,
                             stop_on_success=True)
        if trace.success_cycle is None:
            continue
        built += 1
        plan = plan_exchange(trace.final, a, b, pairs)
        after, _ = execute_cycle(trace.final, plan, params, rng, union)
        exchanged += after.defects(union) == 0
    metrics = {"trials": n, "clusters_built_rate": built / n,
               "exchange_intact_rate": exchanged / built if built else 0.0}
    _summary_outputs(out, args, metrics, params)
    return metrics


def recipe_forecast(args, out: Path) -> dict:
    params = _params(args, FORECAST_PARAMS)
    cfg = forecast_config(trials=args.trials or 200, seed=args.seed, max_cycles=args.max_cycles or 15, params=params)
    stats = run_experiment(cfg, args.workers)
    _write_atomic(out / "forecast.csv", stats_to_csv([stats]))
    _write_atomic(out / "summary.json", stats_to_json([stats], {"recipe": args.recipe, **cfg.to_dict()}))
    return {"final_success": stats.final_success}


def recipe_custom(args, out: Path) -> dict:
    if not args.config:
        raise UsageError("recipe 'custom' requires --config")
    data = json.loads(_read(args.config))
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    cfg = ExperimentConfig.from_dict(data)
    overrides = {}
    if args.trials:
        overrides["trials"] = args.trials
    if args.max_cycles:
        overrides["max_cycles"] = args.max_cycles
    if args.seed_given:
        overrides["seed"] = args.seed
    if args.params:
        overrides["params"] = _params(args, cfg.params)
    cfg = cfg.replace(**overrides)
    stats = run_experiment(cfg, args.workers)
    _write_atomic(out / "success_curve.csv", stats_to_csv([stats]))
    _write_atomic(out / "summary.json", stats_to_json([stats], {"recipe": args.recipe, **cfg.to_dict()}))
    return {"final_success": stats.final_success}


_RECIPE_FUNCS = {
    "fig2b_success_curves": recipe_fig2b, "fig2c_filling": recipe_fig2c, "fig2a_trace": recipe_fig2a,
    "fig3a_reconstruct": recipe_fig3a, "fig3b_morph": recipe_fig3b, "fig3c_exchange": recipe_fig3c,
    "forecast_50x50": recipe_forecast, "custom": recipe_custom,
}


# ------------------------------------------------------------------ commands

def cmd_run(args) -> int:
    if args.recipe not in RECIPES:
        raise UsageError(f"unknown recipe {args.recipe!r}; choose from {', '.join(RECIPES)}")
    result = _RECIPE_FUNCS[args.recipe](args, Path(args.out))
    print(json.dumps(result))
    return 0


def cmd_plan(args) -> int:
    occ = Occupancy.from_text(_read(args.occupancy))
    pattern = parse_pattern(_read(args.pattern), name=Path(args.pattern).stem)
    plan = plan_cycle(occ, pattern)
    if args.out:
        _write_atomic(Path(args.out), plan.to_jsonl())
    else:
        sys.stdout.write(plan.to_jsonl())
    return 0


def cmd_replay(args) -> int:
    occ = Occupancy.from_text(_read(args.occupancy))
    plan = MovePlan.from_jsonl(_read(args.plan))
    final = replay(occ, plan)
    if args.out:
        _write_atomic(Path(args.out), final.to_text())
    else:
        sys.stdout.write(final.to_text())
    return 0


_KNOWN_CSV = {AggregateStats.CSV_COLUMNS, AssemblyTrace.CSV_COLUMNS, FILLING_COLUMNS, SUMMARY_COLUMNS,
              HISTOGRAM_COLUMNS}


def validate_file(path: Path) -> str:
    """Check one input or output file; returns a short description of its kind."""
    text = _read(path)
    suffix = path.suffix.lower()
    if suffix == ".jsonl":
        MovePlan.from_jsonl(text)
        return "plan"
    if suffix == ".csv":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# atom-assembler v"):
            raise ConfigError("missing '# atom-assembler v<version>' header line")
        rows = list(csv.reader(lines[1:]))
        if not rows or tuple(rows[0]) not in _KNOWN_CSV:
            raise ConfigError(f"unrecognized CSV columns {rows[0] if rows else []}")
        if any(len(r) != len(rows[0]) for r in rows[1:]):
            raise ConfigError("ragged CSV rows")
        return "csv"
    if suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("expected a JSON object")
        if "version" in data and ("results" in data or "recipe" in data):
            return "summary"
        if "records" in data and "success_cycle" in data:
            return "trace"
        if set(data) <= set(PhysicsParams().to_dict()):
            PhysicsParams.from_dict(data)
            return "params"
        ExperimentConfig.from_dict(data)
        return "config"
    parse_grid(text, allow_empty=True)
    return "grid"


def cmd_validate(args) -> int:
    for name in args.files:
        kind = validate_file(Path(name))
        print(f"{name}: ok ({kind})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="atom-assembler", description="Plan and simulate defect-free atom array assembly.")
    parser.add_argument("--version", action="version", version=f"atom-assembler {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run an experiment recipe")
    run.add_argument("recipe", help=f"one of: {', '.join(RECIPES)}")
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--trials", type=int, default=None)
    run.add_argument("--max-cycles", type=int, default=None)
    run.add_argument("--params", help="JSON file overriding physics parameters")
    run.add_argument("--config", help="experiment config JSON (custom recipe)")
    run.add_argument("--workers", type=int, default=1)
    run.set_defaults(func=cmd_run)

    plan = sub.add_parser("plan", help="plan one rearrangement cycle")
    plan.add_argument("--occupancy", required=True)
    plan.add_argument("--pattern", required=True)
    plan.add_argument("--out")
    plan.set_defaults(func=cmd_plan)

    rep = sub.add_parser("replay", help="replay a plan losslessly")
    rep.add_argument("--occupancy", required=True)
    rep.add_argument("--plan", required=True)
    rep.add_argument("--out")
    rep.set_defaults(func=cmd_replay)

    val = sub.add_parser("validate", help="check pattern, occupancy, plan, config, or output files")
    val.add_argument("files", nargs="+")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "run":
            args.seed_given = args.seed is not None
            if args.seed is None:
                args.seed = DEFAULT_SEED
            for flag in ("trials", "max_cycles", "workers"):
                v = getattr(args, flag)
                if v is not None and v < 1:
                    raise UsageError(f"--{flag.replace('_', '-')} must be positive")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ConfigError, PatternParseError, IllegalMoveError, PlanningError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
