"""Monte Carlo trials and aggregate statistics.

Trial ``i`` always draws from ``rng_stream(seed, i)``, and aggregation only
sums per-trial values in trial order, so results do not depend on how trials
are scheduled across worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import NormalDist

import numpy as np

from . import __version__
from .engine import run_assembly
from .lattice import DomainError, Workspace
from .patterns import (PatternParseError, TargetPattern, forecast_target, gallery_pattern,
                       parse_pattern, square_pattern)
from .physics import ConfigError, PhysicsParams, load_initial, rng_stream

DEFAULT_SEED = 20190101


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials <= 0:
        return (0.0, 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # clamp guards float round-off at phat = 0 or 1
    return (max(0.0, min(centre - half, phat)), min(1.0, max(centre + half, phat)))


def resolve_target(name, ws: Workspace) -> TargetPattern:
    """Build a target from a config string.

    Accepted: ``square:<n>``, ``surface_code_quad``, ``nine_by_nine``,
    ``ring96``, ``forecast1000[:<shape>]``, ``file:<path>``, or an existing
    :class:`TargetPattern`.
    """
    if isinstance(name, TargetPattern):
        if not name.workspace.same_grid(ws):
            raise ConfigError("target pattern workspace does not match the configured workspace")
        return name
    if not isinstance(name, str):
        raise ConfigError(f"target must be a string, got {name!r}")
    kind, _, arg = name.partition(":")
    try:
        if kind == "square":
            return square_pattern(int(arg), ws)
        if kind == "forecast1000":
            return forecast_target(ws, arg or "trimmed_square")
        if kind == "file":
            pattern = parse_pattern(Path(arg).read_text(encoding="utf-8"), name=Path(arg).stem)
            return resolve_target(pattern, ws)
        return gallery_pattern(kind, ws)
    except (DomainError, PatternParseError, ValueError) as exc:
        raise ConfigError(f"bad target {name!r}: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    rows: int = 19
    cols: int = 19
    target: object = "square:10"
    params: PhysicsParams = field(default_factory=PhysicsParams)
    max_cycles: int = 15
    trials: int = 1000
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.max_cycles < 1:
            raise ConfigError("max_cycles must be at least 1")
        try:
            Workspace(self.rows, self.cols)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def workspace(self) -> Workspace:
        return Workspace(self.rows, self.cols)

    def resolve(self) -> TargetPattern:
        return resolve_target(self.target, self.workspace)

    def replace(self, **changes) -> "ExperimentConfig":
        d = {f: getattr(self, f) for f in ("rows", "cols", "target", "params", "max_cycles", "trials", "seed")}
        d.update(changes)
        return ExperimentConfig(**d)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        allowed = {"rows", "cols", "target", "params", "max_cycles", "trials", "seed"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        d = dict(data)
        d["params"] = PhysicsParams.from_dict(d.get("params") or {})
        for key in ("rows", "cols", "max_cycles", "trials", "seed"):
            if key in d and (isinstance(d[key], bool) or not isinstance(d[key], int)):
                raise ConfigError(f"{key} must be an integer")
        cfg = cls(**d)
        cfg.resolve()
        return cfg

    def to_dict(self) -> dict:
        target = self.target if isinstance(self.target, str) else self.target.name
        return {"rows": self.rows, "cols": self.cols, "target": target, "params": self.params.to_dict(),
                "max_cycles": self.max_cycles, "trials": self.trials, "seed": self.seed}


@dataclass(frozen=True)
class TrialResult:
    success_cycle: int | None
    max_filling_fraction: float
    moves: int
    time_to_success: float | None
    initial_atoms: int


def run_trial(cfg: ExperimentConfig, target: TargetPattern, index: int) -> TrialResult:
    rng = rng_stream(cfg.seed, index)
    occ0 = load_initial(cfg.workspace, cfg.params, rng)
    trace = run_assembly(occ0, target, cfg.params, cfg.max_cycles, rng)
    return TrialResult(trace.success_cycle, trace.max_filling_fraction,
                       sum(r.moves for r in trace.records), trace.time_to_success(), occ0.count)


def _run_chunk(args) -> list:
    cfg, target, indices = args
    return [run_trial(cfg, target, i) for i in indices]


@dataclass
class AggregateStats:
    target: str
    target_size: int
    trials: int
    max_cycles: int
    successes: list            # cumulative counts, index k = 0..max_cycles
    cumulative_success: list
    ci_low: list
    ci_high: list
    mean_max_filling: float
    std_max_filling: float
    mean_moves_per_cycle: float
    mean_time_to_success: float | None
    mean_initial_atoms: float

    @property
    def final_success(self) -> float:
        return self.cumulative_success[-1]

    CSV_COLUMNS = ("target", "k", "successes", "trials", "rate", "ci_low", "ci_high")

    def csv_rows(self) -> list:
        return [[self.target, k, self.successes[k], self.trials, f"{self.cumulative_success[k]:.6f}",
                 f"{self.ci_low[k]:.6f}", f"{self.ci_high[k]:.6f}"] for k in range(self.max_cycles + 1)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["final_success"] = self.final_success
        return d


def aggregate(results, target: TargetPattern, max_cycles: int) -> AggregateStats:
    n = len(results)
    first = [r.success_cycle for r in results]
    succ = [sum(1 for f in first if f is not None and f <= k) for k in range(max_cycles + 1)]
    cis = [wilson_interval(s, n) for s in succ]
    mff = np.array([r.max_filling_fraction for r in results])
    times = [r.time_to_success for r in results if r.time_to_success is not None]
    return AggregateStats(
        target=target.name, target_size=len(target), trials=n, max_cycles=max_cycles,
        successes=succ, cumulative_success=[s / n for s in succ],
        ci_low=[c[0] for c in cis], ci_high=[c[1] for c in cis],
        mean_max_filling=float(mff.mean()),
        std_max_filling=float(mff.std(ddof=1)) if n > 1 else 0.0,
        mean_moves_per_cycle=sum(r.moves for r in results) / (n * max_cycles),
        mean_time_to_success=sum(times) / len(times) if times else None,
        mean_initial_atoms=sum(r.initial_atoms for r in results) / n,
    )


def run_trials(cfg: ExperimentConfig, workers: int = 1) -> list:
    target = cfg.resolve()
    indices = list(range(cfg.trials))
    if workers <= 1:
        return [run_trial(cfg, target, i) for i in indices]
    size = max(1, math.ceil(len(indices) / (workers * 4)))
    chunks = [(cfg, target, indices[i:i + size]) for i in range(0, len(indices), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [r for chunk in pool.map(_run_chunk, chunks) for r in chunk]


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> AggregateStats:
    target = cfg.resolve()
    return aggregate(run_trials(cfg, workers), target, cfg.max_cycles)


FORECAST_PARAMS = PhysicsParams(p_load=0.80, p_transport=0.95, tau=60.0)


def forecast_config(trials: int = 200, seed: int = DEFAULT_SEED, shape: str = "trimmed_square",
                    max_cycles: int = 15, params: PhysicsParams = FORECAST_PARAMS) -> ExperimentConfig:
    return ExperimentConfig(rows=50, cols=50, target=f"forecast1000:{shape}", params=params,
                            max_cycles=max_cycles, trials=trials, seed=seed)


def forecast_experiment(trials: int = 200, seed: int = DEFAULT_SEED, workers: int = 1, **kwargs) -> AggregateStats:
    """1000-site target on a 50x50 grid at improved loading, transport, and lifetime."""
    return run_experiment(forecast_config(trials, seed, **kwargs), workers)


def stats_to_csv(stats_list) -> str:
    buf = io.StringIO()
    buf.write(f"# atom-assembler v{__version__}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AggregateStats.CSV_COLUMNS)
    for stats in stats_list:
        w.writerows(stats.csv_rows())
    return buf.getvalue()


def stats_to_json(stats_list, config: dict | None = None) -> str:
    doc = {"version": __version__, "config": config,
           "results": [s.to_dict() for s in stats_list]}
    return json.dumps(doc, indent=2)
