"""Stochastic model of loading, tweezer transport, and background loss.

All randomness is drawn from a :class:`numpy.random.Generator` obtained via
:func:`rng_stream`, so a ``(seed, stream)`` pair fully determines an outcome.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .lattice import DomainError, Workspace
from .patterns import TargetPattern
from .planner import MovePlan, Occupancy


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PhysicsParams:
    p_load: float = 191 / 361
    p_transport: float = 0.75
    tau: float = 10.0           # s, 1/e lifetime
    t_move: float = 1e-3        # s per transport
    t_image: float = 0.075      # s per fluorescence image
    t_overhead: float = 0.1     # s per cycle; calibration constant, not measured

    def __post_init__(self) -> None:
        for name in ("p_load", "p_transport"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if not self.tau > 0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        for name in ("t_move", "t_image", "t_overhead"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be non-negative")

    def replace(self, **changes) -> "PhysicsParams":
        return PhysicsParams(**{**asdict(self), **changes})

    @classmethod
    def from_dict(cls, data: dict) -> "PhysicsParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown physics parameter(s): {', '.join(sorted(unknown))}")
        values = {}
        for k, v in data.items():
            # JSON has no infinity literal; null or "inf" means an infinite lifetime
            if v is None or (isinstance(v, str) and v.lower() in ("inf", "infinity")):
                v = math.inf
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{k} must be a number, got {v!r}")
            values[k] = float(v)
        try:
            return cls(**values)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "PhysicsParams":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("physics parameters must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {k: (None if math.isinf(v) else v) for k, v in asdict(self).items()}


LOSSLESS = PhysicsParams(p_transport=1.0, tau=math.inf)


def rng_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent generator for trial ``stream`` under a 64-bit base ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) % 2**64, spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


def load_initial(ws: Workspace, p: PhysicsParams, rng: np.random.Generator) -> Occupancy:
    return Occupancy(ws, grid=rng.random(ws.shape) < p.p_load)


def survival_probability(duration: float, p: PhysicsParams) -> float:
    if duration < 0:
        raise DomainError("duration must be non-negative")
    return math.exp(-duration / p.tau)


@dataclass(frozen=True)
class CycleReport:
    executed: int
    skipped: int
    lost_in_transport: int
    background_lost: int
    t_cycle: float
    filling_fraction: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def execute_cycle(occ: Occupancy, plan: MovePlan, p: PhysicsParams, rng: np.random.Generator,
                  target: TargetPattern | None = None) -> tuple[Occupancy, CycleReport]:
    """Carry out a plan with lossy transport, then apply background loss.

    A move whose source was emptied by an earlier loss is skipped.  A failed
    transport removes the atom.  Each atom left after the sequence survives
    the whole cycle duration with probability ``exp(-T_cycle / tau)``.
    """
    state = np.array(occ.grid, dtype=bool)
    draws = rng.random(len(plan))
    executed = skipped = lost = 0
    for m, u in zip(plan.moves, draws.tolist()):
        if not state[m.src]:
            skipped += 1
            continue
        executed += 1
        state[m.src] = False
        if u < p.p_transport:
            state[m.dst] = True
        else:
            lost += 1
    t_cycle = executed * p.t_move + p.t_image + p.t_overhead
    keep = rng.random(state.shape) < survival_probability(t_cycle, p)
    before = int(state.sum())
    state &= keep
    bg_lost = before - int(state.sum())
    after = Occupancy(occ.ws, grid=state)
    ff = after.filling_fraction(target) if target is not None else None
    return after, CycleReport(executed, skipped, lost, bg_lost, t_cycle, ff)
