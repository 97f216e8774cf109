"""Multi-cycle protocols built from plan/execute/image rounds."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .lattice import DomainError, Site, manhattan, paths_between
from .patterns import TargetPattern
from .physics import CycleReport, PhysicsParams, execute_cycle
from .planner import Move, MovePlan, Occupancy, plan_cycle


class PlanningError(RuntimeError):
    pass


def occupancy_hash(occ: Occupancy) -> str:
    return hashlib.sha1(np.packbits(occ.grid).tobytes()).hexdigest()[:16]


@dataclass(frozen=True)
class CycleRecord:
    cycle: int
    snapshot: str
    filling_fraction: float
    defects: int
    moves: int
    report: CycleReport | None  # None for the initial image


@dataclass
class AssemblyTrace:
    target: str
    records: list = field(default_factory=list)
    success_cycle: int | None = None
    final: Occupancy | None = None

    @property
    def max_filling_fraction(self) -> float:
        return max(r.filling_fraction for r in self.records)

    @property
    def cycles(self) -> int:
        return len(self.records) - 1

    def succeeded_by(self, k: int) -> bool:
        return self.success_cycle is not None and self.success_cycle <= k

    @property
    def total_time(self) -> float:
        return sum(r.report.t_cycle for r in self.records if r.report is not None)

    def time_to_success(self) -> float | None:
        if self.success_cycle is None:
            return None
        return sum(r.report.t_cycle for r in self.records[1:self.success_cycle + 1])

    def _add(self, occ: Occupancy, target: TargetPattern, moves: int, report) -> None:
        rec = CycleRecord(len(self.records), occupancy_hash(occ), occ.filling_fraction(target),
                          occ.defects(target), moves, report)
        self.records.append(rec)
        if self.success_cycle is None and rec.defects == 0:
            self.success_cycle = rec.cycle
        self.final = occ

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "success_cycle": self.success_cycle,
            "max_filling_fraction": self.max_filling_fraction,
            "records": [
                {"cycle": r.cycle, "snapshot": r.snapshot, "filling_fraction": r.filling_fraction,
                 "defects": r.defects, "moves": r.moves,
                 "report": None if r.report is None else r.report.to_dict()}
                for r in self.records
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    CSV_COLUMNS = ("cycle", "filling_fraction", "defects", "moves", "executed", "skipped",
                   "lost_in_transport", "background_lost", "t_cycle")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.CSV_COLUMNS)
        for r in self.records:
            rep = r.report
            w.writerow([r.cycle, f"{r.filling_fraction:.6f}", r.defects, r.moves,
                        *(("", "", "", "", "") if rep is None else
                          (rep.executed, rep.skipped, rep.lost_in_transport, rep.background_lost,
                           f"{rep.t_cycle:.6f}"))])
        return buf.getvalue()


def _check_shared(occ: Occupancy, *patterns: TargetPattern) -> None:
    for p in patterns:
        if not occ.ws.same_grid(p.workspace):
            raise DomainError(f"pattern {p.name!r} is defined on a different workspace")


def run_assembly(occ0: Occupancy, target: TargetPattern, p: PhysicsParams, max_cycles: int,
                 rng: np.random.Generator, stop_on_success: bool = False) -> AssemblyTrace:
    """Image, plan, and execute for ``max_cycles`` rounds.

    The initial image is cycle 0.  By default the loop keeps going after the
    target is first defect-free so cumulative statistics at every cycle index
    are defined; ``stop_on_success`` ends it at that point instead.
    """
    if max_cycles < 1:
        raise DomainError("max_cycles must be at least 1")
    _check_shared(occ0, target)
    trace = AssemblyTrace(target.name)
    trace._add(occ0, target, 0, None)
    occ = occ0
    for _ in range(max_cycles):
        if stop_on_success and trace.success_cycle is not None:
            break
        plan = plan_cycle(occ, target)
        occ, report = execute_cycle(occ, plan, p, rng, target)
        trace._add(occ, target, len(plan), report)
    return trace


def perpetuate(occ0: Occupancy, target: TargetPattern, p: PhysicsParams, cycles: int,
               rng: np.random.Generator) -> tuple[int, AssemblyTrace]:
    """Run ``cycles`` rounds and count the post-cycle images with no defect."""
    trace = run_assembly(occ0, target, p, cycles, rng)
    return sum(1 for r in trace.records[1:] if r.defects == 0), trace


def reconstruct_repeatedly(occ0: Occupancy, target: TargetPattern, p: PhysicsParams,
                           rng: np.random.Generator, cycles_per_round: int = 5,
                           max_rounds: int = 10_000) -> tuple[int, list]:
    """Assemble, empty the target, and assemble again until a round fails.

    Returns the number of rounds that reached a defect-free target and the
    trace of every round, the failed one included.
    """
    _check_shared(occ0, target)
    traces = []
    occ = occ0
    successes = 0
    for _ in range(max_rounds):
        trace = run_assembly(occ, target, p, cycles_per_round, rng, stop_on_success=True)
        traces.append(trace)
        if trace.success_cycle is None:
            break
        successes += 1
        occ = Occupancy(occ.ws, grid=trace.final.grid & ~target.mask)
    return successes, traces


def morph(occ: Occupancy, source: TargetPattern, dest: TargetPattern, p: PhysicsParams,
          rng: np.random.Generator, max_cycles: int = 15) -> AssemblyTrace:
    """Retarget an arrangement: every atom outside ``dest`` becomes reservoir."""
    _check_shared(occ, source, dest)
    return run_assembly(occ, dest, p, max_cycles, rng)


def _clear_path(a: Site, b: Site, state: np.ndarray):
    best = None
    for path in paths_between(a, b):
        n = sum(1 for s in path.interior if state[s])
        if best is None or n < best[0]:
            best = (n, path)
    return best[1]


def _buffer_site(a: Site, b: Site, state: np.ndarray, reserved: set) -> Site:
    free = [Site(int(r), int(c)) for r, c in np.argwhere(~state)]
    free = [s for s in free if s not in reserved]
    if not free:
        raise PlanningError(f"no free buffer site for swapping {tuple(a)} and {tuple(b)}")
    rlo, rhi = min(a.r, b.r), max(a.r, b.r)
    clo, chi = min(a.c, b.c), max(a.c, b.c)

    def gap(s: Site) -> int:
        # distance from the bounding box spanned by the two swap sites
        return max(rlo - s.r, 0, s.r - rhi) + max(clo - s.c, 0, s.c - chi)

    near = [s for s in free if gap(s) <= 1]
    if near:
        return near[0]  # free is row-major already
    return min(free, key=lambda s: (manhattan(s, a) + manhattan(s, b), s))


def plan_exchange(occ: Occupancy, cluster_a: TargetPattern, cluster_b: TargetPattern, pairs) -> MovePlan:
    """Swap the atoms of each ``(site in a, site in b)`` pair through a free buffer.

    Each swap is ``a -> buffer, b -> a, buffer -> b``.  The buffer is the
    first free site (row-major) within one step of the box spanned by the two
    sites, else the free site closest to both.  Sites of either cluster are
    never used as buffers.
    """
    _check_shared(occ, cluster_a, cluster_b)
    if cluster_a.sites & cluster_b.sites:
        raise DomainError("clusters overlap")
    state = np.array(occ.grid, dtype=bool)
    reserved = set(cluster_a.sites | cluster_b.sites)
    seen = set()
    moves = []
    for sa, sb in pairs:
        sa, sb = occ.ws.check(sa), occ.ws.check(sb)
        if sa not in cluster_a.sites or sb not in cluster_b.sites:
            raise DomainError(f"pair {tuple(sa)}, {tuple(sb)} does not link cluster a to cluster b")
        if sa in seen or sb in seen:
            raise DomainError("a site appears in more than one pair")
        seen.update((sa, sb))
        if not (occ.grid[sa] and occ.grid[sb]):
            raise DomainError(f"pair {tuple(sa)}, {tuple(sb)} is not fully occupied")
        buf = _buffer_site(sa, sb, state, reserved)
        for src, dst in ((sa, buf), (sb, sa), (buf, sb)):
            moves.append(Move(src, dst, _clear_path(src, dst, state)))
            state[src] = False
            state[dst] = True
    return MovePlan(tuple(moves))
