"""Shortest-move rearrangement planning.

For one rearrangement cycle, :func:`plan_cycle` pairs empty target sites
(defects) with atoms outside the target (reservoir) and emits the ordered
tweezer moves.  Pairing is greedy: the globally closest remaining
(defect, atom) pair is taken first, ties broken row-major on the defect and
then on the atom.  Among the grid paths for a pair the one crossing the
fewest occupied sites wins.  Occupied sites on that path are not jumped over:
the atom nearest the defect moves into it, each other obstacle moves one slot
forward, and the reservoir atom takes the first obstacle's place.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .lattice import DomainError, GridPath, Site, Workspace, manhattan, paths_between
from .patterns import TargetPattern, format_grid, parse_grid


class IllegalMoveError(RuntimeError):
    """A move whose source is empty or whose destination is occupied."""


class Occupancy:
    """Which sites of a workspace currently hold an atom.

    Backed by a read-only boolean array of the workspace shape.
    """

    __slots__ = ("ws", "grid")

    def __init__(self, ws: Workspace, filled=None, grid: np.ndarray | None = None):
        self.ws = ws
        if grid is None:
            grid = np.zeros(ws.shape, dtype=bool)
            for s in filled or ():
                ws.check(s)
                grid[s[0], s[1]] = True
        else:
            grid = np.array(grid, dtype=bool, copy=True)
            if grid.shape != ws.shape:
                raise DomainError(f"grid shape {grid.shape} does not match workspace {ws.shape}")
        grid.flags.writeable = False
        self.grid = grid

    @property
    def filled(self) -> frozenset:
        return frozenset(Site(int(r), int(c)) for r, c in zip(*np.nonzero(self.grid)))

    @property
    def count(self) -> int:
        return int(self.grid.sum())

    def __contains__(self, site) -> bool:
        return bool(self.grid[site[0], site[1]])

    def __eq__(self, other) -> bool:
        return isinstance(other, Occupancy) and self.ws.same_grid(other.ws) and np.array_equal(self.grid, other.grid)

    def __hash__(self):
        return hash((self.ws.shape, self.grid.tobytes()))

    def __repr__(self) -> str:
        return f"Occupancy({self.ws.rows}x{self.ws.cols}, {self.count} atoms)"

    def defects(self, target: TargetPattern) -> int:
        return int((target.mask & ~self.grid).sum())

    def filling_fraction(self, target: TargetPattern) -> float:
        return float((target.mask & self.grid).sum()) / len(target)

    def to_text(self) -> str:
        return format_grid(self.ws, self.filled)

    @classmethod
    def from_text(cls, text: str) -> "Occupancy":
        ws, sites = parse_grid(text, allow_empty=True)
        return cls(ws, sites)


@dataclass(frozen=True)
class Move:
    src: Site
    dst: Site
    path: GridPath

    def __post_init__(self) -> None:
        if self.src == self.dst:
            raise DomainError(f"move from {tuple(self.src)} to itself")
        if self.path.src != self.src or self.path.dst != self.dst:
            raise DomainError("path endpoints do not match move")

    @property
    def distance(self) -> int:
        return manhattan(self.src, self.dst)


@dataclass(frozen=True)
class MovePlan:
    moves: tuple = ()

    def __len__(self) -> int:
        return len(self.moves)

    def __iter__(self):
        return iter(self.moves)

    def to_jsonl(self) -> str:
        return "".join(json.dumps(move_to_dict(m)) + "\n" for m in self.moves)

    @classmethod
    def from_jsonl(cls, text: str) -> "MovePlan":
        moves = []
        for n, line in enumerate(text.splitlines(), 1):
            if not line.strip():
                continue
            try:
                moves.append(move_from_dict(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"plan line {n}: {exc}") from exc
        return cls(tuple(moves))


def move_to_dict(m: Move) -> dict:
    corner = m.path.corner
    return {"src": list(m.src), "dst": list(m.dst), "corner": None if corner is None else list(corner)}


def move_from_dict(d: dict) -> Move:
    src, dst = Site(*map(int, d["src"])), Site(*map(int, d["dst"]))
    corner = d.get("corner")
    if corner is None:
        if src.r != dst.r and src.c != dst.c:
            raise ValueError("non-colinear move needs a corner")
        path = GridPath((src, dst))
    else:
        corner = Site(*map(int, corner))
        if corner not in (Site(src.r, dst.c), Site(dst.r, src.c)) or src.r == dst.r or src.c == dst.c:
            raise ValueError(f"corner {tuple(corner)} does not form an L-path")
        path = GridPath((src, corner, dst))
    return Move(src, dst, path)


def plan_total_distance(plan: Iterable[Move]) -> int:
    return sum(m.distance for m in plan)


# ------------------------------------------------------------------ planning

def _obstacles(path: GridPath, state: np.ndarray) -> list[Site]:
    return [s for s in path.interior if state[s.r, s.c]]


def _clearest_path(a: Site, b: Site, state: np.ndarray) -> tuple[GridPath, list[Site]]:
    best = None
    for path in paths_between(a, b):
        obs = _obstacles(path, state)
        if best is None or len(obs) < len(best[1]):
            best = (path, obs)
    return best


def _greedy_pairs(defects: np.ndarray, reservoir: np.ndarray) -> list[tuple[int, int]]:
    """Closest-first pairing of defects to reservoir atoms.

    Both inputs are row-major sorted ``(n, 2)`` index arrays.  A stable sort
    of the flattened distance matrix visits ties in (defect, atom) row-major
    order, so the first unused pair in that order is always the greedy pick.
    """
    n_d, n_r = len(defects), len(reservoir)
    dist = (np.abs(defects[:, None, 0] - reservoir[None, :, 0])
            + np.abs(defects[:, None, 1] - reservoir[None, :, 1]))
    order = np.argsort(dist.ravel(), kind="stable")
    d_used = np.zeros(n_d, dtype=bool)
    r_used = np.zeros(n_r, dtype=bool)
    pairs = []
    limit = min(n_d, n_r)
    for flat in order.tolist():
        d, a = divmod(flat, n_r)
        if d_used[d] or r_used[a]:
            continue
        d_used[d] = r_used[a] = True
        pairs.append((d, a))
        if len(pairs) == limit:
            break
    return pairs


def plan_cycle(occ: Occupancy, target: TargetPattern) -> MovePlan:
    """Moves that fill the target's defects from reservoir atoms.

    Under lossless execution every defect is filled if the reservoir is large
    enough; otherwise the defects closest to the reservoir are filled first.
    The result depends only on the inputs.
    """
    if not occ.ws.same_grid(target.workspace):
        raise DomainError("occupancy and target are defined on different workspaces")
    state = np.array(occ.grid, dtype=bool)
    defects = np.argwhere(target.mask & ~state)
    reservoir = np.argwhere(state & ~target.mask)
    if len(defects) == 0 or len(reservoir) == 0:
        return MovePlan()

    moves: list[Move] = []
    for d_idx, a_idx in _greedy_pairs(defects, reservoir):
        d = Site(int(defects[d_idx, 0]), int(defects[d_idx, 1]))
        a = Site(int(reservoir[a_idx, 0]), int(reservoir[a_idx, 1]))
        _, obstacles = _clearest_path(a, d, state)
        chain = [a, *obstacles, d]
        # nearest-to-target first so every destination is already vacated
        for src, dst in reversed(list(zip(chain, chain[1:]))):
            path, _ = _clearest_path(src, dst, state)
            moves.append(Move(src, dst, path))
            state[src.r, src.c] = False
            state[dst.r, dst.c] = True
    return MovePlan(tuple(moves))


def replay(occ: Occupancy, plan: Iterable[Move]) -> Occupancy:
    """Apply a plan without losses, checking that every move is legal."""
    state = np.array(occ.grid, dtype=bool)
    for i, m in enumerate(plan):
        if not (occ.ws.contains(m.src) and occ.ws.contains(m.dst)):
            raise DomainError(f"move {i} leaves the workspace")
        if not state[m.src]:
            raise IllegalMoveError(f"move {i}: source {tuple(m.src)} is empty")
        if state[m.dst]:
            raise IllegalMoveError(f"move {i}: destination {tuple(m.dst)} is occupied")
        state[m.src] = False
        state[m.dst] = True
    return Occupancy(occ.ws, grid=state)


# ------------------------------------------------------------------- oracles

@dataclass(frozen=True)
class Matching:
    cost: int
    coverable: int
    pairs: tuple  # ((atom site, target site), ...)


def optimal_matching(occ: Occupancy, target: TargetPattern) -> Matching:
    """Minimum total Manhattan distance assignment of atoms to target sites.

    Every filled site is a candidate (an atom already on a target site may
    match itself at zero cost).  With fewer atoms than target sites all atoms
    are matched and ``coverable`` reports how many target sites that covers.
    """
    if not occ.ws.same_grid(target.workspace):
        raise DomainError("occupancy and target are defined on different workspaces")
    atoms = sorted(occ.filled)
    sites = target.sorted_sites()
    if not atoms:
        return Matching(0, 0, ())
    a = np.array(atoms)
    t = np.array(sites)
    cost = np.abs(a[:, None, 0] - t[None, :, 0]) + np.abs(a[:, None, 1] - t[None, :, 1])
    rows, cols = linear_sum_assignment(cost)
    pairs = tuple((atoms[i], sites[j]) for i, j in zip(rows, cols))
    return Matching(int(cost[rows, cols].sum()), len(pairs), pairs)


def optimal_matching_cost(occ: Occupancy, target: TargetPattern) -> int:
    return optimal_matching(occ, target).cost


def brute_force_matching_cost(atoms: Sequence, sites: Sequence) -> int:
    """Exhaustive minimum over all injective assignments of the smaller side."""
    atoms, sites = list(atoms), list(sites)
    if not atoms or not sites:
        return 0
    if len(atoms) >= len(sites):
        return min(sum(manhattan(a, s) for a, s in zip(choice, sites)) for choice in permutations(atoms, len(sites)))
    return min(sum(manhattan(a, s) for a, s in zip(atoms, choice)) for choice in permutations(sites, len(atoms)))
