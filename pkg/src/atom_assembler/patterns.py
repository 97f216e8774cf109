"""Target patterns and the ASCII grid file format.

A grid file is UTF-8 text with one line per row, ``#`` for a marked site and
``.`` for an unmarked one.  The same format stores target patterns and atom
occupancies.

Built-in geometries (all centered on the workspace, ties toward lower index):

* ``square(n)``: contiguous ``n x n`` block.
* ``surface_code_quad``: four 5x5 blocks in a 2x2 arrangement with one empty
  row and column between them (100 sites).
* ``nine_by_nine``: a 9x9 block (81 sites).
* ``ring96``: the border of a 17x17 square with four outward bumps on each
  side.  A bump replaces one edge site pair with a detour one row outward
  (three sites long), adding two sites, so the loop has 64 + 16 * 2 = 96
  sites.  Every site has exactly two ring neighbours and the ring is
  connected, i.e. it is one closed cycle.
* ``inverse(p)``: a same-size pattern disjoint from ``p``, taken first from
  the free sites of ``p``'s bounding box and then outward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import DomainError, Site, Workspace


class PatternParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class TargetPattern:
    name: str
    sites: frozenset
    workspace: Workspace
    _mask: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        sites = frozenset(Site(int(r), int(c)) for r, c in self.sites)
        if not sites:
            raise DomainError(f"pattern {self.name!r} is empty")
        for s in sites:
            self.workspace.check(s)
        object.__setattr__(self, "sites", sites)
        mask = np.zeros(self.workspace.shape, dtype=bool)
        rr, cc = zip(*sites)
        mask[list(rr), list(cc)] = True
        mask.flags.writeable = False
        object.__setattr__(self, "_mask", mask)

    @property
    def mask(self) -> np.ndarray:
        return self._mask

    def __len__(self) -> int:
        return len(self.sites)

    def sorted_sites(self) -> list[Site]:
        return sorted(self.sites)

    def shifted(self, dr: int, dc: int, name: str | None = None) -> "TargetPattern":
        return TargetPattern(name or self.name, frozenset(Site(r + dr, c + dc) for r, c in self.sites), self.workspace)


def _centered_offset(extent: int, total: int) -> int:
    return (total - extent) // 2


def square_pattern(n: int, ws: Workspace, anchor=None, name: str | None = None) -> TargetPattern:
    """``n x n`` block with top-left corner at ``anchor``; centered if anchor is None."""
    if n < 1:
        raise DomainError(f"block size must be positive, got {n}")
    if anchor is None:
        anchor = (_centered_offset(n, ws.rows), _centered_offset(n, ws.cols))
    r0, c0 = anchor
    if r0 < 0 or c0 < 0 or r0 + n > ws.rows or c0 + n > ws.cols:
        raise DomainError(f"{n}x{n} block at {tuple(anchor)} exceeds {ws.rows}x{ws.cols} workspace")
    sites = frozenset(Site(r, c) for r in range(r0, r0 + n) for c in range(c0, c0 + n))
    return TargetPattern(name or f"square{n}", sites, ws)


def _require(ws: Workspace, rows: int, cols: int, what: str) -> None:
    if ws.rows < rows or ws.cols < cols:
        raise DomainError(f"{what} needs at least a {rows}x{cols} workspace, got {ws.rows}x{ws.cols}")


def surface_code_quad(ws: Workspace) -> TargetPattern:
    _require(ws, 11, 11, "surface_code_quad")
    r0, c0 = _centered_offset(11, ws.rows), _centered_offset(11, ws.cols)
    sites = set()
    for br in (0, 6):
        for bc in (0, 6):
            sites.update(Site(r0 + br + i, c0 + bc + j) for i in range(5) for j in range(5))
    return TargetPattern("surface_code_quad", frozenset(sites), ws)


def nine_by_nine(ws: Workspace) -> TargetPattern:
    _require(ws, 9, 9, "nine_by_nine")
    return square_pattern(9, ws, name="nine_by_nine")


def ring96(ws: Workspace) -> TargetPattern:
    _require(ws, 19, 19, "ring96")
    side = 17
    lo, hi = 1, side  # ring border rows/cols inside a 19x19 frame
    border = {Site(r, c) for r in range(lo, hi + 1) for c in range(lo, hi + 1)
              if r in (lo, hi) or c in (lo, hi)}
    sites = set(border)
    for start in (2, 6, 10, 14):
        span = range(start, start + 3)
        middle = start + 1
        # top, bottom, left, right: detour one step outward
        for edge, out, horizontal in ((lo, lo - 1, True), (hi, hi + 1, True),
                                      (lo, lo - 1, False), (hi, hi + 1, False)):
            if horizontal:
                sites.discard(Site(edge, middle))
                sites.update(Site(out, c) for c in span)
            else:
                sites.discard(Site(middle, edge))
                sites.update(Site(r, out) for r in span)
    dr, dc = _centered_offset(19, ws.rows), _centered_offset(19, ws.cols)
    pattern = TargetPattern("ring96", frozenset(Site(r + dr, c + dc) for r, c in sites), ws)
    assert len(pattern) == 96 and is_single_cycle(pattern.sites)
    return pattern


def is_single_cycle(sites) -> bool:
    """True if the sites form one closed loop under 4-neighbour adjacency."""
    sites = set(sites)
    if len(sites) < 4:
        return False

    def nbrs(s):
        return [n for n in ((s[0] + 1, s[1]), (s[0] - 1, s[1]), (s[0], s[1] + 1), (s[0], s[1] - 1)) if n in sites]

    if any(len(nbrs(s)) != 2 for s in sites):
        return False
    start = next(iter(sites))
    seen, stack = {start}, [start]
    while stack:
        for n in nbrs(stack.pop()):
            if n not in seen:
                seen.add(n)
                stack.append(n)
    return len(seen) == len(sites)


def inverse(pattern: TargetPattern, name: str | None = None) -> TargetPattern:
    ws = pattern.workspace
    n = len(pattern)
    if ws.size - n < n:
        raise DomainError(f"no room for a disjoint {n}-site pattern on {ws.rows}x{ws.cols}")
    rows = [s.r for s in pattern.sites]
    cols = [s.c for s in pattern.sites]
    rlo, rhi, clo, chi = min(rows), max(rows), min(cols), max(cols)
    cr, cc = (rlo + rhi) / 2, (clo + chi) / 2

    def key(s: Site):
        outside = not (rlo <= s.r <= rhi and clo <= s.c <= chi)
        return (outside, max(abs(s.r - cr), abs(s.c - cc)), s)

    free = sorted((s for s in ws.sites() if s not in pattern.sites), key=key)
    return TargetPattern(name or f"inverse({pattern.name})", frozenset(free[:n]), ws)


def checkerboard(n: int, ws: Workspace, parity: int = 0) -> TargetPattern:
    """Centered ``n x n`` checkerboard; ``parity`` picks which colour is marked."""
    block = square_pattern(n, ws)
    r0, c0 = min(block.sites)
    sites = frozenset(s for s in block.sites if (s.r - r0 + s.c - c0) % 2 == parity)
    return TargetPattern(f"checkerboard{n}", sites, ws)


def gallery_pattern(kind, ws: Workspace) -> TargetPattern:
    """Look up a built-in cluster geometry.

    ``kind`` is one of ``"surface_code_quad"``, ``"nine_by_nine"``,
    ``"ring96"``, or a :class:`TargetPattern` whose inverse is wanted.
    ``("inverse", pattern)`` is accepted too.
    """
    if isinstance(kind, TargetPattern):
        if not kind.workspace.same_grid(ws):
            raise DomainError("pattern defined on a different workspace")
        return inverse(kind)
    if isinstance(kind, tuple) and len(kind) == 2 and kind[0] == "inverse":
        return gallery_pattern(kind[1], ws)
    builders = {"surface_code_quad": surface_code_quad, "nine_by_nine": nine_by_nine, "ring96": ring96}
    try:
        return builders[kind](ws)
    except KeyError:
        raise DomainError(f"unknown gallery pattern {kind!r}") from None


def forecast_target(ws: Workspace, shape: str = "trimmed_square") -> TargetPattern:
    """Compact 1000-site block used for the large-grid forecast.

    ``trimmed_square``: 32x32 with a 3-2-1 staircase (6 sites) cut from each
    corner.  ``quasi_square``: 31 full rows of 32 plus 8 sites of a 32nd row.
    """
    _require(ws, 32, 32, "forecast target")
    r0, c0 = _centered_offset(32, ws.rows), _centered_offset(32, ws.cols)
    if shape == "trimmed_square":
        def cut(i, j):
            # distance-from-corner staircase: i + j <= 2 in local corner coordinates
            return i + j <= 2
        sites = set()
        for i in range(32):
            for j in range(32):
                corner_i, corner_j = min(i, 31 - i), min(j, 31 - j)
                if not cut(corner_i, corner_j):
                    sites.add(Site(r0 + i, c0 + j))
    elif shape == "quasi_square":
        sites = {Site(r0 + i, c0 + j) for i in range(31) for j in range(32)}
        sites.update(Site(r0 + 31, c0 + 12 + j) for j in range(8))
    else:
        raise DomainError(f"unknown forecast target shape {shape!r}")
    return TargetPattern(f"forecast1000_{shape}", frozenset(sites), ws)


# ---------------------------------------------------------------- file format

def parse_grid(text: str, allow_empty: bool = False) -> tuple[Workspace, frozenset]:
    """Parse ASCII grid text into its workspace and the set of marked sites."""
    lines = text.replace("\r\n", "\n").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise PatternParseError("no rows", 1, 1)
    width = len(lines[0])
    if width == 0:
        raise PatternParseError("empty row", 1, 1)
    marked = set()
    for i, line in enumerate(lines):
        if len(line) != width:
            raise PatternParseError(f"row has {len(line)} columns, expected {width}", i + 1, min(len(line), width) + 1)
        for j, ch in enumerate(line):
            if ch == "#":
                marked.add(Site(i, j))
            elif ch != ".":
                raise PatternParseError(f"illegal character {ch!r}", i + 1, j + 1)
    if not marked and not allow_empty:
        raise PatternParseError("pattern has no target sites", 1, 1)
    return Workspace(len(lines), width), frozenset(marked)


def format_grid(ws: Workspace, sites) -> str:
    rows = [["."] * ws.cols for _ in range(ws.rows)]
    for r, c in sites:
        rows[r][c] = "#"
    return "\n".join("".join(row) for row in rows) + "\n"


def parse_pattern(text: str, name: str = "pattern") -> TargetPattern:
    ws, sites = parse_grid(text)
    return TargetPattern(name, sites, ws)


def serialize_pattern(pattern: TargetPattern) -> str:
    return format_grid(pattern.workspace, pattern.sites)
