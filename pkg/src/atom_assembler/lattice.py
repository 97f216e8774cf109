"""Grid geometry for a rectangular array of trap sites.

Sites are addressed as ``(row, col)`` tuples. Atoms travel along grid lines
only, so a transport between two sites is either a straight segment or an
L-shaped path with a single corner.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple


class DomainError(ValueError):
    """Raised when an operation is called outside its valid domain."""


class Site(NamedTuple):
    r: int
    c: int


@dataclass(frozen=True)
class Workspace:
    rows: int
    cols: int
    pitch: float = 10.3  # micrometers, metadata only

    def __post_init__(self) -> None:
        if int(self.rows) < 1 or int(self.cols) < 1:
            raise DomainError(f"workspace must be at least 1x1, got {self.rows}x{self.cols}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    def contains(self, site) -> bool:
        r, c = site
        return 0 <= r < self.rows and 0 <= c < self.cols

    def check(self, site) -> Site:
        if not self.contains(site):
            raise DomainError(f"site {tuple(site)} outside {self.rows}x{self.cols} workspace")
        return Site(int(site[0]), int(site[1]))

    def sites(self) -> Iterator[Site]:
        """All sites in row-major order."""
        for r in range(self.rows):
            for c in range(self.cols):
                yield Site(r, c)

    def same_grid(self, other: "Workspace") -> bool:
        return self.rows == other.rows and self.cols == other.cols


@dataclass(frozen=True)
class GridPath:
    """Axis-aligned path given by its waypoints (endpoints plus optional corner)."""

    waypoints: tuple[Site, ...]

    @property
    def src(self) -> Site:
        return self.waypoints[0]

    @property
    def dst(self) -> Site:
        return self.waypoints[-1]

    @property
    def corner(self) -> Site | None:
        return self.waypoints[1] if len(self.waypoints) == 3 else None

    @property
    def steps(self) -> list[Site]:
        """Every site visited, endpoints included, in traversal order."""
        out = [self.waypoints[0]]
        for a, b in zip(self.waypoints, self.waypoints[1:]):
            out.extend(_segment(a, b)[1:])
        return out

    @property
    def interior(self) -> list[Site]:
        return self.steps[1:-1]

    def __len__(self) -> int:
        return len(self.steps) - 1


def _segment(a: Site, b: Site) -> list[Site]:
    # inclusive of both ends; a and b share a row or a column
    if a.r == b.r:
        step = 1 if b.c >= a.c else -1
        return [Site(a.r, c) for c in range(a.c, b.c + step, step)]
    step = 1 if b.r >= a.r else -1
    return [Site(r, a.c) for r in range(a.r, b.r + step, step)]


def manhattan(a, b) -> int:
    return abs(a[0] - b[0]) + abs(a[1] - b[1])


def paths_between(a: Site, b: Site) -> list[GridPath]:
    """Unchecked variant of :func:`candidate_paths` used in hot loops."""
    if a.r == b.r or a.c == b.c:
        return [GridPath((a, b))]
    return [GridPath((a, Site(a.r, b.c), b)), GridPath((a, Site(b.r, a.c), b))]


def candidate_paths(a, b, ws: Workspace) -> list[GridPath]:
    """Minimal monotone grid paths from ``a`` to ``b``.

    One straight path when the sites share a row or column, otherwise the two
    L-paths: row-then-column (corner at ``(a.r, b.c)``) first, then
    column-then-row.
    """
    a, b = ws.check(a), ws.check(b)
    if a == b:
        raise DomainError(f"path endpoints coincide at {tuple(a)}")
    return paths_between(a, b)
