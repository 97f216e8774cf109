import numpy as np
import pytest
from hypothesis import strategies as st

from atom_assembler import Occupancy, Site, TargetPattern, Workspace


@st.composite
def instances(draw, max_side=8, min_side=1):
    """Random (occupancy, target) pair on a small grid."""
    rows = draw(st.integers(min_side, max_side))
    cols = draw(st.integers(min_side, max_side))
    ws = Workspace(rows, cols)
    n = rows * cols
    filled = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    target = draw(st.lists(st.booleans(), min_size=n, max_size=n).filter(any))
    occ = Occupancy(ws, grid=np.array(filled).reshape(rows, cols))
    sites = [Site(i // cols, i % cols) for i, t in enumerate(target) if t]
    return occ, TargetPattern("random", frozenset(sites), ws)


def random_instance(rng: np.random.Generator, max_side: int = 12):
    rows, cols = rng.integers(1, max_side + 1, size=2)
    ws = Workspace(int(rows), int(cols))
    occ = Occupancy(ws, grid=rng.random(ws.shape) < rng.uniform(0.2, 0.8))
    mask = rng.random(ws.shape) < rng.uniform(0.1, 0.6)
    if not mask.any():
        mask[rng.integers(rows), rng.integers(cols)] = True
    target = TargetPattern("random", frozenset(Site(int(r), int(c)) for r, c in np.argwhere(mask)), ws)
    return occ, target


@pytest.fixture
def ws19():
    return Workspace(19, 19)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
