import pytest
from hypothesis import given

from atom_assembler import PatternParseError, Site, Workspace, gallery_pattern, parse_pattern, serialize_pattern, square_pattern
from atom_assembler.lattice import DomainError
from atom_assembler.patterns import checkerboard, forecast_target, inverse, is_single_cycle

from conftest import instances


def test_square_centered_10(ws19):
    p = square_pattern(10, ws19)
    assert len(p) == 100
    assert min(p.sites) == (4, 4)  # (19 - 10) // 2, ties toward lower index


def test_square_corner_and_full(ws19):
    assert square_pattern(1, ws19, (0, 0)).sites == {(0, 0)}
    assert len(square_pattern(19, ws19)) == 361


def test_square_out_of_bounds(ws19):
    with pytest.raises(DomainError):
        square_pattern(5, ws19, (16, 0))


def test_surface_code_quad(ws19):
    p = gallery_pattern("surface_code_quad", ws19)
    assert len(p) == 100
    # four connected components of 25, separated by empty rows/columns
    comps = _components(p.sites)
    assert sorted(len(c) for c in comps) == [25] * 4
    for c in comps:
        rows = {s[0] for s in c}
        cols = {s[1] for s in c}
        assert len(rows) == 5 and len(cols) == 5


def _components(sites):
    sites, comps = set(sites), []
    while sites:
        stack = [sites.pop()]
        comp = set(stack)
        while stack:
            r, c = stack.pop()
            for n in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
                if n in sites:
                    sites.remove(n)
                    comp.add(n)
                    stack.append(n)
        comps.append(comp)
    return comps


def test_nine_by_nine(ws19):
    assert len(gallery_pattern("nine_by_nine", ws19)) == 81


def test_ring96_is_single_cycle(ws19):
    p = gallery_pattern("ring96", ws19)
    assert len(p) == 96
    assert is_single_cycle(p.sites)


def test_is_single_cycle_rejects_two_loops():
    ring = {(0, 0), (0, 1), (1, 1), (1, 0)}
    assert is_single_cycle(ring)
    assert not is_single_cycle(ring | {(r + 5, c) for r, c in ring})


def test_gallery_too_small():
    with pytest.raises(DomainError):
        gallery_pattern("ring96", Workspace(10, 10))
    with pytest.raises(DomainError):
        gallery_pattern("surface_code_quad", Workspace(10, 19))


@pytest.mark.parametrize("pattern", ["surface_code_quad", "nine_by_nine", "ring96"])
def test_inverse_of_gallery(ws19, pattern):
    p = gallery_pattern(pattern, ws19)
    inv = gallery_pattern(p, ws19)
    assert len(inv) == len(p) and not (inv.sites & p.sites)


def test_checkerboard_inverse_is_other_colour(ws19):
    p = checkerboard(8, ws19)
    assert inverse(p).sites == checkerboard(8, ws19, parity=1).sites


def test_inverse_needs_room():
    with pytest.raises(DomainError):
        inverse(square_pattern(2, Workspace(2, 3)))


@pytest.mark.parametrize("shape", ["trimmed_square", "quasi_square"])
def test_forecast_target_has_1000_sites(shape):
    assert len(forecast_target(Workspace(50, 50), shape)) == 1000


def test_parse_examples():
    p = parse_pattern("##\n##")
    assert p.workspace.shape == (2, 2) and len(p) == 4
    assert parse_pattern("#.\n.#").sites == {(0, 0), (1, 1)}
    assert parse_pattern("#.\r\n.#\r\n").sites == {(0, 0), (1, 1)}


@pytest.mark.parametrize("text, line, col", [("..", 1, 1), ("##\n#", 2, 2), ("#x\n##", 1, 2), ("", 1, 1)])
def test_parse_errors(text, line, col):
    with pytest.raises(PatternParseError) as err:
        parse_pattern(text)
    assert (err.value.line, err.value.column) == (line, col)


@given(instances())
def test_round_trip(inst):
    _, target = inst
    text = serialize_pattern(target)
    assert "\r" not in text and text.endswith("\n")
    again = parse_pattern(text, name=target.name)
    assert again.sites == target.sites and again.workspace.shape == target.workspace.shape
