import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from gptlab.polytope import (
    HRep, PolytopeError, VRep, affine_hull, cut_vrep, dump_hrep, dump_vrep, enumerate_facets,
    enumerate_vertices, extreme_rays, is_extreme, load_hrep, load_vrep, membership, satisfies,
)

SQUARE = VRep([(0, 0), (1, 0), (0, 1), (1, 1), (F(1, 2), F(1, 2))])


def test_square_facets_and_vertices():
    h = enumerate_facets(SQUARE)
    assert len(h.inequalities) == 4 and not h.equalities
    assert sorted(enumerate_vertices(h).points) == sorted(SQUARE.points[:4])


def test_cube_rays():
    rays = extreme_rays([[1, 0, 0], [0, 1, 0], [0, 0, 1]], 3)
    assert sorted(rays) == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]
    with pytest.raises(PolytopeError):
        extreme_rays([], 2)


def test_lower_dimensional_polytope_keeps_equalities():
    tri = VRep([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
    h = enumerate_facets(tri)
    assert len(h.equalities) == 1 and len(h.inequalities) == 3
    eqs, _ = affine_hull(tri.points)
    assert len(eqs) == 1


def test_extremality_and_membership_witnesses():
    pts = SQUARE.points
    assert is_extreme((1, 1), pts).extreme
    mid = is_extreme((F(1, 2), F(1, 2)), pts)
    assert not mid.extreme and sum(mid.weights) == 1
    out = membership((2, 0), SQUARE)
    assert not out.inside
    w = out.witness
    assert sum(a * b for a, b in zip(w.functional, (2, 0))) == w.violated_value > w.threshold
    inside = membership((F(1, 3), F(2, 3)), SQUARE)
    assert inside.inside and sum(inside.weights) == 1


def test_cut_vrep_slab():
    cut = cut_vrep(VRep([(0, 0), (2, 0), (0, 2), (2, 2)]), [(F(1, 2), 0)], check=True)
    assert sorted(cut.points) == [(0, 0), (0, 2), (2, 0), (2, 2)]
    cut = cut_vrep(VRep([(0, 0), (3, 0), (0, 1), (3, 1)]), [(F(1, 2), 0)], check=True)
    assert sorted(cut.points) == [(0, 0), (0, 1), (2, 0), (2, 1)]


def test_text_roundtrip():
    h = enumerate_facets(SQUARE)
    assert load_hrep(dump_hrep(h)).inequalities == h.inequalities
    assert load_vrep(dump_vrep(SQUARE)).points == SQUARE.points


def test_local_polytope_22():
    pts = []
    for a0, a1, b0, b1 in itertools.product(range(2), repeat=4):
        t = [0] * 16
        for x, y in itertools.product(range(2), repeat=2):
            t[(2 * x + (a0, a1)[x]) * 4 + 2 * y + (b0, b1)[y]] = 1
        pts.append(t)
    h = enumerate_facets(VRep(pts))
    assert len(h.inequalities) == 24


points2 = st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=3, max_size=12)
points3 = st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)),
                   min_size=4, max_size=12)


def _roundtrip(pts):
    v = VRep(pts)
    h = enumerate_facets(v)
    back = enumerate_vertices(h)
    hull = sorted(p for p in v.points if is_extreme(p, v.points).extreme)
    assert sorted(back.points) == hull
    assert all(satisfies(h, p) for p in v.points)
    h2 = enumerate_facets(back)
    assert sorted(h2.inequalities) == sorted(h.inequalities)


@given(points2)
def test_vh_roundtrip_plane(pts):
    _roundtrip(pts)


@given(points3)
def test_vh_roundtrip_space(pts):
    _roundtrip(pts)
