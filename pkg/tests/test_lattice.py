import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from decimation_mc.lattice import ORIGIN, Box, Site, SiteSet, annulus, distance, even_sublattice, invisible_sites

coords = st.integers(-50, 50)
sites = st.builds(Site, coords, coords)


def test_distance_basic():
    assert distance(ORIGIN, ORIGIN) == 0.0
    assert distance(Site(0, 0), Site(3, 4)) == 5.0


@given(sites, sites)
def test_distance_symmetric(a, b):
    assert distance(a, b) == distance(b, a)
    assert distance(a, b) >= 0


@given(sites, sites, sites)
def test_distance_triangle(a, b, c):
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12


def test_box_counts_and_order():
    b = Box(2)
    assert b.side == 5 and len(b) == 25
    listed = list(b)
    assert listed[0] == Site(-2, -2) and listed[1] == Site(-2, -1)
    assert listed[-1] == Site(2, 2)
    assert Site(2, -2) in b and Site(3, 0) not in b


def test_box_rejects_negative():
    with pytest.raises(ValueError):
        Box(-1)


@pytest.mark.parametrize("L,expected", [(0, 1), (1, 1), (2, 9), (3, 9), (4, 25)])
def test_even_sublattice_counts(L, expected):
    assert len(even_sublattice(Box(L))) == expected


def test_even_sublattice_L2_members():
    got = set(even_sublattice(Box(2)))
    assert got == {Site(a, b) for a in (-2, 0, 2) for b in (-2, 0, 2)}


def test_even_sublattice_L1_is_origin():
    assert list(even_sublattice(Box(1))) == [ORIGIN]


@pytest.mark.parametrize(
    "L,flag,expected", [(1, False, 8), (1, True, 9), (2, False, 16), (2, True, 17)]
)
def test_invisible_counts(L, flag, expected):
    assert len(invisible_sites(Box(L), include_origin=flag)) == expected


@given(st.integers(0, 12), st.booleans())
def test_invisible_partition(L, flag):
    box = Box(L)
    inv = invisible_sites(box, flag)
    even = even_sublattice(box)
    assert len(inv) + len(even) == len(box) + (1 if flag else 0)
    for s in inv:
        assert not s.is_even or s == ORIGIN


@pytest.mark.parametrize("L,N,expected", [(0, 1, 8), (1, 2, 16), (3, 7, 225 - 49)])
def test_annulus_counts(L, N, expected):
    assert len(annulus(Box(L), Box(N))) == expected


@pytest.mark.parametrize("L,N", [(2, 2), (3, 1)])
def test_annulus_degenerate(L, N):
    with pytest.raises(ValueError):
        annulus(Box(L), Box(N))


@given(st.integers(0, 8), st.integers(1, 6))
def test_annulus_disjoint_from_inner(L, extra):
    ring = annulus(Box(L), Box(L + extra))
    assert all(s not in Box(L) for s in ring)
    assert len(ring) == (2 * (L + extra) + 1) ** 2 - (2 * L + 1) ** 2


def test_siteset_ops():
    box = Box(2)
    a = SiteSet.from_sites(box, [Site(0, 0), Site(1, 1)])
    b = SiteSet.from_sites(box, [Site(1, 1), Site(-2, 2)])
    assert set(a.union(b)) == {Site(0, 0), Site(1, 1), Site(-2, 2)}
    assert set(a.difference(b)) == {Site(0, 0)}
    big = a.expanded(Box(4))
    assert set(big) == set(a) and big.box == Box(4)
    with pytest.raises(ValueError):
        SiteSet.from_sites(box, [Site(3, 0)])


def test_site_helpers():
    s = Site(3, -5)
    assert s.parity == 1 and Site(1, 0).parity == -1 and not s.is_even
    assert Site(2, -4).is_even
    assert s.sup_norm() == 5
    assert s + Site(1, 1) == Site(4, -4)
    assert math.isclose(distance(s, ORIGIN), math.hypot(3, 5))


def test_coordinates_row_major():
    I1, I2 = Box(1).coordinates()
    assert I1[0, 2] == -1 and I2[0, 2] == 1
    assert np.array_equal(I1[:, 0], [-1, 0, 1])
