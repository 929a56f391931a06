from fractions import Fraction

import numpy as np
import pytest

from dopkit import tiling
from dopkit.errors import ConfigurationError


@pytest.mark.parametrize("sides,count", [((1, 1, 1), 2), ((2, 2, 2), 20), ((3, 3, 3), 980), ((1, 2, 3), 10),
                                         ((4, 1, 5), 126)])
def test_macmahon_values(sides, count):
    assert tiling.macmahon(tiling.Hexagon(*sides)) == count


def test_enumeration_matches_macmahon():
    for a in range(1, 5):
        for b in range(1, 5):
            for c in range(1, 5):
                if a * b * c <= 12:
                    h = tiling.Hexagon(a, b, c)
                    assert len(tiling.enumerate_tilings(h)) == tiling.macmahon(h)


def test_enumeration_cap():
    with pytest.raises(ConfigurationError):
        tiling.enumerate_tilings(tiling.Hexagon(2, 2, 4))


def test_small_column_law():
    col = tiling.column_ensemble(tiling.Hexagon(2, 1, 1), 1)
    assert tiling.hole_law_in_lattice(col) == {(0,): Fraction(1, 3), (1,): Fraction(2, 3)}


@pytest.mark.parametrize("sides", [(2, 2, 2), (1, 3, 2), (3, 1, 2), (2, 3, 2), (3, 2, 1)])
def test_column_laws_match_enumeration(sides):
    h = tiling.Hexagon(*sides)
    tilings = tiling.enumerate_tilings(h)
    for m in range(1, h.a + h.b):
        enum = tiling.column_marginal(tilings, m)
        law = tiling.hole_law_in_lattice(tiling.column_ensemble(h, m))
        assert enum == {k: v for k, v in law.items() if v}


def test_profiles_complement_each_other():
    col = tiling.column_ensemble(tiling.Hexagon(6, 6, 6), 6)
    holes = tiling.one_point_profile(col, "holes")
    parts = tiling.one_point_profile(col, "particles")
    np.testing.assert_allclose(holes + parts, 1.0, atol=1e-12)
    assert holes.sum() == pytest.approx(col.L_m, abs=1e-12)


def test_profile_matches_exact_marginal_when_a_less_than_b():
    h = tiling.Hexagon(1, 3, 2)
    tilings = tiling.enumerate_tilings(h)
    for m in (1, 2, 3):
        col = tiling.column_ensemble(h, m)
        enum = tiling.column_marginal(tilings, m)
        exact = np.zeros(col.N)
        for S, p in enum.items():
            exact[list(S)] += float(p)
        np.testing.assert_allclose(tiling.one_point_profile(col, "holes"), exact, atol=1e-12)


def test_inscribed_ellipse_is_tangent_to_all_sides():
    al, be, ga = 1.0, 1.3, 0.8
    C, S = tiling.inscribed_ellipse(al, be, ga)
    V = tiling.hexagon_vertices(al, be, ga)
    for p, q in zip(V, np.roll(V, -1, axis=0)):
        t = q - p
        n = np.array([t[1], -t[0]]) / np.linalg.norm(t)
        d = n @ p
        assert n @ S @ n == pytest.approx((d - n @ C) ** 2, rel=1e-12)


def test_frozen_boundary_near_ellipse():
    fb = tiling.frozen_boundary(1, 1, 1, 1.0, 40)
    assert fb.max_relative_error < 0.02
    assert fb.kinds == ("saturated", "band", "saturated")


def test_column_range():
    with pytest.raises(ConfigurationError):
        tiling.column_ensemble(tiling.Hexagon(2, 2, 2), 4)
    with pytest.raises(ConfigurationError):
        tiling.Hexagon(0, 1, 1)
