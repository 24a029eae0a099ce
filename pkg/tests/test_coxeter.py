import collections
import math

import numpy as np
import pytest

from volent.coxeter import (ChamberSet, GrowthTable, enumerate_chambers,
                            growth_slope, weighted_ball_growth)
from volent.errors import FrontierTooClose, WindowTooNarrow
from volent.hypgeom import regular_polygon


def _depth_counts(cs):
    return collections.Counter(cs.depths.tolist())


def test_depth_zero_and_one(pentagon_q1):
    cs = enumerate_chambers(pentagon_q1, max_depth=0)
    assert len(cs) == 1
    cs = enumerate_chambers(pentagon_q1, max_depth=1)
    assert _depth_counts(cs) == {0: 1, 1: 5}


def _brute_force_count(poly, depth):
    # all words over the reflections, deduplicated by matrix up to sign
    from volent.hypgeom import reflect
    gens = [reflect(e.geodesic).m for e in poly.edges]
    seen = {}
    frontier = [np.eye(2)]

    def key(m):
        v = m.ravel()
        lead = next(x for x in v if abs(x) > 1e-9)
        if lead < 0:
            v = -v
        return tuple(np.round(v, 9))

    seen[key(np.eye(2))] = True
    for _ in range(depth):
        nxt = []
        for mat in frontier:
            for g in gens:
                child = mat @ g
                k = key(child)
                if k not in seen:
                    seen[k] = True
                    nxt.append(child)
        frontier = nxt
    return len(seen)


def test_depth_three_count_matches_brute_force(pentagon_q1):
    cs = enumerate_chambers(pentagon_q1, max_depth=3)
    assert len(cs) == _brute_force_count(pentagon_q1, 3)
    # the depth-2 shell: 25 words, 5 collapse to identity, 5 commuting
    # pairs coincide
    assert _depth_counts(cs)[2] == 15


def test_dedup_separation(pentagon_q1):
    cs = enumerate_chambers(pentagon_q1, max_depth=3)
    z = cs.centers
    d2 = np.abs(z[:, None] - z[None, :]) ** 2
    ch = 1.0 + d2 / (2.0 * np.outer(z.imag, z.imag))
    dist = np.arccosh(np.maximum(ch, 1.0))
    np.fill_diagonal(dist, np.inf)
    assert dist.min() > pentagon_q1.inradius / 2


def test_multiplicity_uniform_q(pentagon_q2):
    cs = enumerate_chambers(pentagon_q2, max_depth=4)
    expected = cs.depths * math.log(2.0)
    assert np.allclose(cs.log_mult, expected, atol=1e-12)


def test_multiplicity_mixed_q():
    poly = regular_polygon(5, 2, (2, 3, 2, 2, 2))
    cs = enumerate_chambers(poly, max_depth=2)
    # one depth-2 chamber per unordered adjacent pair {0,1} carries 2*3
    mults = np.exp(cs.log_mult[cs.depths == 2])
    assert {round(v) for v in mults} <= {4, 6, 9}
    assert (np.round(mults) == 6).sum() >= 2


def test_determinism(pentagon_q2):
    a = enumerate_chambers(pentagon_q2, max_depth=4)
    b = enumerate_chambers(pentagon_q2, max_depth=4)
    assert np.array_equal(a.centers, b.centers)
    assert np.array_equal(a.log_mult, b.log_mult)


def test_growth_table_monotone(pentagon_q1):
    cs = enumerate_chambers(pentagon_q1, radius_cut=8.0)
    tab = weighted_ball_growth(cs, 1.0, 6.0, 12)
    assert np.all(np.diff(tab.log_weight) >= 0)


def test_frontier_too_close(pentagon_q1):
    cs = enumerate_chambers(pentagon_q1, radius_cut=8.0)
    with pytest.raises(FrontierTooClose):
        weighted_ball_growth(cs, 1.0, 7.5)


def test_synthetic_exact_exponential(pentagon_q1):
    r = np.linspace(2.0, 8.0, 16)
    tab = GrowthTable(radii=r, log_weight=2.0 * r + 0.7)
    slope, err = growth_slope(tab, pentagon_q1.diameter)
    assert slope == pytest.approx(2.0, abs=1e-9)
    assert err >= 0


def test_window_too_narrow(pentagon_q1):
    tab = GrowthTable(radii=np.array([1.0, 2.0]),
                      log_weight=np.array([0.0, 1.0]))
    with pytest.raises(WindowTooNarrow):
        growth_slope(tab, pentagon_q1.diameter)


def test_apartment_volume_tracks_disk_area(pentagon_q1):
    # with q = 1 the weighted volume is chamber count x area and must
    # stay within a constant factor of the hyperbolic disk area
    cs = enumerate_chambers(pentagon_q1, radius_cut=10.0)
    tab = weighted_ball_growth(cs, 4.0, 8.0, 9)
    vol = np.exp(tab.log_weight) * pentagon_q1.area
    disk = 2.0 * math.pi * (np.cosh(tab.radii) - 1.0)
    ratio = vol / disk
    assert ratio.min() > 0.5 and ratio.max() < 2.0


def test_slope_monotone_in_q():
    slopes = {}
    for qv in (2, 3):
        poly = regular_polygon(5, 2, (qv,) * 5)
        cs = enumerate_chambers(poly, radius_cut=10.0)
        tab = weighted_ball_growth(cs, 3.0, 8.0)
        slopes[qv], _ = growth_slope(tab, poly.diameter)
    assert slopes[3] > slopes[2]
