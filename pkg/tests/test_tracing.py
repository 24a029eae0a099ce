import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from volent.tracing import (OK, backend, batch_first_crossing,
                            first_crossing, launch, trace)


def test_perpendicular_midpoint_crossing(pentagon_q1, table_q1):
    # straight down the inradius: hits the bottom wall at its midpoint,
    # perpendicularly
    poly = pentagon_q1
    best = min(range(poly.p), key=lambda i: poly.side(i, poly.center))
    e = poly.edges[best]
    j, t, u, th, flag, *_ = first_crossing(
        table_q1, poly.center.x, poly.center.y,
        *_dir_toward_wall(poly, e))
    assert flag == OK
    assert j == best
    # tolerances limited by the ternary search locating the foot
    assert t == pytest.approx(poly.inradius, abs=1e-6)
    assert u == pytest.approx(poly.edge_length / 2, abs=1e-6)
    assert th == pytest.approx(math.pi / 2, abs=1e-6)


def _dir_toward_wall(poly, e):
    # direction at the polygon center of the geodesic hitting wall e
    # perpendicularly: ternary search for the closest wall point
    from volent.hypgeom import HPoint, dist, geodesic_through

    def pt(s):
        psi = 2.0 * math.atan(math.exp(s))
        return HPoint(e.cx + e.r * math.cos(psi), e.r * math.sin(psi))

    lo, hi = e.s_lo, e.s_hi
    for _ in range(200):
        m1 = lo + (hi - lo) / 3
        m2 = hi - (hi - lo) / 3
        if dist(poly.center, pt(m1)) < dist(poly.center, pt(m2)):
            hi = m2
        else:
            lo = m1
    g = geodesic_through(poly.center, pt(0.5 * (lo + hi)))
    return g.tangent_at_basepoint()


def test_trace_gaps_bounded_by_diameter(table_q2):
    rng = np.random.default_rng(3)
    for _ in range(30):
        ang = rng.uniform(0, 2 * math.pi)
        j, t, u, th, flag = trace(table_q2, rng.uniform(-0.1, 0.1),
                                  rng.uniform(0.9, 1.1),
                                  math.cos(ang), math.sin(ang), 40.0)
        assert flag == OK
        gaps = np.diff(t)
        assert gaps.min() > 0
        assert gaps.max() <= table_q2.diameter + 1e-9
        assert np.all((th > 0) & (th < math.pi))
        assert np.all((u >= 0) & (u <= table_q2.edge_length))


def test_crossing_count_in_measured_bounds(pentagon_q2, table_q2):
    # over time 50 the crossing count is bounded by diameter below and
    # the observed minimal gap above
    rng = np.random.default_rng(11)
    ang = rng.uniform(0, 2 * math.pi)
    j, t, u, th, flag = trace(table_q2, 0.02, 1.01,
                              math.cos(ang), math.sin(ang), 50.0)
    assert flag == OK
    n = len(j)
    assert n >= 50.0 / pentagon_q2.diameter - 1
    min_gap = np.diff(t).min()
    assert n <= 50.0 / min_gap + 1


def test_launch_round_trip(table_q2):
    rng = np.random.default_rng(5)
    edges = rng.integers(0, 5, 200)
    us = rng.uniform(0.05, table_q2.edge_length - 0.05, 200)
    ths = rng.uniform(0.2, math.pi - 0.2, 200)
    x, y, dx, dy = launch(table_q2, edges, us, ths)
    # launched vectors sit on their wall with the requested section
    # coordinates; flowing them returns coordinates of the NEXT wall
    j, t, u, th, flag = batch_first_crossing(table_q2, x, y, dx, dy,
                                             prev=edges)
    good = flag == OK
    assert good.mean() > 0.95
    assert np.all(t[good] > 0)
    assert np.all(t[good] <= table_q2.diameter + 1e-9)


def test_determinism(table_q2):
    a = trace(table_q2, 0.03, 1.0, 0.6, 0.8, 30.0)
    b = trace(table_q2, 0.03, 1.0, 0.6, 0.8, 30.0)
    for x, y in zip(a[:4], b[:4]):
        assert np.array_equal(x, y)


_WORKER = r"""
import json, math, sys
import numpy as np
from volent.hypgeom import regular_polygon
from volent.tracing import WallTable, backend, batch_first_crossing, trace
poly = regular_polygon(5, 2, (2, 2, 2, 2, 2))
tab = WallTable.from_polygon(poly)
rng = np.random.default_rng(7)
n = 300
x = rng.uniform(-0.1, 0.1, n); y = rng.uniform(0.9, 1.1, n)
a = rng.uniform(0, 2 * math.pi, n)
j, t, u, th, fl = batch_first_crossing(tab, x, y, np.cos(a), np.sin(a))
jj, tt, uu, thh, _ = trace(tab, 0.03, 1.0, 0.6, 0.8, 30.0)
print(json.dumps({"backend": backend(),
                  "batch": [j.tolist(), t.tolist(), u.tolist(), th.tolist()],
                  "trace": [jj.tolist(), tt.tolist(), uu.tolist(), thh.tolist()]}))
"""


def _run_backend(pure):
    env = dict(os.environ, VOLENT_PURE_NUMPY="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", _WORKER], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_backends_agree():
    fast = _run_backend(False)
    slow = _run_backend(True)
    if fast["backend"] == slow["backend"]:
        pytest.skip("numba unavailable, single backend only")
    for key in ("batch", "trace"):
        for a, b in zip(fast[key], slow[key]):
            assert np.allclose(a, b, atol=1e-12)


def test_backend_name_is_reported():
    assert backend() in ("numba", "numpy")
