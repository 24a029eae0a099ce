import json
import math

import numpy as np
import pytest

from volent.errors import NotStronglyConnected
from volent.graphs import MetricGraph, graph_entropy, scale_lengths


def theta_graph():
    # quotient of the 3-regular tree: 2 vertices, 3 parallel unit edges
    return MetricGraph.from_undirected(
        2, [(0, 1, 1.0), (0, 1, 1.0), (0, 1, 1.0)])


def k34():
    # quotient of the (3,4)-biregular tree: complete bipartite K_{3,4}
    return MetricGraph.from_undirected(
        7, [(i, 3 + j, 1.0) for i in range(3) for j in range(4)])


def _tree_ball_slope(degrees, radius=40):
    # ball counting in the universal cover: vertices at distance r
    # alternate between the two degree classes
    counts = [1]
    shell, cls = 1.0, 0
    d = degrees
    shell = d[0]
    counts.append(counts[-1] + shell)
    cls = 1
    for r in range(2, radius + 1):
        shell *= d[cls % len(d)] - 1
        counts.append(counts[-1] + shell)
        cls += 1
    # consecutive-ball log ratio over one period of the degree pattern
    per = len(degrees)
    lo = math.log(counts[radius - per])
    hi = math.log(counts[radius])
    return (hi - lo) / per


def test_three_regular_tree_oracle():
    est = graph_entropy(theta_graph(), tol=1e-10)
    assert est.value == pytest.approx(math.log(2.0), abs=1e-8)
    # ball-counting slope of the 3-regular tree gives the same rate
    assert _tree_ball_slope([3]) == pytest.approx(math.log(2.0), abs=1e-6)


def test_biregular_tree_oracle():
    est = graph_entropy(k34(), tol=1e-10)
    assert est.value == pytest.approx(math.log(6.0) / 2.0, abs=1e-8)
    # even-radius ball slope in the (3,4)-biregular tree
    assert _tree_ball_slope([3, 4]) == pytest.approx(
        math.log(6.0) / 2.0, abs=1e-6)


def test_homogeneity():
    g = theta_graph()
    h = graph_entropy(g, tol=1e-10).value
    for alpha in (0.25, 4.0):
        hs = graph_entropy(scale_lengths(g, alpha), tol=1e-10).value
        assert hs == pytest.approx(h / math.sqrt(alpha), abs=2e-10)
    assert np.allclose(scale_lengths(g, 1.0).length, g.length)


def test_single_cycle_is_degenerate():
    g = MetricGraph.from_undirected(4, [(0, 1, 1.0), (1, 2, 0.5),
                                        (2, 3, 2.0), (3, 0, 1.0)])
    est = graph_entropy(g)
    assert est.value == 0.0
    assert est.diagnostics["degenerate"]


def test_disconnected_rejected():
    g = MetricGraph.from_undirected(
        4, [(0, 1, 1.0)] * 3 + [(2, 3, 1.0)] * 3)
    with pytest.raises(NotStronglyConnected):
        graph_entropy(g)


def test_terminal_vertex_rejected():
    with pytest.raises(ValueError):
        MetricGraph.from_undirected(2, [(0, 1, 1.0)])


def test_subdivision_invariance():
    g = theta_graph()
    # split one unit edge into two halves through a new vertex
    g2 = MetricGraph.from_undirected(
        3, [(0, 1, 1.0), (0, 1, 1.0), (0, 2, 0.5), (2, 1, 0.5)])
    a = graph_entropy(g, tol=1e-10).value
    b = graph_entropy(g2, tol=1e-10).value
    assert b == pytest.approx(a, abs=2e-10)


def test_relabeling_invariance():
    perm = {0: 5, 1: 2, 2: 0, 3: 6, 4: 1, 5: 3, 6: 4}
    edges = [(i, 3 + j, 1.0) for i in range(3) for j in range(4)]
    relabeled = [(perm[a], perm[b], ln) for a, b, ln in edges]
    a = graph_entropy(MetricGraph.from_undirected(7, edges), tol=1e-10)
    b = graph_entropy(MetricGraph.from_undirected(7, relabeled), tol=1e-10)
    assert a.value == pytest.approx(b.value, abs=1e-12)


def test_spectral_radius_log_convex_in_h():
    from volent.graphs import _edge_adjacency, _spectral_radius
    rng = np.random.default_rng(0)
    edges = [(0, 1, 0.7), (1, 2, 1.3), (2, 0, 0.9), (0, 2, 1.1),
             (1, 0, 0.8)]
    g = MetricGraph.from_undirected(3, edges)
    hs = np.linspace(0.1, 2.0, 9)
    lr = np.array([math.log(_spectral_radius(_edge_adjacency(g, h)))
                   for h in hs])
    d1 = np.diff(lr)
    assert np.all(d1 < 0)           # strictly decreasing
    assert np.all(np.diff(d1) > -1e-9)  # convex


def test_json_round_trip():
    doc = {"vertices": 2, "edges": [{"src": 0, "dst": 1, "len": 1.0}] * 3}
    g = MetricGraph.from_json(json.dumps(doc))
    assert g.n_edges == 6
    assert graph_entropy(g).value == pytest.approx(math.log(2), abs=1e-8)
