"""Cutting sequences, Birkhoff sums, and the cross-section pressure solver.

A geodesic in the quotient is coded by the ordered list of walls it
crosses, with the flight length between consecutive crossings and the
branching weight collected at each crossing. The first return map of
the geodesic flow to the wall cross-section is discretized on a grid of
(edge, position, incidence angle) cells (Ulam's method); the volume
entropy is then the unique h at which the weighted transfer matrix

    B(h)[i -> j] = mass_ij * q(j) * exp((1 - h) * L_ij)

has spectral radius one, where mass_ij is the empirical transition
probability, L_ij the mean return length of the observed i -> j
transitions, and q(j) the branching parameter of the landing wall. The
exp(+L) factor is the unstable Jacobian of the return map, exact in
curvature -1; dividing the transfer operator of the potential
ln q - h L by the geometric potential in this way is what turns the
empirical (absolutely continuous) transition masses into an estimator
of the topological pressure rather than of the SRB pressure, which is
identically zero. With q = 1 the matrix is stochastic at h = 1, so the
solver recovers the hyperbolic-plane entropy exactly there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .constants import DEFAULT_H_TOL, EPS_POWER
from .errors import (BracketFailed, NotIrreducible, PowerIterationStalled,
                     VertexHit)
from .hypgeom import CoxeterPolygon, HGeodesic, HPoint
from .tracing import (LOST, NEAR_VERTEX, OK, WallTable, batch_first_crossing,
                      launch, trace)

_MODEL_FORMAT = 1


@dataclass(frozen=True)
class WallCrossing:
    """One wall crossing along a geodesic."""

    t: float
    edge_label: int
    thickness_q: int
    u: float
    theta: float


@dataclass(frozen=True)
class CuttingSequence:
    """Ordered wall crossings of one geodesic over a time span."""

    crossings: tuple
    t_span: tuple

    def times(self) -> np.ndarray:
        return np.array([c.t for c in self.crossings])

    def log_thicknesses(self) -> np.ndarray:
        return np.array([math.log(c.thickness_q) for c in self.crossings])


def _state_of_geodesic(geo: HGeodesic):
    p = geo.basepoint
    dx, dy = geo.tangent_at_basepoint()
    return p.x, p.y, dx, dy


def _trace_span(table: WallTable, x, y, dx, dy, t0, t1):
    """Crossings with t in (t0, t1], tracing backward when t0 < 0."""
    rows = []
    if t1 > 0.0:
        j, t, u, th, flag = trace(table, x, y, dx, dy, t1)
        if flag == NEAR_VERTEX:
            raise VertexHit("geodesic passed near a tessellation vertex")
        if flag == LOST:
            raise VertexHit("degenerate geodesic geometry during tracing")
        for k in range(len(j)):
            if t[k] > t0:
                rows.append((t[k], int(j[k]), u[k], th[k]))
    if t0 < 0.0:
        j, t, u, th, flag = trace(table, x, y, -dx, -dy, -t0)
        if flag == NEAR_VERTEX:
            raise VertexHit("geodesic passed near a tessellation vertex")
        if flag == LOST:
            raise VertexHit("degenerate geodesic geometry during tracing")
        for k in range(len(j)):
            if -t[k] <= t1:
                rows.append((-t[k], int(j[k]), u[k], th[k]))
    rows.sort()
    return rows


def cutting_sequence(geodesic: HGeodesic, t_span: tuple,
                     poly: CoxeterPolygon) -> CuttingSequence:
    """All wall crossings of the geodesic with time in (t0, t1].

    Edge labels refer to walls of the base polygon after folding by the
    reflection group. Backward crossings (t < 0) store the section
    coordinates seen by the reversed flow.
    """
    t0, t1 = t_span
    if not t1 > t0:
        raise ValueError("need t1 > t0")
    table = WallTable.from_polygon(poly)
    x, y, dx, dy = _state_of_geodesic(geodesic)
    rows = _trace_span(table, x, y, dx, dy, t0, t1)
    cr = tuple(WallCrossing(t=t, edge_label=j, thickness_q=int(poly.q[j]),
                            u=u, theta=th)
               for (t, j, u, th) in rows)
    return CuttingSequence(crossings=cr, t_span=(float(t0), float(t1)))


def _tent_antiderivative(x: float) -> float:
    # integral of max(0, 1 - |s|) from -inf to x
    if x <= -1.0:
        return 0.0
    if x <= 0.0:
        return 0.5 * (x + 1.0) ** 2
    if x <= 1.0:
        return 1.0 - 0.5 * (1.0 - x) ** 2
    return 1.0


def f_value(point: HPoint, angle: float, poly: CoxeterPolygon) -> float:
    """Sum of ln q(H) * (1 - |t_H|) over walls crossed within unit time.

    The vector is the unit tangent at the given point making the given
    angle with the horizontal.
    """
    table = WallTable.from_polygon(poly)
    rows = _trace_span(table, point.x, point.y,
                       math.cos(angle), math.sin(angle), -1.0, 1.0)
    total = 0.0
    for (t, j, _, _) in rows:
        if abs(t) < 1.0:
            total += math.log(poly.q[j]) * (1.0 - abs(t))
    return total


def lq_value(point: HPoint, angle: float, poly: CoxeterPolygon) -> tuple:
    """(l, q) at the vector: l is the flight length of the wall-to-wall
    segment containing the base point, q the branching parameter of the
    segment's entry wall (the last crossing at or before time 0)."""
    table = WallTable.from_polygon(poly)
    dx, dy = math.cos(angle), math.sin(angle)
    jf, tf, _, _, flag = trace(table, point.x, point.y, dx, dy, 1e6, max_steps=1)
    if flag != OK or len(tf) == 0:
        raise VertexHit("forward crossing not found")
    jb, tb, _, _, flag = trace(table, point.x, point.y, -dx, -dy, 1e6, max_steps=1)
    if flag != OK or len(tb) == 0:
        raise VertexHit("backward crossing not found")
    l = float(tf[0] + tb[0])
    q = int(poly.q[int(jb[0])])
    return l, q


def birkhoff_f_integral(seq: CuttingSequence, a: float, b: float) -> float:
    """Integral over [a, b] of f along the flow.

    f at flow time t sums ln q(H) * max(0, 1 - |t - t_H|) over wall
    crossings H, so the integral is a sum of clipped unit-tent masses.
    The sequence must cover (a - 1, b + 1).
    """
    t0, t1 = seq.t_span
    if t0 > a - 1.0 or t1 < b + 1.0:
        raise ValueError("cutting sequence span too short for this integral")
    total = 0.0
    for c in seq.crossings:
        w = math.log(c.thickness_q)
        if w != 0.0:
            total += w * (_tent_antiderivative(b - c.t)
                          - _tent_antiderivative(a - c.t))
    return total


def thickness_log_product(seq: CuttingSequence, a: float, b: float) -> float:
    """ln of the product of branching parameters crossed in [a, b]."""
    return sum(math.log(c.thickness_q) for c in seq.crossings
               if a <= c.t <= b)


def birkhoff_lq_integral(seq: CuttingSequence, T: float) -> float:
    """Integral over [0, T] of ln q / l along the flow.

    Between consecutive crossings the integrand is constant: l is the
    gap length and q the entry crossing's branching parameter. The
    sequence must contain a crossing at or before 0 and one beyond T.
    """
    times = seq.times()
    if len(times) < 2 or times[0] > 0.0 or times[-1] < T:
        raise ValueError("cutting sequence does not bracket [0, T]")
    total = 0.0
    for i in range(len(times) - 1):
        lo, hi = times[i], times[i + 1]
        overlap = min(hi, T) - max(lo, 0.0)
        if overlap > 0.0:
            q = seq.crossings[i].thickness_q
            total += math.log(q) / (hi - lo) * overlap
    return total


@dataclass(frozen=True)
class EntropyEstimate:
    """An entropy value with an error bar and provenance."""

    value: float
    err: float
    method: str
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class UlamModel:
    """Discretized cross-section return map.

    States index (edge, u-cell, theta-cell) triples, restricted to the
    largest strongly connected component of the observed transition
    graph. src/dst/mass/mean_L are parallel arrays of the observed
    transitions; mass is the empirical transition probability (rows sum
    to one) and is kept for diagnostics, while the pressure matrix uses
    only the transition indicator.
    """

    p: int
    m: int
    q: tuple
    n_u: int
    n_theta: int
    k: int
    seed: int
    states: np.ndarray       # (n_states, 3) int: edge, u-cell, theta-cell
    src: np.ndarray
    dst: np.ndarray
    mass: np.ndarray
    mean_L: np.ndarray
    diagnostics: dict

    @property
    def n_states(self) -> int:
        return self.states.shape[0]

    def q_of_state(self, idx: np.ndarray) -> np.ndarray:
        qarr = np.asarray(self.q, dtype=float)
        return qarr[self.states[idx, 0]]

    def to_json(self) -> str:
        doc = {
            "format": _MODEL_FORMAT,
            "polygon": {"p": self.p, "m": self.m, "q": list(self.q)},
            "grid": {"n_u": self.n_u, "n_theta": self.n_theta, "k": self.k},
            "seed": self.seed,
            "states": self.states.tolist(),
            "transitions": {
                "src": self.src.tolist(),
                "dst": self.dst.tolist(),
                "mass": self.mass.tolist(),
                "mean_L": self.mean_L.tolist(),
            },
            "diagnostics": self.diagnostics,
        }
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str) -> "UlamModel":
        doc = json.loads(text)
        if doc.get("format") != _MODEL_FORMAT:
            raise ValueError(f"unsupported model format {doc.get('format')!r}")
        tr = doc["transitions"]
        return UlamModel(
            p=doc["polygon"]["p"], m=doc["polygon"]["m"],
            q=tuple(doc["polygon"]["q"]),
            n_u=doc["grid"]["n_u"], n_theta=doc["grid"]["n_theta"],
            k=doc["grid"]["k"], seed=doc["seed"],
            states=np.asarray(doc["states"], dtype=np.int64),
            src=np.asarray(tr["src"], dtype=np.int64),
            dst=np.asarray(tr["dst"], dtype=np.int64),
            mass=np.asarray(tr["mass"], dtype=float),
            mean_L=np.asarray(tr["mean_L"], dtype=float),
            diagnostics=doc["diagnostics"],
        )


_MAX_RETRIES = 8


def build_cross_section(poly: CoxeterPolygon, grid: tuple, K: int,
                        seed: int, reverse: bool = False) -> UlamModel:
    """Discretize the wall-crossing return map on an (N_u, N_theta) grid.

    Each cell launches K^2 stratified sample vectors from its wall and
    flows them to the next crossing; each sample deposits mass 1/K^2
    into its landing cell along with the flight length. Samples flagged
    as vertex-grazing are redrawn from the cell's own substream a
    bounded number of times, then discarded with the cell mass
    renormalized. With reverse=True the mirrored flow (incidence angle
    theta -> pi - theta at launch and landing) is discretized instead;
    it traverses the same geodesics backward, so return-length
    statistics must match the forward model within sampling error.
    """
    n_u, n_th = grid
    if n_u < 4 or n_th < 4:
        raise ValueError("need N_u, N_theta >= 4")
    if K < 1:
        raise ValueError("need K >= 1")
    table = WallTable.from_polygon(poly)
    p = table.cx.shape[0]
    ell = table.edge_length
    n_states = p * n_u * n_th
    per_cell = K * K

    def draw(cell: int, rng: np.random.Generator, which: np.ndarray):
        # stratified offsets for the requested sample slots of one cell
        e = cell // (n_u * n_th)
        iu = (cell // n_th) % n_u
        ith = cell % n_th
        su = (which // K + rng.random(which.shape[0])) / K
        st = (which % K + rng.random(which.shape[0])) / K
        u = (iu + su) / n_u * ell
        th = (ith + st) / n_th * math.pi
        return np.full(which.shape[0], e), u, th

    edges = np.empty(n_states * per_cell, dtype=np.int64)
    us = np.empty(n_states * per_cell)
    ths = np.empty(n_states * per_cell)
    rngs = []
    slots = np.arange(per_cell)
    for cell in range(n_states):
        rng = np.random.default_rng((seed, cell))
        rngs.append(rng)
        lo = cell * per_cell
        e, u, th = draw(cell, rng, slots)
        edges[lo:lo + per_cell] = e
        us[lo:lo + per_cell] = u
        ths[lo:lo + per_cell] = th

    def flow(edges, us, ths):
        th_launch = math.pi - ths if reverse else ths
        x, y, dx, dy = launch(table, edges, us, th_launch)
        j, t, u2, th2, flag = batch_first_crossing(table, x, y, dx, dy,
                                                   prev=edges)
        if reverse:
            th2 = math.pi - th2
        return j, t, u2, th2, flag

    j, t, u2, th2, flag = flow(edges, us, ths)
    discarded = 0
    for _ in range(_MAX_RETRIES):
        bad = np.nonzero(flag != OK)[0]
        if bad.size == 0:
            break
        # redraw each bad sample from its cell substream, then reflow
        for i in bad:
            cell = int(i) // per_cell
            e, u, th = draw(cell, rngs[cell], np.array([int(i) % per_cell]))
            edges[i], us[i], ths[i] = e[0], u[0], th[0]
        jj, tt, uu, tthh, ff = flow(edges[bad], us[bad], ths[bad])
        j[bad], t[bad], u2[bad], th2[bad], flag[bad] = jj, tt, uu, tthh, ff
    still_bad = flag != OK
    discarded = int(still_bad.sum())
    good = ~still_bad

    src_cell = np.arange(n_states).repeat(per_cell)[good]
    iu2 = np.clip((u2[good] / ell * n_u).astype(np.int64), 0, n_u - 1)
    ith2 = np.clip((th2[good] / math.pi * n_th).astype(np.int64), 0, n_th - 1)
    dst_cell = j[good] * (n_u * n_th) + iu2 * n_th + ith2
    lengths = t[good]

    # accumulate (src, dst) -> (count, total length)
    key = src_cell * n_states + dst_cell
    uniq, inv = np.unique(key, return_inverse=True)
    cnt = np.bincount(inv).astype(float)
    tot_L = np.bincount(inv, weights=lengths)
    tr_src = (uniq // n_states).astype(np.int64)
    tr_dst = (uniq % n_states).astype(np.int64)
    mean_L = tot_L / cnt
    out_per_src = np.bincount(tr_src, weights=cnt, minlength=n_states)
    mass = cnt / out_per_src[tr_src]

    # restrict to the largest strongly connected component
    adj = sp.csr_matrix((np.ones_like(cnt), (tr_src, tr_dst)),
                        shape=(n_states, n_states))
    n_comp, labels = connected_components(adj, directed=True,
                                          connection="strong")
    sizes = np.bincount(labels, minlength=n_comp)
    big = int(np.argmax(sizes))
    keep_state = labels == big
    if sizes[big] < 2:
        raise NotIrreducible("no nontrivial strongly connected component")
    new_index = -np.ones(n_states, dtype=np.int64)
    new_index[keep_state] = np.arange(int(sizes[big]))
    keep_tr = keep_state[tr_src] & keep_state[tr_dst]
    tr_src2 = new_index[tr_src[keep_tr]]
    tr_dst2 = new_index[tr_dst[keep_tr]]
    mass2 = mass[keep_tr]
    # renormalize rows after dropping transitions leaving the component
    row_mass = np.bincount(tr_src2, weights=mass2, minlength=int(sizes[big]))
    mass2 = mass2 / row_mass[tr_src2]

    state_ids = np.nonzero(keep_state)[0]
    states = np.column_stack([state_ids // (n_u * n_th),
                              (state_ids // n_th) % n_u,
                              state_ids % n_th])
    diagnostics = {
        "discarded_samples": discarded,
        "total_samples": int(n_states * per_cell),
        "scc_states": int(sizes[big]),
        "grid_states": int(n_states),
        "n_components": int(n_comp),
        "reverse": bool(reverse),
    }
    return UlamModel(
        p=p, m=poly.m, q=tuple(int(v) for v in poly.q),
        n_u=n_u, n_theta=n_th, k=K, seed=seed,
        states=states, src=tr_src2, dst=tr_dst2,
        mass=mass2, mean_L=mean_L[keep_tr], diagnostics=diagnostics)


def _pressure_matrix(model: UlamModel, h: float) -> sp.csr_matrix:
    q_dst = model.q_of_state(model.dst)
    data = model.mass * q_dst * np.exp((1.0 - h) * model.mean_L)
    n = model.n_states
    return sp.csr_matrix((data, (model.src, model.dst)), shape=(n, n))


def pressure_log_radius(model: UlamModel, h: float,
                        max_iter: int = 20000) -> float:
    """ln spectral radius of the weighted transition matrix at h.

    Strictly decreasing in h; its root is the entropy estimate. Power
    iteration with a geometric mean of two successive growth ratios,
    which stays stable when the transition graph is nearly periodic.
    """
    if model.n_states == 0:
        raise NotIrreducible("empty model")
    B = _pressure_matrix(model, h)
    n = model.n_states
    v = np.full(n, 1.0 / math.sqrt(n))
    prev_ratio = None
    for _ in range(max_iter):
        w = B @ v
        r1 = float(np.linalg.norm(w))
        if r1 == 0.0:
            raise NotIrreducible("transition matrix has a dead row block")
        w /= r1
        w2 = B @ w
        r2 = float(np.linalg.norm(w2))
        v = w2 / r2
        ratio = math.sqrt(r1 * r2)
        if prev_ratio is not None and abs(ratio - prev_ratio) <= EPS_POWER * ratio:
            return math.log(ratio)
        prev_ratio = ratio
    raise PowerIterationStalled(
        f"spectral radius iteration did not converge in {max_iter} steps")


def pressure_curve(model: UlamModel, h_values) -> list:
    """[(h, pressure_log_radius)] rows, for CSV export."""
    return [(float(h), pressure_log_radius(model, float(h)))
            for h in h_values]


def _solve_root(model: UlamModel, bracket: tuple, tol: float) -> tuple:
    h_lo, h_hi = bracket
    if h_lo < 0.0:
        h_lo = 0.0
    p_lo = pressure_log_radius(model, h_lo)
    if p_lo <= 0.0:
        raise BracketFailed(f"pressure at h_lo={h_lo} is {p_lo:.3g} <= 0")
    p_hi = pressure_log_radius(model, h_hi)
    widened = 0
    while p_hi > 0.0:
        if h_hi >= 50.0:
            raise BracketFailed("pressure still positive at h = 50")
        h_hi = min(2.0 * h_hi, 50.0)
        p_hi = pressure_log_radius(model, h_hi)
        widened += 1
    # single sign change check on a uniform probe grid
    probes = np.linspace(h_lo, h_hi, 10)[1:-1]
    vals = [pressure_log_radius(model, float(h)) for h in probes]
    signs = [p_lo > 0.0] + [v > 0.0 for v in vals] + [p_hi > 0.0]
    changes = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    if changes != 1:
        raise BracketFailed(f"{changes} sign changes on the probe grid")
    iters = 0
    while h_hi - h_lo > tol:
        mid = 0.5 * (h_lo + h_hi)
        if pressure_log_radius(model, mid) > 0.0:
            h_lo = mid
        else:
            h_hi = mid
        iters += 1
    return 0.5 * (h_lo + h_hi), iters, widened


def solve_entropy(model: UlamModel, bracket: tuple = (0.5, 4.0),
                  tol: float = DEFAULT_H_TOL,
                  refine: bool = True) -> EntropyEstimate:
    """Entropy as the root of the pressure log radius, by bisection.

    With refine=True a second model on the doubled grid is built and
    solved, and the difference enters the error bar as the dominant
    discretization term.
    """
    h, iters, widened = _solve_root(model, bracket, tol)
    err = tol
    diagnostics = {"bisection_iters": iters, "bracket_widened": widened,
                   "grid": [model.n_u, model.n_theta], "k": model.k,
                   "seed": model.seed}
    if refine:
        from .hypgeom import regular_polygon
        poly = regular_polygon(model.p, model.m, model.q)
        fine = build_cross_section(poly, (2 * model.n_u, 2 * model.n_theta),
                                   model.k, model.seed)
        h_fine, _, _ = _solve_root(fine, bracket, tol)
        err = tol + abs(h_fine - h)
        diagnostics["h_refined"] = h_fine
    return EntropyEstimate(value=h, err=err, method="ulam_pressure",
                           diagnostics=diagnostics)
