"""Upper half-plane geometry: points, isometries, geodesics, Coxeter polygons.

All geodesics of the model are half-circles centered on the real axis or
vertical lines; isometries are 2x2 real matrices acting by Mobius
transformations (on the conjugate coordinate when orientation-reversing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import EPS_CONSTRUCT, EPS_GEOM
from .errors import BadThickness, NonHyperbolic


class _Infinity:
    """Tagged boundary point at infinity (not a float sentinel)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"


INF = _Infinity()


@dataclass(frozen=True)
class HPoint:
    """Point of the upper half-plane (y > 0)."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"HPoint requires y > 0, got y={self.y}")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @staticmethod
    def from_complex(z: complex) -> "HPoint":
        return HPoint(z.real, z.imag)


def dist(a: HPoint, b: HPoint) -> float:
    """Hyperbolic distance between two points."""
    dz2 = (a.x - b.x) ** 2 + (a.y - b.y) ** 2
    return math.acosh(1.0 + dz2 / (2.0 * a.y * b.y))


@dataclass(frozen=True)
class HIsometry:
    """Isometry of the half-plane: z -> (az+b)/(cz+d), applied to conj(z)
    when orientation-reversing. Matrix is normalized to |det| = 1."""

    m: np.ndarray
    reversing: bool = False

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) < 1e-300:
            raise ValueError("singular matrix")
        m = m / math.sqrt(abs(det))
        if m[0, 0] < 0 or (m[0, 0] == 0 and m[1, 0] < 0):
            m = -m
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @property
    def orientation(self) -> str:
        return "reversing" if self.reversing else "preserving"

    @staticmethod
    def identity() -> "HIsometry":
        return HIsometry(np.eye(2))

    def apply_complex(self, z: complex) -> complex:
        if self.reversing:
            z = z.conjugate()
        a, b, c, d = self.m.ravel()
        return (a * z + b) / (c * z + d)

    def apply(self, p: HPoint) -> HPoint:
        return HPoint.from_complex(self.apply_complex(p.z))

    def compose(self, other: "HIsometry") -> "HIsometry":
        """self after other: (self @ other)(z) = self(other(z))."""
        m2 = other.m.conj() if self.reversing else other.m  # real: conj is id
        return HIsometry(self.m @ m2, self.reversing ^ other.reversing)

    def __matmul__(self, other: "HIsometry") -> "HIsometry":
        return self.compose(other)

    def inverse(self) -> "HIsometry":
        a, b, c, d = self.m.ravel()
        inv = np.array([[d, -b], [-c, a]])
        return HIsometry(inv, self.reversing)


@dataclass(frozen=True)
class HGeodesic:
    """Complete geodesic with ordered ideal endpoints, a basepoint on it,
    and a direction sign (+1 means flowing from endpoints[0] toward
    endpoints[1])."""

    endpoints: tuple  # (float | INF, float | INF), distinct
    basepoint: HPoint
    direction: int = 1

    def __post_init__(self):
        e0, e1 = self.endpoints
        if e0 is e1 or (e0 is not INF and e1 is not INF and e0 == e1):
            raise ValueError("geodesic endpoints must be distinct")
        if self.direction not in (-1, 1):
            raise ValueError("direction must be +1 or -1")
        if self._off_curve() > EPS_GEOM:
            raise ValueError("basepoint does not lie on the geodesic")

    def _off_curve(self) -> float:
        e0, e1 = self.endpoints
        p = self.basepoint
        if e0 is INF or e1 is INF:
            x0 = e1 if e0 is INF else e0
            return abs(p.x - x0)
        c = 0.5 * (e0 + e1)
        r = 0.5 * abs(e1 - e0)
        return abs(math.hypot(p.x - c, p.y) - r)

    @property
    def is_vertical(self) -> bool:
        e0, e1 = self.endpoints
        return e0 is INF or e1 is INF

    @property
    def center_radius(self) -> tuple:
        """(center, radius) of the half-circle; raises for vertical lines."""
        e0, e1 = self.endpoints
        if self.is_vertical:
            raise ValueError("vertical geodesic has no circle form")
        return 0.5 * (e0 + e1), 0.5 * abs(e1 - e0)

    def tangent_at_basepoint(self) -> tuple:
        """Unit Euclidean tangent of the flow direction at the basepoint."""
        e0, e1 = self.endpoints
        p = self.basepoint
        if self.is_vertical:
            up = 1.0 if e1 is INF else -1.0
            s = up * self.direction
            return (0.0, s)
        c, r = self.center_radius
        # Increasing-psi tangent; psi decreases when flowing toward a larger
        # real endpoint.
        tx, ty = -p.y / r, (p.x - c) / r
        toward = e1 if self.direction == 1 else e0
        sgn = 1.0 if toward < c else -1.0
        return (sgn * tx, sgn * ty)


def geodesic_through(a: HPoint, b: HPoint, basepoint: HPoint | None = None) -> HGeodesic:
    """The geodesic through two distinct points, oriented from a toward b."""
    bp = basepoint if basepoint is not None else a
    if abs(a.x - b.x) < EPS_GEOM * max(1.0, abs(a.x), abs(b.x)):
        endpoints = (a.x, INF) if b.y > a.y else (INF, a.x)
        return HGeodesic(endpoints, bp)
    c = (a.x**2 + a.y**2 - b.x**2 - b.y**2) / (2.0 * (a.x - b.x))
    r = math.hypot(a.x - c, a.y)
    psi_a = math.atan2(a.y, a.x - c)
    psi_b = math.atan2(b.y, b.x - c)
    # psi decreases toward the endpoint c + r.
    if psi_b < psi_a:
        endpoints = (c - r, c + r)
    else:
        endpoints = (c + r, c - r)
    return HGeodesic(endpoints, bp)


def reflect(edge: HGeodesic) -> HIsometry:
    """Reflection of the plane across the given geodesic."""
    if edge.is_vertical:
        e0, e1 = edge.endpoints
        c = e1 if e0 is INF else e0
        return HIsometry(np.array([[-1.0, 2.0 * c], [0.0, 1.0]]), reversing=True)
    c, r = edge.center_radius
    # z -> c + r^2/(conj(z) - c), i.e. inversion in the circle.
    return HIsometry(np.array([[c, r * r - c * c], [1.0, -c]]), reversing=True)


def _cayley_to_uhp(w: complex) -> complex:
    """Poincare disk -> upper half-plane, 0 -> i."""
    return 1j * (1.0 + w) / (1.0 - w)


@dataclass(frozen=True)
class Edge:
    """Realized polygon edge: segment of a wall geodesic.

    s parametrizes arclength along the wall via s = log tan(psi/2) where
    psi is the angle on the circle (center cx, radius r); the segment is
    s in [s_lo, s_hi] and its length is s_hi - s_lo.
    """

    geodesic: HGeodesic
    a: HPoint
    b: HPoint
    cx: float
    r: float
    s_lo: float
    s_hi: float
    n_sign: float  # inward normal = n_sign * radial direction

    @property
    def length(self) -> float:
        return self.s_hi - self.s_lo


@dataclass(frozen=True)
class CoxeterPolygon:
    """Regular hyperbolic polygon with p edges, interior angles pi/m, and a
    per-edge branching parameter q_i (each wall of the building carries
    q_i + 1 chambers)."""

    p: int
    m: int
    q: tuple
    vertices: tuple = field(repr=False)
    edges: tuple = field(repr=False)
    area: float
    edge_length: float
    inradius: float
    circumradius: float
    center: HPoint = field(repr=False)

    @property
    def diameter(self) -> float:
        return 2.0 * self.circumradius

    @property
    def thickness(self) -> tuple:
        return tuple(qi + 1 for qi in self.q)

    def side(self, i: int, pt: HPoint) -> float:
        """Signed interior-side indicator for wall i (positive inside)."""
        e = self.edges[i]
        d = math.hypot(pt.x - e.cx, pt.y) - e.r
        return e.n_sign * d

    def contains(self, pt: HPoint, slack: float = 0.0) -> bool:
        """True if the point lies on the polygon side of every wall."""
        return all(self.side(i, pt) >= -slack for i in range(self.p))


def _interior_angle(e1: Edge, e2: Edge, v: HPoint) -> float:
    """Angle between two wall circles at a shared vertex."""

    def tangent(e: Edge) -> tuple:
        tx, ty = -v.y / e.r, (v.x - e.cx) / e.r
        return tx, ty

    t1 = tangent(e1)
    t2 = tangent(e2)
    dot = t1[0] * t2[0] + t1[1] * t2[1]
    ang = math.acos(max(-1.0, min(1.0, abs(dot))))
    return ang


def regular_polygon(p: int, m: int, q) -> CoxeterPolygon:
    """Construct the regular p-gon with interior angles pi/m, centered at i,
    carrying per-edge branching parameters q (length-p list of ints >= 1).

    Raises NonHyperbolic unless m(p-2) > p, BadThickness for bad q.
    """
    if p < 3 or m < 2:
        raise NonHyperbolic(f"need p >= 3 and m >= 2, got p={p}, m={m}")
    if m * (p - 2) <= p:
        raise NonHyperbolic(
            f"angle condition m(p-2) > p fails for p={p}, m={m}: polygon is not hyperbolic"
        )
    q = tuple(int(v) for v in q)
    if len(q) != p:
        raise BadThickness(f"expected {p} thickness parameters, got {len(q)}")
    if any(v < 1 for v in q):
        raise BadThickness(f"all q_i must be >= 1, got {q}")

    A = math.pi / p          # central half-angle
    B = math.pi / (2 * m)    # half interior angle
    circum = math.acosh(1.0 / (math.tan(A) * math.tan(B)))
    inr = math.acosh(math.cos(B) / math.sin(A))
    half_edge = math.acosh(math.cos(A) / math.sin(B))
    edge_len = 2.0 * half_edge
    area = (p - 2) * math.pi - p * math.pi / m

    # Realize in the disk, then map to the half-plane. The rotation offset
    # is chosen so no wall becomes a vertical line in the half-plane.
    rho_e = math.tanh(circum / 2.0)
    offset = 0.37
    for _attempt in range(8):
        verts_c = [
            _cayley_to_uhp(rho_e * complex(math.cos(2 * math.pi * k / p + offset),
                                           math.sin(2 * math.pi * k / p + offset)))
            for k in range(p)
        ]
        ok = all(
            abs(verts_c[k].real - verts_c[(k + 1) % p].real) > 1e-6
            for k in range(p)
        )
        if ok:
            break
        offset += 0.11
    else:
        raise NonHyperbolic("could not realize polygon without vertical walls")

    vertices = tuple(HPoint.from_complex(z) for z in verts_c)
    center = HPoint(0.0, 1.0)

    edges = []
    for k in range(p):
        va, vb = vertices[k], vertices[(k + 1) % p]
        cx = (va.x**2 + va.y**2 - vb.x**2 - vb.y**2) / (2.0 * (va.x - vb.x))
        r = math.hypot(va.x - cx, va.y)
        psi_a = math.atan2(va.y, va.x - cx)
        psi_b = math.atan2(vb.y, vb.x - cx)
        s_a = math.log(math.tan(psi_a / 2.0))
        s_b = math.log(math.tan(psi_b / 2.0))
        s_lo, s_hi = (s_a, s_b) if s_a < s_b else (s_b, s_a)
        # Inward normal sign: radial direction at the midpoint points toward
        # the polygon center iff interior is outside the circle.
        dc = math.hypot(center.x - cx, center.y) - r
        n_sign = 1.0 if dc > 0 else -1.0
        geod = geodesic_through(va, vb)
        edges.append(Edge(geod, va, vb, cx, r, s_lo, s_hi, n_sign))
    edges = tuple(edges)

    # Construction-time checks: measured edge lengths and angles must match
    # the closed-form values, catching any trig-convention slip.
    for k, e in enumerate(edges):
        measured = dist(e.a, e.b)
        if abs(measured - edge_len) > EPS_CONSTRUCT * max(1.0, edge_len):
            raise NonHyperbolic(
                f"edge {k} length {measured} != expected {edge_len}"
            )
        if abs(e.length - edge_len) > EPS_CONSTRUCT * max(1.0, edge_len):
            raise NonHyperbolic(
                f"edge {k} wall-parameter length {e.length} != expected {edge_len}"
            )
    for k in range(p):
        ang = _interior_angle(edges[k - 1], edges[k], vertices[k])
        if abs(ang - math.pi / m) > EPS_CONSTRUCT:
            raise NonHyperbolic(
                f"vertex {k} interior angle {ang} != pi/{m}"
            )

    return CoxeterPolygon(
        p=p,
        m=m,
        q=q,
        vertices=vertices,
        edges=edges,
        area=area,
        edge_length=edge_len,
        inradius=inr,
        circumradius=circum,
        center=center,
    )
