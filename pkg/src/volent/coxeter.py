"""Chamber enumeration for the reflection group of a Coxeter polygon.

Chambers of the tessellation are in bijection with group elements; we
enumerate them breadth first, multiplying generators on the right.
Deduplication keys on the chamber center mapped to the unit disk, where
coordinates stay bounded: distinct chamber centers are at hyperbolic
distance >= 2 * inradius, which keeps their disk images separated by far
more than the quantization step out to any radius reachable here.

Each chamber also carries a weight, the product of the branching
parameters q_i over the letters of the word that reaches it. Summing
these weights over a ball gives the ball volume upstairs in the building
rather than in the bare tessellation, and the exponential growth rate of
that sum is the quantity the spectral solver must reproduce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .constants import CHAMBER_CAP
from .errors import FrontierTooClose, ResourceLimit, WindowTooNarrow
from .hypgeom import CoxeterPolygon, reflect

# Dedup quantization step for disk coordinates of chamber centers.
_DEDUP_STEP = 1e-8


@dataclass(frozen=True)
class ChamberSet:
    """Result of a breadth-first chamber enumeration.

    centers are upper half-plane points as complex numbers; radii are
    hyperbolic distances from the base chamber center; log_mult is the
    log of the branching weight (0 everywhere when q is identically 1).
    reach is the radius up to which the enumeration is guaranteed
    complete: every chamber whose center lies within reach is present.
    """

    matrices: np.ndarray
    reversing: np.ndarray
    centers: np.ndarray
    radii: np.ndarray
    depths: np.ndarray
    log_mult: np.ndarray
    reach: float
    diameter: float

    def __len__(self) -> int:
        return self.centers.shape[0]


@dataclass(frozen=True)
class GrowthTable:
    """Cumulative weighted chamber counts on a grid of radii."""

    radii: np.ndarray
    log_weight: np.ndarray


def _apply_centers(mats: np.ndarray, rev: np.ndarray, z0: complex) -> np.ndarray:
    zin = np.where(rev, np.conjugate(z0), z0)
    a = mats[:, 0, 0]
    b = mats[:, 0, 1]
    c = mats[:, 1, 0]
    d = mats[:, 1, 1]
    return (a * zin + b) / (c * zin + d)


def _hyp_dist(z: np.ndarray, w: complex) -> np.ndarray:
    num = np.abs(z - w) ** 2
    return np.arccosh(1.0 + num / (2.0 * z.imag * w.imag))


def enumerate_chambers(poly: CoxeterPolygon,
                       radius_cut: float | None = None,
                       max_depth: int | None = None,
                       cap: int = CHAMBER_CAP) -> ChamberSet:
    """Breadth-first enumeration of chambers around the base chamber.

    Exactly one of radius_cut and max_depth must be given. With a
    radius_cut, children whose centers land beyond the cut are pruned
    and the set is complete out to reach = radius_cut - diameter (any
    missing chamber is linked to the base by a gallery of chambers whose
    centers all stay within one diameter of the connecting geodesic).
    """
    if (radius_cut is None) == (max_depth is None):
        raise ValueError("give exactly one of radius_cut, max_depth")

    gens = [reflect(e.geodesic) for e in poly.edges]
    gen_mats = np.stack([g.m for g in gens])
    logq = np.log(np.asarray(poly.q, dtype=float))
    z0 = complex(poly.center.x, poly.center.y)
    p = len(gens)

    mats = [np.eye(2)[None, :, :]]
    rev = [np.zeros(1, dtype=bool)]
    centers = [np.array([z0])]
    radii = [np.zeros(1)]
    depths = [np.zeros(1, dtype=np.int64)]
    logm = [np.zeros(1)]

    # Buckets map quantized disk coordinates to global chamber indices.
    buckets: dict[tuple[int, int], list[int]] = {(0, 0): [0]}
    total = 1

    def disk(z: np.ndarray) -> np.ndarray:
        return (z - z0) / (z - np.conjugate(z0))

    level_mats = mats[0]
    level_rev = rev[0]
    level_logm = logm[0]
    depth = 0
    sep = poly.inradius

    while level_mats.shape[0] > 0:
        if max_depth is not None and depth >= max_depth:
            break
        depth += 1
        # All children of the current level, one generator at a time.
        cand_m = np.concatenate([level_mats @ gen_mats[i] for i in range(p)])
        cand_rev = np.concatenate([~level_rev for _ in range(p)])
        cand_logm = np.concatenate([level_logm + logq[i] for i in range(p)])
        cand_z = _apply_centers(cand_m, cand_rev, z0)
        cand_r = _hyp_dist(cand_z, z0)
        if radius_cut is not None:
            keep = cand_r <= radius_cut
            cand_m = cand_m[keep]
            cand_rev = cand_rev[keep]
            cand_logm = cand_logm[keep]
            cand_z = cand_z[keep]
            cand_r = cand_r[keep]

        w = disk(cand_z)
        kx = np.round(w.real / _DEDUP_STEP).astype(np.int64)
        ky = np.round(w.imag / _DEDUP_STEP).astype(np.int64)

        all_centers = np.concatenate(centers)
        new_idx = []
        for n in range(cand_z.shape[0]):
            zi = cand_z[n]
            dup = False
            for ox in (-1, 0, 1):
                for oy in (-1, 0, 1):
                    for gi in buckets.get((kx[n] + ox, ky[n] + oy), ()):
                        zc = (all_centers[gi] if gi < all_centers.shape[0]
                              else cand_z[new_idx[gi - all_centers.shape[0]]])
                        d2 = abs(zi - zc) ** 2 / (2.0 * zi.imag * zc.imag)
                        if d2 < math.cosh(sep) - 1.0:
                            dup = True
                            break
                    if dup:
                        break
                if dup:
                    break
            if not dup:
                gi = total + len(new_idx)
                buckets.setdefault((int(kx[n]), int(ky[n])), []).append(gi)
                new_idx.append(n)
        if total - 1 + len(new_idx) + 1 > cap:
            raise ResourceLimit(
                f"chamber enumeration exceeded cap={cap} at depth {depth}")
        sel = np.asarray(new_idx, dtype=np.int64)
        level_mats = cand_m[sel]
        level_rev = cand_rev[sel]
        level_logm = cand_logm[sel]
        mats.append(level_mats)
        rev.append(level_rev)
        centers.append(cand_z[sel])
        radii.append(cand_r[sel])
        depths.append(np.full(sel.shape[0], depth, dtype=np.int64))
        logm.append(level_logm)
        total += sel.shape[0]

    all_r = np.concatenate(radii)
    all_d = np.concatenate(depths)
    if radius_cut is not None:
        reach = radius_cut - poly.diameter
    else:
        frontier = all_r[all_d == all_d.max()]
        reach = (float(frontier.min()) - poly.diameter
                 if frontier.size else float(all_r.max()))
    return ChamberSet(
        matrices=np.concatenate(mats),
        reversing=np.concatenate(rev),
        centers=np.concatenate(centers),
        radii=all_r,
        depths=all_d,
        log_mult=np.concatenate(logm),
        reach=reach,
        diameter=poly.diameter,
    )


def weighted_ball_growth(chambers: ChamberSet,
                         r_min: float,
                         r_max: float,
                         n_rows: int = 24) -> GrowthTable:
    """Cumulative weighted chamber count on a uniform radius grid.

    Raises FrontierTooClose when the enumeration cannot certify
    completeness out to r_max.
    """
    if r_max > chambers.reach:
        raise FrontierTooClose(
            f"r_max={r_max:.3f} exceeds certified reach {chambers.reach:.3f}")
    if not (0.0 < r_min < r_max):
        raise ValueError("need 0 < r_min < r_max")
    grid = np.linspace(r_min, r_max, n_rows)
    order = np.argsort(chambers.radii)
    r_sorted = chambers.radii[order]
    lm_sorted = chambers.log_mult[order]
    counts = np.searchsorted(r_sorted, grid, side="right")
    logw = np.array([logsumexp(lm_sorted[:c]) for c in counts])
    return GrowthTable(radii=grid, log_weight=logw)


def growth_slope(table: GrowthTable, diameter: float) -> tuple[float, float]:
    """Least-squares slope of log ball weight against radius.

    Returns (slope, err). The error combines the regression standard
    error with a systematic term diameter / window width, since the ball
    count is only determined up to boundary layers one diameter thick.
    """
    r = table.radii
    lw = table.log_weight
    if r.shape[0] < 3:
        raise WindowTooNarrow("need at least 3 growth rows")
    width = float(r[-1] - r[0])
    if width <= 0:
        raise WindowTooNarrow("zero-width radius window")
    coef, residuals, *_ = np.polyfit(r, lw, 1, full=True)
    slope = float(coef[0])
    dof = r.shape[0] - 2
    if dof > 0 and residuals.size:
        s2 = float(residuals[0]) / dof
        stderr = math.sqrt(s2 / float(np.sum((r - r.mean()) ** 2)))
    else:
        stderr = 0.0
    return slope, stderr + diameter / width
