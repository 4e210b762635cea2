"""Non-rigorous float reconnaissance: rotation fields, candidate box pairs
and visit-orbit search.

Everything here runs in plain binary64 and exists solely to propose inputs
for the rigorous certifier; deleting this module cannot change any verdict
(the certifier does not import it).  All sampling is driven by an explicit
seed recorded in the outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter
from .interval import Box2
from .maps import LiftedAnnulusMap


@dataclass(frozen=True)
class ExploreParams:
    eps: float | None = None          # near-return tolerance; default 0.05*L
    box_scale: float | None = None    # candidate box side; default 0.06*L
    clearance: float = 0.0            # minimum clearance for visit hits
    max_m: int = 60
    samples: int = 256
    seed: int = 0


@dataclass(frozen=True)
class RotationField:
    """Per-grid-point rotation estimates: lifted x-displacement per iterate
    in circumference units, with a recorded (not assumed) deviation bound."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray        # shape (len(ys), len(xs))
    deviations: np.ndarray    # max |x_k - x_0 - k*L*estimate| / (N*L)
    iterates: int
    escaped: np.ndarray       # bool mask: orbit left the y bounds

    def estimate_at(self, x: float, y: float) -> float:
        i = int(np.argmin(np.abs(self.ys - y)))
        j = int(np.argmin(np.abs(self.xs - x)))
        return float(self.values[i, j])


@dataclass(frozen=True)
class CandidatePair:
    U0: Box2
    U1: Box2
    n: int
    predicted_rho: int
    k0: int
    k1: int
    seeds_01: tuple[tuple[tuple[float, float], int], ...]
    seeds_10: tuple[tuple[tuple[float, float], int], ...]
    robustness: float
    seed: int

    def flagged(self) -> bool:
        """True when visit seeds are missing in at least one direction."""
        return not (self.seeds_01 and self.seeds_10)


def estimate_rotation(m: LiftedAnnulusMap, point: tuple[float, float], N: int,
                      y_bound: float = 1e6) -> float:
    """(pr1(F^N(x)) - pr1(x)) / N in circumference units."""
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    pts = np.array([point], dtype=float)
    cur = pts
    for _ in range(N):
        cur = m.points_image(cur, 1)
        if abs(cur[0, 1]) > y_bound:
            raise OrbitEscaped(f"|y| exceeded {y_bound} during estimation")
    return float((cur[0, 0] - pts[0, 0]) / (N * m.circ_float))


class OrbitEscaped(InvalidParameter):
    pass


def rotation_field(m: LiftedAnnulusMap, y_lo: float, y_hi: float,
                   nx: int = 32, ny: int = 32, iterates: int = 60,
                   y_bound: float = 1e6) -> RotationField:
    """Rotation estimates over a grid on [0, L) x [y_lo, y_hi]."""
    L = m.circ_float
    xs = np.linspace(0.0, L, nx, endpoint=False)
    ys = np.linspace(y_lo, y_hi, ny)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    cur = pts.copy()
    dev = np.zeros(len(pts))
    escaped = np.zeros(len(pts), dtype=bool)
    traj = [cur[:, 0].copy()]
    for k in range(iterates):
        cur = m.points_image(cur, 1)
        escaped |= np.abs(cur[:, 1]) > y_bound
        traj.append(cur[:, 0].copy())
    disp = (cur[:, 0] - pts[:, 0]) / (iterates * L)
    xs_all = np.stack(traj, axis=0)
    ks = np.arange(iterates + 1)[:, None]
    resid = np.abs(xs_all - xs_all[0] - ks * disp[None, :] * L)
    dev = resid.max(axis=0) / (iterates * L)
    return RotationField(
        xs=xs, ys=ys,
        values=disp.reshape(ny, nx),
        deviations=dev.reshape(ny, nx),
        iterates=iterates, escaped=escaped.reshape(ny, nx),
    )


def find_visit_orbit(m: LiftedAnnulusMap, source: Box2, target: Box2,
                     max_m: int = 60, samples: int = 256,
                     params: ExploreParams = ExploreParams()) -> list[tuple[tuple[float, float], int]]:
    """Seeds in int(source) whose float orbits enter int(target) within
    max_m iterates, sorted by clearance (descending).  Empty list when
    nothing is found; never a refutation."""
    if samples < 1:
        raise InvalidParameter("samples must be >= 1")
    rng = np.random.default_rng(params.seed)
    L = m.circ_float
    g = max(2, int(math.sqrt(samples / 2)))
    wx, wy = source.x.hi - source.x.lo, source.y.hi - source.y.lo
    gxs = np.linspace(source.x.lo + 0.02 * wx, source.x.hi - 0.02 * wx, g)
    gys = np.linspace(source.y.lo + 0.02 * wy, source.y.hi - 0.02 * wy, g)
    gx, gy = np.meshgrid(gxs, gys)
    pts = np.concatenate([
        np.stack([gx.ravel(), gy.ravel()], axis=1),
        np.stack([rng.uniform(source.x.lo, source.x.hi, samples),
                  rng.uniform(source.y.lo, source.y.hi, samples)], axis=1),
    ], axis=0)
    cur = pts.copy()
    found: list[tuple[float, tuple[float, float], int]] = []
    twid = target.x.hi - target.x.lo
    for mi in range(1, max_m + 1):
        cur = m.points_image(cur, 1)
        dx = (cur[:, 0] - target.x.lo) % L
        cx = np.where(dx <= twid, np.minimum(dx, twid - dx), -1.0)
        cy = np.minimum(cur[:, 1] - target.y.lo, target.y.hi - cur[:, 1])
        cl = np.minimum(cx, cy)
        for idx in np.nonzero(cl > params.clearance)[0]:
            found.append((float(cl[idx]), (float(pts[idx, 0]), float(pts[idx, 1])), mi))
    found.sort(key=lambda t: -t[0])
    return [(pt, mi) for _, pt, mi in found]


def propose_candidates(m: LiftedAnnulusMap, fld: RotationField, rho_min: int,
                       n: int = 1, params: ExploreParams = ExploreParams()) -> list[CandidatePair]:
    """Near-returning grid points paired across distinct self-return
    translates differing by at least rho_min, pre-screened in float for the
    disjointness and strip conditions, with visit seeds attached.  Output
    is sorted by predicted robustness (distance to violating a screened
    condition).  Purely advisory."""
    L = m.circ_float
    eps = params.eps if params.eps is not None else 0.05 * L
    scale = params.box_scale if params.box_scale is not None else 0.06 * L

    gx, gy = np.meshgrid(fld.xs, fld.ys)
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    img = m.points_image(pts, 1)
    delta = img - pts
    k_near = np.round(delta[:, 0] / L)
    dist = np.maximum(np.abs(delta[:, 0] - k_near * L), np.abs(delta[:, 1]))
    near = dist < eps

    returners: list[tuple[float, tuple[float, float], int]] = []
    for idx in np.nonzero(near)[0]:
        returners.append((float(dist[idx]),
                          (float(pts[idx, 0]), float(pts[idx, 1])),
                          int(k_near[idx])))
    returners.sort(key=lambda t: t[0])

    # keep the best returner per (translate k, coarse cell) to avoid duplicates
    best: dict[tuple, tuple[float, tuple[float, float], int]] = {}
    cell = 2.0 * scale
    for d, pt, k in returners:
        key = (k, round(pt[0] / cell), round(pt[1] / cell))
        if key not in best or best[key][0] > d:
            best[key] = (d, pt, k)

    half = scale / 2.0
    cands: list[CandidatePair] = []
    per_k: dict[int, list] = {}
    for entry in sorted(best.values(), key=lambda t: t[0]):
        per_k.setdefault(entry[2], [])
        if len(per_k[entry[2]]) < 6:
            per_k[entry[2]].append(entry)
    chosen = [e for group in per_k.values() for e in group]
    for i in range(len(chosen)):
        for j in range(len(chosen)):
            d0, p0, k0 = chosen[i]
            d1, p1, k1 = chosen[j]
            if k1 - k0 < rho_min:
                continue
            b0 = Box2.around(p0[0], p0[1], half, half)
            b1 = Box2.around(p1[0], p1[1], half, half)
            rob = _screen_pair(m, b0, b1, n, L)
            if rob is None:
                continue
            s01 = tuple(find_visit_orbit(m, b0, b1, params.max_m,
                                         params.samples, params)[:5])
            s10 = tuple(find_visit_orbit(m, b1, b0, params.max_m,
                                         params.samples, params)[:5])
            cands.append(CandidatePair(
                U0=b0, U1=b1, n=n, predicted_rho=k1 - k0, k0=k0, k1=k1,
                seeds_01=s01, seeds_10=s10,
                robustness=rob - 0.5 * (d0 + d1), seed=params.seed,
            ))
    cands.sort(key=lambda c: (-len(c.seeds_01 + c.seeds_10), -c.robustness))
    return cands


def _screen_pair(m: LiftedAnnulusMap, b0: Box2, b1: Box2, n: int, L: float) -> float | None:
    """Float pre-screen of the pair conditions; returns a robustness margin
    or None when a condition is violated outright."""
    samp0 = _boundary_and_grid(b0)
    samp1 = _boundary_and_grid(b1)
    margin = math.inf
    imgs0, imgs1 = samp0, samp1
    span0 = [b0.x.lo, b0.x.hi]
    span1 = [b1.x.lo, b1.x.hi]
    for stage in range(1, n + 1):
        imgs0 = m.points_image(imgs0, 1)
        imgs1 = m.points_image(imgs1, 1)
        gap = _cloud_gap(imgs0, imgs1, L)
        if gap <= 0.0:
            return None
        margin = min(margin, gap)
        # align each stage cloud to the running span center before updating
        # the strip width (mirrors the certifier's translate alignment)
        for im, span in ((imgs0, span0), (imgs1, span1)):
            shift = round((im[:, 0].mean() - 0.5 * (span[0] + span[1])) / L)
            xs = im[:, 0] - shift * L
            span[0] = min(span[0], xs.min())
            span[1] = max(span[1], xs.max())
    # strip condition (float): each aligned union should miss a vertical line
    for span in (span0, span1):
        width = span[1] - span[0]
        if width >= L:
            if width >= 2.0 * L:
                return None
            margin = min(margin, 0.1)
    return margin


def _boundary_and_grid(b: Box2, g: int = 9) -> np.ndarray:
    xs = np.linspace(b.x.lo, b.x.hi, g)
    ys = np.linspace(b.y.lo, b.y.hi, g)
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def _cloud_gap(a: np.ndarray, b: np.ndarray, L: float) -> float:
    """Approximate annulus distance between two point clouds."""
    dx = np.abs((a[:, None, 0] - b[None, :, 0]) % L)
    dx = np.minimum(dx, L - dx)
    dy = np.abs(a[:, None, 1] - b[None, :, 1])
    return float(np.maximum(dx, dy).min())
