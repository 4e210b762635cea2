"""Registry of annulus maps with a uniform lifted-evaluation interface.

Every map is a degree-one lift F of an annulus homeomorphism isotopic to
the identity: F(x + L, y) = F(x, y) + (L, 0).  Equivariance is exact by
construction: inputs are reduced to a canonical representative (x-midpoint
in [0, L)) before evaluation and the recorded integer shift is re-applied
to the output, so translating an input by k circumferences changes output
shifts by exactly k and nothing else.

Backends:

* explicit formulas (standard map, rigid twist) on the unit annulus,
  evaluated directly in interval arithmetic;
* the driven pendulum's time-T (Poincare) map on the L = 2*pi annulus,
  evaluated through the validated integrator in :mod:`chaoscert.flow`.

Each map also exposes a fast non-rigorous float backend (vectorized over
numpy arrays) used by the explorer and for seeding witness searches; float
results never influence verdicts.
"""

from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .errors import BudgetExhausted, InvalidParameter
from .flow import (
    IntegrationSettings,
    VectorFieldSpec,
    flow_span,
    flow_time_T,
    pendulum_field,
    variational_flow_span,
)
from .geometry import EnclosureSet, LiftedBox, reduce_box
from .interval import (
    TWO_PI,
    Box2,
    Interval,
    as_interval,
    div_down,
    div_up,
    iv_sin,
    mul_down,
    mul_up,
)


@dataclass(frozen=True)
class SubdivisionSettings:
    """Budget knobs for rigorous image evaluation.

    target_width: image enclosures wider than this (on either axis and
    per member box) are refined, until the per-stage budget of sub-boxes
    is hit.

    For the ODE backend a whole-period axis-aligned integration of a
    box inflates its width by orders of magnitude beyond the true image
    (wrapping effect), so stage images are computed in flow_segments
    pieces of the period with the running union re-rasterized onto a
    lattice of pitch raster_pitch between segments.  Rasterization is an
    outer covering, so soundness is unaffected; it only caps the growth.
    """

    target_width: float = 0.1
    max_boxes: int = 2 ** 14
    flow_segments: int = 8
    raster_pitch: float | None = None  # defaults to target_width / 2
    anchor_ratio: int = 8              # anchor tile side, in raster cells

    def __post_init__(self):
        if self.target_width <= 0.0 or self.max_boxes < 1:
            raise InvalidParameter("bad subdivision settings")
        if self.flow_segments < 1 or self.anchor_ratio < 1:
            raise InvalidParameter("flow_segments/anchor_ratio must be >= 1")

    @property
    def pitch(self) -> float:
        return self.raster_pitch if self.raster_pitch is not None else self.target_width / 2.0


@dataclass(frozen=True)
class LiftedAnnulusMap:
    kind: str                     # "pendulum" | "standard-map" | "rigid-twist"
    params: dict
    circ: Interval                # enclosure of the circumference L
    lift_offset: int = 0
    field: VectorFieldSpec | None = None
    integration: IntegrationSettings = IntegrationSettings()

    @property
    def circ_float(self) -> float:
        return self.circ.mid()

    def with_lift(self, offset: int) -> LiftedAnnulusMap:
        return replace(self, lift_offset=offset)

    # -- rigorous single-box image ------------------------------------------

    def image_box(self, b: Box2) -> Box2:
        """Outer enclosure of F0(b) for the reference lift F0 (lift_offset
        handled by the caller through shifts)."""
        if self.kind == "pendulum":
            return flow_time_T(self.field, b, self.integration)
        if self.kind == "standard-map":
            kick = self.params["K_iv"] / TWO_PI * iv_sin(TWO_PI * b.x)
            ynew = b.y + kick
            return Box2(b.x + ynew, ynew)
        if self.kind == "rigid-twist":
            return Box2(b.x + self.params["alpha_iv"] + self.params["tau_iv"] * b.y, b.y)
        raise InvalidParameter(f"unknown map kind {self.kind!r}")

    def apply_lifted(self, lb: LiftedBox) -> LiftedBox:
        """One application of the chosen lift to a lifted box (canonical
        reduction first; exact integer shift bookkeeping)."""
        reduced, k = reduce_box(lb.planar, self.circ)
        img = self.image_box(reduced)
        return LiftedBox(img, lb.shift + k + self.lift_offset)

    # -- float backend -------------------------------------------------------

    def points_image(self, pts: np.ndarray, reps: int = 1) -> np.ndarray:
        """Non-rigorous lifted image of an (N, 2) array of points."""
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = pts
        for _ in range(reps):
            out = self._points_once(out)
        if self.lift_offset:
            out = out.copy()
            out[:, 0] += reps * self.lift_offset * self.circ_float
        return out[0] if single else out

    def _points_once(self, pts: np.ndarray) -> np.ndarray:
        x, y = pts[:, 0], pts[:, 1]
        if self.kind == "standard-map":
            kick = self.params["K"] / (2 * math.pi) * np.sin(2 * math.pi * x)
            ynew = y + kick
            return np.stack([x + ynew, ynew], axis=1)
        if self.kind == "rigid-twist":
            return np.stack([x + self.params["alpha"] + self.params["tau"] * y, y], axis=1)
        fs = self.field
        g_l = fs.coef.mid()
        amp = fs.A.mid()
        om = fs.omega.mid()
        lin = fs.kind == "harmonic"
        n = 256
        h = fs.T / n
        q = x.copy()
        v = y.copy()
        t = 0.0

        def acc(t, q):
            tq = q if lin else np.sin(q)
            return -g_l * tq + amp * math.sin(om * t)

        for _ in range(n):
            k1q = v
            k1v = acc(t, q)
            k2q = v + 0.5 * h * k1v
            k2v = acc(t + 0.5 * h, q + 0.5 * h * k1q)
            k3q = v + 0.5 * h * k2v
            k3v = acc(t + 0.5 * h, q + 0.5 * h * k2q)
            k4q = v + h * k3v
            k4v = acc(t + h, q + h * k3q)
            q = q + (h / 6.0) * (k1q + 2 * k2q + 2 * k3q + k4q)
            v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
            t += h
        return np.stack([q, v], axis=1)


def make_pendulum(g, l, A, omega=None, period=None, lift_offset: int = 0,
                  integration: IntegrationSettings | None = None,
                  kind: str = "pendulum") -> LiftedAnnulusMap:
    """Time-T map of the driven pendulum as a lifted annulus map, L = 2*pi."""
    fs = pendulum_field(g, l, A, omega=omega, period=period, kind=kind)
    return LiftedAnnulusMap(
        kind="pendulum",
        params={"g": fs.g.mid(), "l": fs.l.mid(), "A": fs.A.mid(),
                "omega": fs.omega.mid(), "T": fs.T},
        circ=TWO_PI,
        lift_offset=lift_offset,
        field=fs,
        integration=integration or IntegrationSettings(),
    )


def make_standard_map(K, lift_offset: int = 0) -> LiftedAnnulusMap:
    k_iv = as_interval(K)
    if not math.isfinite(k_iv.mid()):
        raise InvalidParameter("K must be finite")
    return LiftedAnnulusMap(
        kind="standard-map",
        params={"K": k_iv.mid(), "K_iv": k_iv},
        circ=Interval.point(1.0),
        lift_offset=lift_offset,
    )


def make_rigid_twist(alpha, tau, lift_offset: int = 0) -> LiftedAnnulusMap:
    a_iv, t_iv = as_interval(alpha), as_interval(tau)
    if not (math.isfinite(a_iv.mid()) and math.isfinite(t_iv.mid())):
        raise InvalidParameter("twist parameters must be finite")
    return LiftedAnnulusMap(
        kind="rigid-twist",
        params={"alpha": a_iv.mid(), "tau": t_iv.mid(),
                "alpha_iv": a_iv, "tau_iv": t_iv},
        circ=Interval.point(1.0),
        lift_offset=lift_offset,
    )


def make_explicit(kind: str, **params) -> LiftedAnnulusMap:
    if kind == "standard-map":
        return make_standard_map(params["K"], lift_offset=params.get("lift_offset", 0))
    if kind == "rigid-twist":
        return make_rigid_twist(params["alpha"], params["tau"],
                                lift_offset=params.get("lift_offset", 0))
    raise InvalidParameter(f"unknown explicit map {kind!r}")


def make_map(kind: str, params: dict, lift_offset: int = 0,
             integration: IntegrationSettings | None = None) -> LiftedAnnulusMap:
    """Config-level constructor dispatching on the map kind."""
    if kind == "pendulum":
        return make_pendulum(
            params.get("g"), params.get("l"), params.get("A"),
            omega=params.get("omega"), period=params.get("period"),
            lift_offset=lift_offset, integration=integration,
            kind=params.get("field_kind", "pendulum"),
        )
    if kind in ("standard-map", "rigid-twist"):
        m = make_explicit(kind, **{k: v for k, v in params.items()
                                   if k in ("K", "alpha", "tau")})
        return m.with_lift(lift_offset)
    raise InvalidParameter(f"unknown map kind {kind!r}")


def worker_count() -> int:
    try:
        n = int(os.environ.get("CHAOS_CERT_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def _eval_batch(m: LiftedAnnulusMap, batch: list[LiftedBox]) -> list[LiftedBox]:
    return [m.apply_lifted(lb) for lb in batch]


def _cell_box(i: int, j: int, p: float) -> Box2:
    return Box2(Interval(mul_down(i, p), mul_up(i + 1, p)),
                Interval(mul_down(j, p), mul_up(j + 1, p)))


def _cells_covering(b: Box2, p: float):
    """Lattice cells whose union provably covers the box."""
    i0 = math.floor(div_down(b.x.lo, p))
    i1 = math.floor(div_up(b.x.hi, p))
    j0 = math.floor(div_down(b.y.lo, p))
    j1 = math.floor(div_up(b.y.hi, p))
    return i0, i1, j0, j1


def _merge_cell_runs(cells: set, p: float, shift: int) -> list[LiftedBox]:
    """Merge vertically contiguous cells per column into boxes."""
    by_col: dict[int, list[int]] = {}
    for (i, j) in cells:
        by_col.setdefault(i, []).append(j)
    out = []
    for i in sorted(by_col):
        js = sorted(by_col[i])
        run_start = prev = js[0]
        for j in js[1:] + [None]:
            if j is not None and j == prev + 1:
                prev = j
                continue
            box = Box2(Interval(mul_down(i, p), mul_up(i + 1, p)),
                       Interval(mul_down(run_start, p), mul_up(prev + 1, p)))
            out.append(LiftedBox(box, shift))
            if j is not None:
                run_start = prev = j
    return out


def _pendulum_iterate(m: LiftedAnnulusMap, eset: EnclosureSet,
                      settings: SubdivisionSettings,
                      stats: dict | None = None) -> EnclosureSet:
    """One period of the pendulum map applied to an enclosure set.

    The period is split into flow_segments; between segments the union of
    boxes is reduced to canonical representatives and re-rasterized onto a
    pitch lattice (per accumulated shift), which caps the wrapping-effect
    growth at the cost of one lattice quantum per segment.
    """
    fs = m.field
    integ = m.integration
    nseg = settings.flow_segments
    p = settings.pitch
    T = fs.T

    # state: accumulated shift -> set of lattice cells
    state: dict[int, set] = {}
    for lb in eset.members:
        reduced, k = reduce_box(lb.planar, m.circ)
        i0, i1, j0, j1 = _cells_covering(reduced, p)
        cells = state.setdefault(lb.shift + k, set())
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                cells.add((i, j))

    total0 = sum(len(c) for c in state.values())
    if total0 > settings.max_boxes:
        raise BudgetExhausted(
            f"{total0} seed cells exceed the {settings.max_boxes} budget "
            f"(stage {eset.stage + 1}, pitch {p})")

    r = settings.anchor_ratio
    for seg in range(nseg):
        t_from = Interval.point(seg * T / nseg)
        t_to = (seg + 1) * T / nseg if seg + 1 < nseg else T
        nxt: dict[int, set] = {}
        count = 0
        flows = 0
        for shift, cells in sorted(state.items()):
            count += len(cells)
            if count > settings.max_boxes:
                raise BudgetExhausted(
                    f"stage budget of {settings.max_boxes} sub-boxes "
                    f"exhausted in segment {seg + 1}/{nseg} of stage "
                    f"{eset.stage + 1} of {eset.source or 'enclosure'}")
            # group cells into anchor tiles; each tile gets one mean-value
            # (center + variational Jacobian) flow and transports its cells
            tiles: dict[tuple, list] = {}
            for (i, j) in sorted(cells):
                tiles.setdefault((i // r, j // r), []).append((i, j))
            for tile_key, tile_cells in sorted(tiles.items()):
                images: list[tuple[Box2, int]] = []
                if len(tile_cells) <= 2:
                    flows += len(tile_cells)
                    for (i, j) in tile_cells:
                        reduced, k = reduce_box(_cell_box(i, j, p), m.circ)
                        images.append((flow_span(fs, reduced, t_from, t_to, integ), k))
                else:
                    ti, tj = tile_key
                    anchor = _cell_box(ti * r, tj * r, p).hull(
                        _cell_box(ti * r + r - 1, tj * r + r - 1, p))
                    anchor_red, k = reduce_box(anchor, m.circ)
                    flows += 1
                    aff = variational_flow_span(fs, anchor_red, t_from, t_to, integ)
                    shift_iv = m.circ * (-k)
                    for (i, j) in tile_cells:
                        cell = _cell_box(i, j, p)
                        images.append((aff.transport(cell.translate_x(shift_iv)), k))
                for img, k in images:
                    tgt = nxt.setdefault(shift + k, set())
                    i0, i1, j0, j1 = _cells_covering(img, p)
                    for ii in range(i0, i1 + 1):
                        for jj in range(j0, j1 + 1):
                            tgt.add((ii, jj))
        if stats is not None:
            stats["flows"] = stats.get("flows", 0) + flows
            stats["max_cells"] = max(stats.get("max_cells", 0), count)
        state = nxt

    members: list[LiftedBox] = []
    for shift, cells in sorted(state.items()):
        members.extend(_merge_cell_runs(cells, p, shift + m.lift_offset))
    return EnclosureSet(tuple(members), stage=eset.stage + 1, source=eset.source)


def iterate_enclosure(m: LiftedAnnulusMap, eset: EnclosureSet,
                      settings: SubdivisionSettings,
                      stats: dict | None = None) -> EnclosureSet:
    """One rigorous application of the lift to an enclosure set, refining
    by bisection until every image box is narrower than target_width on
    both axes or the per-stage budget runs out."""
    if m.kind == "pendulum":
        return _pendulum_iterate(m, eset, settings, stats=stats)
    target = settings.target_width
    budget = settings.max_boxes
    evals = 0
    out: list[LiftedBox] = []
    work: deque[LiftedBox] = deque(eset.members)
    pool = _pool()
    while work:
        batch_size = max(1, min(len(work), 64 if pool else 1))
        batch = [work.popleft() for _ in range(batch_size)]
        splittable = []
        for lb in batch:
            # boxes about as wide as the annulus cannot be reduced; split first
            if lb.planar.x.width() >= 0.9 * m.circ.lo and lb.planar.x.hi > lb.planar.x.lo:
                a, c = lb.planar.split("x")
                work.appendleft(LiftedBox(c, lb.shift))
                work.appendleft(LiftedBox(a, lb.shift))
                continue
            splittable.append(lb)
        if not splittable:
            continue
        if evals + len(splittable) > budget:
            raise BudgetExhausted(
                f"stage budget of {budget} sub-boxes exhausted at stage "
                f"{eset.stage + 1} of {eset.source or 'enclosure'}")
        evals += len(splittable)
        if pool:
            images = pool(m, splittable)
        else:
            images = _eval_batch(m, splittable)
        for lb, img in zip(splittable, images):
            if img.planar.max_width() <= target:
                out.append(img)
            elif lb.planar.max_width() <= 4.0 * np.finfo(float).eps * max(
                    1.0, abs(lb.planar.x.mid()), abs(lb.planar.y.mid())):
                out.append(img)  # cannot split further; accept wide image
            else:
                a, c = lb.planar.split_widest()
                work.appendleft(LiftedBox(c, lb.shift))
                work.appendleft(LiftedBox(a, lb.shift))
    if stats is not None:
        stats["flows"] = stats.get("flows", 0) + evals
        stats["max_cells"] = max(stats.get("max_cells", 0), evals)
    return EnclosureSet(tuple(out), stage=eset.stage + 1, source=eset.source)


_POOL = None


def _pool():
    """Optional process pool driven by CHAOS_CERT_THREADS (default: off)."""
    global _POOL
    n = worker_count()
    if n <= 1:
        return None
    if _POOL is None:
        from concurrent.futures import ProcessPoolExecutor

        ex = ProcessPoolExecutor(max_workers=n)

        def run(m, batch):
            chunk = max(1, len(batch) // n)
            parts = [batch[i:i + chunk] for i in range(0, len(batch), chunk)]
            futs = [ex.submit(_eval_batch, m, p) for p in parts]
            out = []
            for f in futs:
                out.extend(f.result())
            return out

        _POOL = run
    return _POOL


def enclosure_chain(m: LiftedAnnulusMap, box: Box2, n: int,
                    settings: SubdivisionSettings, source: str = "",
                    stats: dict | None = None) -> list[EnclosureSet]:
    """Stages [U, F(U), ..., F^n(U)] with coherent shift bookkeeping."""
    stage0 = EnclosureSet.single(box, stage=0, source=source)
    chain = [stage0]
    for _ in range(n):
        chain.append(iterate_enclosure(m, chain[-1], settings, stats=stats))
    return chain


def eval_lift(m: LiftedAnnulusMap, box: Box2, power: int,
              settings: SubdivisionSettings, source: str = "",
              stats: dict | None = None) -> EnclosureSet:
    """Enclosure of F^power(box) (the last stage of the chain)."""
    if power < 1:
        raise InvalidParameter("power must be >= 1")
    return enclosure_chain(m, box, power, settings, source=source, stats=stats)[-1]


def iterate_box(m: LiftedAnnulusMap, lb: LiftedBox, power: int) -> LiftedBox:
    """Single-box rigorous power iteration (no subdivision): used for
    witness confirmation where the box is deliberately tiny."""
    cur = lb
    for _ in range(power):
        cur = m.apply_lifted(cur)
    return cur
