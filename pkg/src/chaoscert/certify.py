"""Three-valued rigorous certification of rotational-chaos hypotheses.

Every positive claim (an intersection is nonempty) is backed by a witness
box whose rigorous image enclosure lies strictly inside the open interior
of the target; every negative claim (two sets are disjoint) is backed by
outer enclosures.  Overlap of outer enclosures is never treated as an
intersection, and absence of a witness is never treated as a refutation:
the only refutations issued are provable ones (an image enclosure disjoint
from every translate, or interior witnesses for two distinct translates).

Float-precision searches appear here only to *seed* witness candidates;
they never influence a verdict.  This module deliberately does not import
the explorer.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    AmbiguousShift,
    InconclusiveError,
    InvalidChain,
    InvalidParameter,
    NoVisitFound,
    NoWitness,
    RefutationError,
    RefutedIntersection,
)
from .flow import variational_flow_span
from .geometry import (
    EnclosureSet,
    LiftedBox,
    annulus_disjoint,
    inessential_union,
    reduce_box,
)
from .interval import Box2, Interval
from .maps import (
    LiftedAnnulusMap,
    SubdivisionSettings,
    enclosure_chain,
    iterate_box,
)


class Verdict(str, enum.Enum):
    CERTIFIED = "certified"
    REFUTED = "refuted"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CertifySettings:
    subdivision: SubdivisionSettings = SubdivisionSettings()
    witness_depth: int = 46     # halving levels; floor width ~2^-46 of scale
    witness_start_depth: int = 6
    max_m: int = 60
    float_grid: int = 24        # per-axis float seeding grid
    float_samples: int = 256    # extra random samples for visit search
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.witness_depth <= 60:
            raise InvalidParameter("witness_depth must be in [1, 60]")


# ---------------------------------------------------------------------------
# rigorous single-box iteration helpers
# ---------------------------------------------------------------------------


def _iterate_box_tight(m: LiftedAnnulusMap, lb: LiftedBox, power: int) -> LiftedBox:
    """Rigorous F^power on a small box.  The ODE backend uses the
    mean-value (variational) form per period, which tracks the true
    derivative growth instead of the axis-aligned wrapping rate."""
    if m.kind != "pendulum":
        return iterate_box(m, lb, power)
    cur = lb
    fs, integ = m.field, m.integration
    for _ in range(power):
        reduced, k = reduce_box(cur.planar, m.circ)
        aff = variational_flow_span(fs, reduced, Interval.point(0.0), fs.T, integ)
        img = aff.transport(reduced)
        naive = m.image_box(reduced)
        both = img.intersect(naive)
        cur = LiftedBox(both if both is not None else img,
                        cur.shift + k + m.lift_offset)
    return cur


def _float_image(m: LiftedAnnulusMap, pts: np.ndarray, reps: int) -> np.ndarray:
    return m.points_image(pts, reps=reps)


def _interior_samples(box: Box2, n_grid: int, margin: float = 0.02) -> np.ndarray:
    wx, wy = box.x.hi - box.x.lo, box.y.hi - box.y.lo
    xs = np.linspace(box.x.lo + margin * wx, box.x.hi - margin * wx, n_grid)
    ys = np.linspace(box.y.lo + margin * wy, box.y.hi - margin * wy, n_grid)
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def _clearance(pts: np.ndarray, box: Box2, circ: float) -> np.ndarray:
    """Annulus-distance clearance of points inside a projected box (negative
    when outside)."""
    dx = (pts[:, 0] - box.x.lo) % circ
    wid = box.x.hi - box.x.lo
    cx = np.where(dx <= wid, np.minimum(dx, wid - dx), -1.0)
    cy = np.minimum(pts[:, 1] - box.y.lo, box.y.hi - pts[:, 1])
    return np.minimum(cx, cy)


# ---------------------------------------------------------------------------
# shift certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftCertificate:
    """Evidence that F(U) meets U + (k*L, 0) and no other translate."""

    k: int
    witness: Box2
    witness_image: LiftedBox
    enclosure: EnclosureSet
    overlap_translates: tuple[int, ...]

    def image_hull(self, circ: Interval) -> Box2:
        return self.enclosure.hull(circ)


def _overlap_translates(eset: EnclosureSet, U: Box2, circ: Interval) -> list[int]:
    """All k for which the enclosure possibly meets U + kL (member-level)."""
    hits: set[int] = set()
    for mm in eset.members:
        pa = mm.planar
        if pa.y.is_disjoint(U.y):
            continue
        base = (pa.x.mid() - U.x.mid()) / circ.mid()
        for k in range(math.floor(base) - 1, math.floor(base) + 3):
            if not pa.x.is_disjoint(U.x + circ * k):
                hits.add(k + mm.shift)
    return sorted(hits)


def _witness_centers(m: LiftedAnnulusMap, U: Box2, k: int,
                     settings: CertifySettings) -> list[tuple[float, float]]:
    """Candidate witness centers: the box midpoint first, then float-found
    returning points ordered by clearance."""
    centers = [U.midpoint()]
    pts = _interior_samples(U, settings.float_grid)
    img = _float_image(m, pts, 1)
    target_lo = U.x.lo + k * m.circ_float
    inside = ((img[:, 0] > target_lo) & (img[:, 0] < target_lo + (U.x.hi - U.x.lo))
              & (img[:, 1] > U.y.lo) & (img[:, 1] < U.y.hi))
    if inside.any():
        cx = np.minimum(img[inside, 0] - target_lo,
                        target_lo + (U.x.hi - U.x.lo) - img[inside, 0])
        cy = np.minimum(img[inside, 1] - U.y.lo, U.y.hi - img[inside, 1])
        cl = np.minimum(cx, cy)
        order = np.argsort(-cl)
        for idx in order[:8]:
            centers.append(tuple(pts[inside][idx]))
    return centers


def _shrink_to_witness(m: LiftedAnnulusMap, U: Box2, target: Box2, target_shift: int,
                       center: tuple[float, float], power: int,
                       settings: CertifySettings) -> tuple[Box2, LiftedBox] | None:
    """Shrink boxes around the center (width halving) until the rigorous
    power-image lies strictly inside target + (target_shift * L, 0)."""
    hx0 = (U.x.hi - U.x.lo) / 2.0
    hy0 = (U.y.hi - U.y.lo) / 2.0
    for depth in range(settings.witness_start_depth, settings.witness_depth + 1):
        f = 2.0 ** (-depth)
        w = Box2.around(center[0], center[1], hx0 * f, hy0 * f)
        w = w.intersect(U)
        if w is None:
            return None
        try:
            img = _iterate_box_tight(m, LiftedBox(w, 0), power)
        except InconclusiveError:
            continue
        tgt = target.translate_x(m.circ * (target_shift - img.shift))
        if img.planar.strictly_inside(tgt):
            return w, img
        if img.planar.is_disjoint(tgt):
            return None  # image provably elsewhere; this center is hopeless
    return None


def certify_shift(m: LiftedAnnulusMap, U: Box2, settings: CertifySettings,
                  enclosure: EnclosureSet | None = None) -> ShiftCertificate:
    """Certificate for the self-return translate: the unique integer k with
    F(lift of U) meeting (lift of U) + (kL, 0), witnessed by a sub-box whose
    image enclosure lies strictly inside the translate's interior.

    Raises RefutedIntersection when the image enclosure misses every
    translate (a provable violation of U meeting f(U)), AmbiguousShift when
    two translates admit witnesses, NoWitness when rigor runs out.
    """
    if enclosure is None:
        enclosure = enclosure_chain(m, U, 1, settings.subdivision, source="U")[1]
    overlaps = _overlap_translates(enclosure, U, m.circ)
    if not overlaps:
        raise RefutedIntersection(
            "image enclosure is disjoint from every translate of the box: "
            "U and f(U) are provably disjoint in the annulus")
    witnesses: list[tuple[int, Box2, LiftedBox]] = []
    for k in overlaps:
        for center in _witness_centers(m, U, k, settings):
            got = _shrink_to_witness(m, U, U, k, center, 1, settings)
            if got is not None:
                witnesses.append((k, got[0], got[1]))
                break
    if len(witnesses) > 1:
        raise AmbiguousShift(
            f"translates {[w[0] for w in witnesses]} all admit interior "
            "witnesses; the disjoint-pair premise fails")
    if not witnesses:
        raise NoWitness(
            f"no interior witness found at depth {settings.witness_depth} "
            f"for overlap translates {overlaps}")
    k_star, wit, wit_img = witnesses[0]
    if overlaps != [k_star]:
        raise NoWitness(
            f"witness found for translate {k_star} but the outer enclosure "
            f"also overlaps translates {[k for k in overlaps if k != k_star]}; "
            "uniqueness not established at this budget")
    return ShiftCertificate(k=k_star, witness=wit, witness_image=wit_img,
                            enclosure=enclosure, overlap_translates=tuple(overlaps))


# ---------------------------------------------------------------------------
# n-dpd certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DpdCertificate:
    n: int
    verdict: Verdict
    k0: int | None
    k1: int | None
    rho: int | None
    shift0: ShiftCertificate | None
    shift1: ShiftCertificate | None
    chain0: tuple[EnclosureSet, ...]
    chain1: tuple[EnclosureSet, ...]
    disjointness: dict
    inessential0: bool
    inessential1: bool
    reasons: tuple[str, ...]
    stats: dict = field(default_factory=dict)

    @property
    def rho_abs(self) -> int | None:
        return None if self.rho is None else abs(self.rho)


def certify_ndpd(m: LiftedAnnulusMap, U0: Box2, U1: Box2, n: int,
                 settings: CertifySettings) -> DpdCertificate:
    """Certify the n-disjoint-pair-of-disks conditions for (U0, U1).

    Certified requires: self-return witnesses for both boxes, provable
    disjointness of f^i(U0) and f^j(U1) for all i, j in [1, n], and
    inessentiality of both iterate unions.  Refuted only on provable
    violations; everything else is Inconclusive with reasons.
    """
    if n < 1:
        raise InvalidParameter("n must be >= 1")
    t0 = time.time()
    stats: dict = {}
    reasons: list[str] = []
    refuted = False

    chains = {}
    for name, U in (("U0", U0), ("U1", U1)):
        try:
            chains[name] = enclosure_chain(m, U, n, settings.subdivision,
                                           source=name, stats=stats)
        except InconclusiveError as exc:
            reasons.append(f"{name} chain: {exc}")
            chains[name] = None

    certs = {}
    for name, U in (("U0", U0), ("U1", U1)):
        if chains[name] is None:
            certs[name] = None
            continue
        try:
            certs[name] = certify_shift(m, U, settings, enclosure=chains[name][1])
        except RefutationError as exc:
            refuted = True
            reasons.append(f"{name} self-return: {exc}")
            certs[name] = None
        except InconclusiveError as exc:
            reasons.append(f"{name} self-return: {exc}")
            certs[name] = None

    table: dict = {}
    if chains["U0"] is not None and chains["U1"] is not None:
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                ok = annulus_disjoint(chains["U0"][i], chains["U1"][j], m.circ)
                table[(i, j)] = ok
                if not ok:
                    reasons.append(
                        f"enclosures of f^{i}(U0) and f^{j}(U1) overlap "
                        "(not a proof of intersection)")

    iness = {}
    for name in ("U0", "U1"):
        if chains[name] is None:
            iness[name] = False
            continue
        ok = inessential_union(chains[name], m.circ)
        iness[name] = ok
        if not ok:
            reasons.append(f"inessentiality of the {name} iterate union not shown")

    k0 = certs["U0"].k if certs["U0"] else None
    k1 = certs["U1"].k if certs["U1"] else None
    rho = (k1 - k0) if (k0 is not None and k1 is not None) else None

    certified = (certs["U0"] is not None and certs["U1"] is not None
                 and all(table.get((i, j), False)
                         for i in range(1, n + 1) for j in range(1, n + 1))
                 and iness["U0"] and iness["U1"])
    if certified:
        verdict = Verdict.CERTIFIED
    elif refuted:
        verdict = Verdict.REFUTED
    else:
        verdict = Verdict.INCONCLUSIVE
    stats["wall_time_s"] = round(time.time() - t0, 3)
    return DpdCertificate(
        n=n, verdict=verdict, k0=k0, k1=k1, rho=rho,
        shift0=certs["U0"], shift1=certs["U1"],
        chain0=tuple(chains["U0"] or ()), chain1=tuple(chains["U1"] or ()),
        disjointness=table, inessential0=iness["U0"], inessential1=iness["U1"],
        reasons=tuple(reasons), stats=stats,
    )


# ---------------------------------------------------------------------------
# visits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VisitWitness:
    seed: Box2
    m: int
    final_enclosure: Box2          # planar part of the final image
    final_shift: int               # its integer translate bookkeeping
    target_translate: int          # the translate of the target it enters
    source_name: str = ""
    target_name: str = ""


def _float_visit_candidates(m: LiftedAnnulusMap, source: Box2, target: Box2,
                            max_m: int, settings: CertifySettings):
    """(point, m, clearance, translate) candidates from float orbits,
    ordered by iterate count then clearance."""
    rng = np.random.default_rng(settings.seed)
    grid = _interior_samples(source, settings.float_grid)
    extra = np.stack([
        rng.uniform(source.x.lo, source.x.hi, settings.float_samples),
        rng.uniform(source.y.lo, source.y.hi, settings.float_samples),
    ], axis=1)
    pts = np.concatenate([grid, extra], axis=0)
    cur = pts.copy()
    circ = m.circ_float
    out = []
    for mi in range(1, max_m + 1):
        cur = _float_image(m, cur, 1)
        cl = _clearance(cur, target, circ)
        hit = cl > 0.0
        for idx in np.nonzero(hit)[0]:
            k = math.floor((cur[idx, 0] - target.x.lo) / circ)
            out.append((tuple(pts[idx]), mi, float(cl[idx]), k))
    out.sort(key=lambda t: (t[1], -t[2]))
    return out


def certify_visit(m: LiftedAnnulusMap, source: Box2, target: Box2,
                  max_m: int | None = None,
                  settings: CertifySettings = CertifySettings(),
                  source_name: str = "source", target_name: str = "target") -> VisitWitness:
    """Witness that some forward orbit from int(source) enters int(target):
    a seed box inside the source whose rigorous m-step image enclosure lies
    strictly inside the target's interior (against the right translate).

    Raises NoVisitFound (an inconclusive signal: absence of a visit is not
    certifiable by this method).
    """
    max_m = settings.max_m if max_m is None else max_m
    if not annulus_disjoint(source, target, m.circ):
        raise InvalidParameter("source and target must be provably disjoint")
    cands = _float_visit_candidates(m, source, target, max_m, settings)
    tried = 0
    for (px, py), mi, cl, k in cands:
        if tried >= 24:
            break
        tried += 1
        got = _shrink_to_witness(m, source, target, k, (px, py), mi, settings)
        if got is None:
            continue
        seed, img = got
        if not seed.strictly_inside(source):
            shrunk = seed.intersect(
                Box2(Interval(source.x.lo + 1e-12, source.x.hi - 1e-12),
                     Interval(source.y.lo + 1e-12, source.y.hi - 1e-12)))
            if shrunk is None:
                continue
            seed = shrunk
        return VisitWitness(seed=seed, m=mi, final_enclosure=img.planar,
                            final_shift=img.shift, target_translate=k,
                            source_name=source_name, target_name=target_name)
    raise NoVisitFound(
        f"no rigorous visiting witness from {source_name} to {target_name} "
        f"within m <= {max_m} ({len(cands)} float candidates)")


# ---------------------------------------------------------------------------
# combined chaos certificate
# ---------------------------------------------------------------------------


ADMISSIBLE_ROWS = ((3, 1), (2, 2), (1, 3))  # (min n, min |rho|)


def admissible(n: int, rho_abs: int) -> bool:
    return any(n >= n_min and rho_abs >= r_min for n_min, r_min in ADMISSIBLE_ROWS)


@dataclass(frozen=True)
class DeclaredHypotheses:
    """Analytic hypotheses supplied by the user, echoed verbatim into the
    certificate; they are not finitely checkable from map evaluations."""

    area_preserving: bool
    nonwandering: bool
    birkhoff_related_ends: bool


@dataclass(frozen=True)
class ChaosCertificate:
    dpd: DpdCertificate
    visit_01: VisitWitness | None
    visit_10: VisitWitness | None
    visit_errors: tuple[str, ...]
    declared: DeclaredHypotheses
    relabeled: bool
    applied_criterion: str | None     # "nonwandering" | "area_preserving_ends"
    implied_interval: tuple[Fraction, Fraction] | None
    conclusion: str
    reason: str | None

    @property
    def verdict(self) -> Verdict:
        if self.applied_criterion is not None:
            return Verdict.CERTIFIED
        return self.dpd.verdict if self.dpd.verdict == Verdict.REFUTED else Verdict.INCONCLUSIVE


def certify_chaos(m: LiftedAnnulusMap, U0: Box2, U1: Box2, n: int,
                  declared: DeclaredHypotheses,
                  settings: CertifySettings) -> ChaosCertificate:
    """Full pipeline: n-dpd + mutual visits + admissibility of (n, |rho|)
    + declared analytic hypotheses => which criterion variant applies and
    the implied rotation interval [1/n, |rho| - 1/n]."""
    dpd = certify_ndpd(m, U0, U1, n, settings)

    visits: dict[str, VisitWitness | None] = {"01": None, "10": None}
    verrors: list[str] = []
    for key, (src, tgt, sn, tn) in {
        "01": (U0, U1, "U0", "U1"),
        "10": (U1, U0, "U1", "U0"),
    }.items():
        try:
            visits[key] = certify_visit(m, src, tgt, settings.max_m, settings,
                                        source_name=sn, target_name=tn)
        except (InconclusiveError, InvalidParameter) as exc:
            verrors.append(f"visit {sn}->{tn}: {exc}")

    reason = None
    applied = None
    implied = None
    relabeled = False
    if dpd.verdict != Verdict.CERTIFIED:
        reason = f"dpd verdict is {dpd.verdict.value}"
    else:
        rho = dpd.rho
        relabeled = rho < 0
        rho_abs = abs(rho)
        if rho_abs == 0 or not admissible(n, rho_abs):
            reason = f"(n, rho) = ({n}, {rho}) below the admissibility table"
        else:
            # after relabeling, the "first" box is the one with the smaller
            # self-return integer
            v01 = visits["10"] if relabeled else visits["01"]
            v10 = visits["01"] if relabeled else visits["10"]
            if (declared.area_preserving and declared.birkhoff_related_ends
                    and v01 is not None and v10 is not None):
                applied = "area_preserving_ends"
            elif declared.nonwandering and v01 is not None:
                applied = "nonwandering"
            else:
                missing = []
                if v01 is None:
                    missing.append("forward visit")
                if v10 is None:
                    missing.append("backward visit")
                if not (declared.nonwandering or
                        (declared.area_preserving and declared.birkhoff_related_ends)):
                    missing.append("declared hypotheses")
                reason = "requirements not met: " + ", ".join(missing)
            if applied:
                implied = (Fraction(1, n), Fraction(rho_abs) - Fraction(1, n))

    if applied == "area_preserving_ends":
        conclusion = (
            "Certified conditions plus the declared hypotheses (area "
            "preservation, ends mixing) imply a rotational horseshoe whose "
            f"instability region is the whole annulus; for a suitable lift "
            f"the rotation set contains [{implied[0]}, {implied[1]}] in "
            "circumference units, and every rational in that interval is "
            "realized by a periodic orbit.")
    elif applied == "nonwandering":
        conclusion = (
            "Certified conditions plus the declared non-wandering hypothesis "
            "imply a rotational horseshoe and an instability region meeting "
            f"both boxes; for a suitable lift the rotation set contains "
            f"[{implied[0]}, {implied[1]}] in circumference units, and every "
            "rational in that interval is realized by a periodic orbit.")
    else:
        conclusion = "No criterion variant applies: " + (reason or "unknown")

    return ChaosCertificate(
        dpd=dpd, visit_01=visits["01"], visit_10=visits["10"],
        visit_errors=tuple(verrors), declared=declared, relabeled=relabeled,
        applied_criterion=applied, implied_interval=implied,
        conclusion=conclusion, reason=reason,
    )


# ---------------------------------------------------------------------------
# periodic disk chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainCertificate:
    q: int
    p: int
    disks: tuple[Box2, ...]
    exponents: tuple[int, ...]
    verdict: Verdict
    free_enclosures: tuple[EnclosureSet, ...]
    connections: tuple[tuple[Box2, LiftedBox], ...]
    reasons: tuple[str, ...]
    conclusion: str


def _h_enclosure(m: LiftedAnnulusMap, box: Box2, q: int, p: int, reps: int,
                 settings: CertifySettings, source: str) -> EnclosureSet:
    """Enclosure of H^reps(box) for H = F^q - (p L, 0)."""
    es = enclosure_chain(m, box, q * reps, settings.subdivision, source=source)[-1]
    if p:
        es = EnclosureSet(tuple(LiftedBox(mm.planar, mm.shift - p * reps)
                                for mm in es.members),
                          stage=es.stage, source=es.source)
    return es


def _h_float(m: LiftedAnnulusMap, pts: np.ndarray, q: int, p: int, reps: int) -> np.ndarray:
    out = _float_image(m, pts, q * reps)
    if p:
        out = out.copy()
        out[:, 0] -= p * reps * m.circ_float
    return out


def certify_chain(m: LiftedAnnulusMap, q: int, p: int, disks: list[Box2],
                  exponents: list[int],
                  settings: CertifySettings = CertifySettings()) -> ChainCertificate:
    """Certify a periodic disk chain for the plane map H = F^q - (pL, 0):
    pairwise disjoint disks, each moved off itself by H, cyclically
    connected by interior witnesses under H^{m_i}.  A certified chain
    forces a fixed point of H, i.e. a periodic orbit of rotation number
    p/q in circumference units."""
    if q < 1:
        raise InvalidParameter("q must be >= 1")
    if len(disks) != len(exponents) or not disks:
        raise InvalidChain("disks and exponents must align and be nonempty")
    if any(e < 1 for e in exponents):
        raise InvalidChain("connection exponents must be >= 1")
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            if not disks[i].is_disjoint(disks[j]):
                raise InvalidChain(f"disks {i} and {j} are not planar-disjoint")

    reasons: list[str] = []
    frees: list[EnclosureSet] = []
    for i, disk in enumerate(disks):
        es = _h_enclosure(m, disk, q, p, 1, settings, source=f"V{i}")
        frees.append(es)
        for mm in es.members:
            if not mm.materialize(m.circ).is_disjoint(disk):
                reasons.append(
                    f"H(V{i}) enclosure overlaps V{i} (self-intersection "
                    "not refuted)")
                break

    connections: list[tuple[Box2, LiftedBox]] = []
    nvd = len(disks)
    for i, (disk, mi) in enumerate(zip(disks, exponents)):
        nxt = disks[(i + 1) % nvd]
        found = None
        pts = _interior_samples(disk, settings.float_grid)
        img = _h_float(m, pts, q, p, mi)
        inside = ((img[:, 0] > nxt.x.lo) & (img[:, 0] < nxt.x.hi)
                  & (img[:, 1] > nxt.y.lo) & (img[:, 1] < nxt.y.hi))
        centers = [tuple(pt) for pt in pts[inside][:8]]
        for center in centers:
            got = _shrink_chain_witness(m, disk, nxt, q, p, mi, center, settings)
            if got is not None:
                found = got
                break
        if found is None:
            reasons.append(
                f"no interior witness for H^{mi}(V{i}) meeting V{(i + 1) % nvd}")
        else:
            connections.append(found)

    ok = not reasons and len(connections) == nvd
    verdict = Verdict.CERTIFIED if ok else Verdict.INCONCLUSIVE
    concl = (f"H = F^{q} - ({p} L, 0) has a fixed point: the map has a "
             f"periodic orbit of rotation number {p}/{q} in circumference "
             "units." if ok else "chain not certified")
    return ChainCertificate(
        q=q, p=p, disks=tuple(disks), exponents=tuple(exponents),
        verdict=verdict, free_enclosures=tuple(frees),
        connections=tuple(connections), reasons=tuple(reasons),
        conclusion=concl,
    )


def _shrink_chain_witness(m: LiftedAnnulusMap, disk: Box2, nxt: Box2, q: int,
                          p: int, mi: int, center: tuple[float, float],
                          settings: CertifySettings) -> tuple[Box2, LiftedBox] | None:
    hx0 = (disk.x.hi - disk.x.lo) / 2.0
    hy0 = (disk.y.hi - disk.y.lo) / 2.0
    for depth in range(settings.witness_start_depth, settings.witness_depth + 1):
        f = 2.0 ** (-depth)
        w = Box2.around(center[0], center[1], hx0 * f, hy0 * f)
        w = w.intersect(disk)
        if w is None:
            return None
        try:
            img = _iterate_box_tight(m, LiftedBox(w, 0), q * mi)
        except InconclusiveError:
            continue
        img = LiftedBox(img.planar, img.shift - p * mi)
        tgt = nxt.translate_x(m.circ * (-img.shift))
        if img.planar.strictly_inside(tgt):
            return w, img
        if img.planar.is_disjoint(tgt):
            return None
    return None


# ---------------------------------------------------------------------------
# Markovian crossings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovShiftResult:
    shift: int
    certified: bool
    orientation: str | None   # "direct" | "reversed"
    reason: str | None


@dataclass(frozen=True)
class MarkovCertificate:
    rect: Box2
    n_iter: int
    results: tuple[MarkovShiftResult, ...]
    left_enclosure: EnclosureSet
    right_enclosure: EnclosureSet
    full_enclosure: EnclosureSet
    horseshoe_symbols: int
    entropy_lower_bound: float | None

    @property
    def verdict(self) -> Verdict:
        if all(r.certified for r in self.results) and self.results:
            return Verdict.CERTIFIED
        return Verdict.INCONCLUSIVE


def certify_markov(m: LiftedAnnulusMap, R: Box2, n_iter: int, shifts: list[int],
                   settings: CertifySettings = CertifySettings()) -> MarkovCertificate:
    """Sufficient horizontal-crossing check for Markovian intersections of
    F^n_iter(R) with translates R + (sL, 0): the left edge's image enclosure
    must land strictly beyond one side of the translate's x-range and the
    right edge's strictly beyond the other, while the full image enclosure
    stays strictly within the translate's y-range band.  Two or more
    certified shifts give a rotational horseshoe with that many symbols and
    period n_iter."""
    if n_iter < 1:
        raise InvalidParameter("n_iter must be >= 1")
    left_edge = Box2(Interval.point(R.x.lo), R.y)
    right_edge = Box2(Interval.point(R.x.hi), R.y)
    e_left = enclosure_chain(m, left_edge, n_iter, settings.subdivision, "R_l")[-1]
    e_right = enclosure_chain(m, right_edge, n_iter, settings.subdivision, "R_r")[-1]
    e_full = enclosure_chain(m, R, n_iter, settings.subdivision, "R")[-1]

    results = []
    for s in shifts:
        tx = R.x + m.circ * s
        band_ok = all(mm.planar.y.strictly_inside(R.y) for mm in e_full.members)
        lx = [mm.materialize(m.circ).x for mm in e_left.members]
        rx = [mm.materialize(m.circ).x for mm in e_right.members]
        left_of = all(iv.hi < tx.lo for iv in lx)
        right_of = all(iv.lo > tx.hi for iv in rx)
        swapped_left = all(iv.hi < tx.lo for iv in rx)
        swapped_right = all(iv.lo > tx.hi for iv in lx)
        orientation = None
        if left_of and right_of:
            orientation = "direct"
        elif swapped_left and swapped_right:
            orientation = "reversed"
        if orientation and band_ok:
            results.append(MarkovShiftResult(s, True, orientation, None))
        else:
            why = []
            if not band_ok:
                why.append("image leaves the target y-band")
            if orientation is None:
                why.append("edge images do not straddle the translate")
            results.append(MarkovShiftResult(s, False, None, "; ".join(why)))

    certified = [r for r in results if r.certified]
    symbols = len(certified)
    entropy = math.log(symbols) / n_iter if symbols >= 2 else None
    return MarkovCertificate(
        rect=R, n_iter=n_iter, results=tuple(results),
        left_enclosure=e_left, right_enclosure=e_right, full_enclosure=e_full,
        horseshoe_symbols=symbols, entropy_lower_bound=entropy,
    )
