"""Validated enclosure of the time-T flow of the driven pendulum field.

The state is (q, v) with q'' = -(g/l) * sin(q) + A * sin(omega * t); time is
adjoined with derivative 1, so sin(omega*t) becomes a coordinate function
with its own Taylor series.  Each step has two phases:

* a rough a-priori enclosure B with b + [0,h] * F(B) verified to map into B
  (Picard operator), so every solution from b stays in B over the step;
* an interval Taylor step of configurable order whose Lagrange remainder is
  the (order+1)-st Taylor coefficient evaluated over the rough enclosure.

Boxes stay axis-aligned; the wrapping effect is controlled by caller-side
subdivision, not coordinate frames.  Total integration time is tracked as
an interval and the final step uses the interval remainder T - t, so the
returned box encloses the exact time-T states even when the step grid does
not land on T exactly.

A "harmonic" field variant (torque linear in q) is provided as an
analytically solvable test hook; it exercises the same code paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import (
    BoundsExceeded,
    IntegrationFailure,
    InvalidParameter,
    PicardFailure,
)
from .interval import (
    Box2,
    Interval,
    TWO_PI,
    add_down,
    add_up,
    as_interval,
    cos_kernel,
    div_pos_int,
    iv_cos,
    iv_sin,
    mul_kernel,
    sin_kernel,
    sub_down,
    sub_up,
)


@dataclass(frozen=True)
class VectorFieldSpec:
    """Driven-pendulum family: q'' = -(g/l)*torque(q) + A*sin(omega*t).

    ``kind`` selects torque(q): "pendulum" -> sin(q), "harmonic" -> q.
    Parameters are interval enclosures so that decimal-specified constants
    (e.g. g = 9.8) are honored exactly.
    """

    name: str
    g: Interval
    l: Interval
    A: Interval
    omega: Interval
    T: float
    kind: str = "pendulum"

    def __post_init__(self):
        if self.l.lo <= 0.0:
            raise InvalidParameter("pendulum length must be positive")
        if self.omega.lo <= 0.0:
            raise InvalidParameter("forcing frequency must be positive")
        if not (self.T > 0.0 and math.isfinite(self.T)):
            raise InvalidParameter("period must be positive and finite")
        if self.kind not in ("pendulum", "harmonic"):
            raise InvalidParameter(f"unknown field kind {self.kind!r}")

    @property
    def coef(self) -> Interval:
        return self.g / self.l

    def force_bound(self, q: Interval | None = None) -> float:
        """Upper bound on |q''| over the given q-range (any q if pendulum)."""
        if self.kind == "pendulum":
            return self.coef.mag() + self.A.mag()
        qmag = q.mag() if q is not None else 1.0
        return self.coef.mag() * qmag + self.A.mag()


def pendulum_field(g, l, A, omega=None, period=None, kind="pendulum") -> VectorFieldSpec:
    """Build a field spec from g, l, A and either omega or the period T.

    T * omega encloses 2*pi within rounding by construction.
    """
    g_iv, l_iv, a_iv = as_interval(g), as_interval(l), as_interval(A)
    if (omega is None) == (period is None):
        raise InvalidParameter("specify exactly one of omega, period")
    if omega is not None:
        om = as_interval(omega)
        if om.lo <= 0.0:
            raise InvalidParameter("omega must be positive")
        t_val = (TWO_PI / om).mid()
    else:
        t_enc = as_interval(period)
        t_val = t_enc.mid()
        om = TWO_PI / t_enc
    return VectorFieldSpec(
        name=kind, g=g_iv, l=l_iv, A=a_iv, omega=om, T=t_val, kind=kind
    )


@dataclass(frozen=True)
class IntegrationSettings:
    taylor_order: int = 4
    h_init: float | None = None  # defaults to T/256
    h_min: float | None = None   # defaults to T/4096
    picard_inflation: float = 1.1
    max_picard_retries: int = 8
    fixed_step: bool = False
    v_max: float = 12.0

    def __post_init__(self):
        if not 1 <= self.taylor_order <= 20:
            raise InvalidParameter("taylor_order must be in [1, 20]")
        if self.picard_inflation <= 1.0:
            raise InvalidParameter("picard_inflation must exceed 1")
        if self.max_picard_retries < 0:
            raise InvalidParameter("max_picard_retries must be >= 0")

    def steps_for(self, T: float) -> tuple[float, float]:
        h0 = self.h_init if self.h_init is not None else T / 256.0
        hm = self.h_min if self.h_min is not None else T / 4096.0
        if not 0.0 < hm <= h0 <= T:
            raise InvalidParameter("need 0 < h_min <= h_init <= T")
        return h0, hm


@dataclass(frozen=True)
class FlowStep:
    rough: Box2
    tight: Box2
    t_span: Interval

    def __post_init__(self):
        if not self.rough.contains_box(self.tight):
            raise InvalidParameter("tight enclosure must lie inside rough")


_ZERO = Interval.point(0.0)


def _field_eval(fs: VectorFieldSpec, b: Box2, t_span: Interval) -> tuple[Interval, Interval]:
    """(q', v') over the box and time span."""
    torque = iv_sin(b.x) if fs.kind == "pendulum" else b.x
    accel = -(fs.coef * torque) + fs.A * iv_sin(fs.omega * t_span)
    return b.y, accel


def a_priori_enclosure(fs: VectorFieldSpec, b: Box2, t0: Interval, h: float,
                       settings: IntegrationSettings) -> Box2:
    """Box B enclosing every solution from b over [t0, t0 + h].

    Verified inclusion: b + [0,h] * F(B) inside B.  The first candidate is
    b drifted by the field once plus an O(h^2) slack, which verifies
    immediately in regular regimes (and keeps the construction isotone in
    b); failures inflate and retry.
    """
    if b.y.mag() > settings.v_max:
        raise BoundsExceeded(
            f"|v| = {b.y.mag()} exceeds v_max = {settings.v_max}")
    t_span = t0 + Interval(0.0, h)
    h_iv = Interval(0.0, h)

    fq, fv = _field_eval(fs, b, t_span)
    v_bound = b.y.mag() + h * fs.force_bound(b.x) + 1.0
    # force variation over one step: d(force)/dt <= coef * |v| + A * omega
    rate = fs.coef.mag() * v_bound + fs.A.mag() * fs.omega.mag()
    slack_q = 2.0 * h * h * fs.force_bound(b.x) + 1e-15
    slack_v = 2.0 * h * h * rate + 1e-15
    cand = Box2(
        (b.x + h_iv * fq).inflate(slack_q),
        (b.y + h_iv * fv).inflate(slack_v),
    )
    for attempt in range(settings.max_picard_retries + 1):
        if cand.y.mag() > settings.v_max:
            raise BoundsExceeded(
                f"rough enclosure escaped |v| <= {settings.v_max}")
        gq, gv = _field_eval(fs, cand, t_span)
        image = Box2(b.x + h_iv * gq, b.y + h_iv * gv)
        if cand.contains_box(image):
            return image
        grow = settings.picard_inflation - 1.0
        cand = Box2(
            cand.x.hull(image.x).inflate(grow * cand.x.width() + 1e-12),
            cand.y.hull(image.y).inflate(grow * cand.y.width() + 1e-12),
        )
    raise PicardFailure(
        f"no verified enclosure after {settings.max_picard_retries} retries "
        f"(h = {h}, t0 = [{t0.lo}, {t0.hi}])")


def _forcing_series_raw(fs: VectorFieldSpec, t0: Interval, order: int) -> tuple[list, list]:
    """Endpoint-pair Taylor coefficients of sin(omega t), cos(omega t) at t0."""
    olo, ohi = fs.omega.lo, fs.omega.hi
    wlo, whi = mul_kernel(olo, ohi, t0.lo, t0.hi)
    u = [sin_kernel(wlo, whi)]
    w = [cos_kernel(wlo, whi)]
    for k in range(order):
        plo, phi = mul_kernel(olo, ohi, *w[k])
        u.append(div_pos_int(plo, phi, k + 1))
        plo, phi = mul_kernel(olo, ohi, *u[k])
        w.append(div_pos_int(-phi, -plo, k + 1))
    return u, w


# forcing series reuse: sub-boxes on the same step grid share (t0, order)
_FORCING_CACHE: dict[tuple, tuple[list, list]] = {}


def _forcing_series_cached(fs: VectorFieldSpec, t0: Interval, order: int):
    key = (fs.omega.lo, fs.omega.hi, t0.lo, t0.hi, order)
    hit = _FORCING_CACHE.get(key)
    if hit is None:
        if len(_FORCING_CACHE) > 8192:
            _FORCING_CACHE.clear()
        hit = _forcing_series_raw(fs, t0, order)
        _FORCING_CACHE[key] = hit
    return hit


def _taylor_coeffs_raw(fs: VectorFieldSpec, q0: tuple, v0: tuple,
                       t0: Interval, order: int,
                       want_cos: bool = False):
    """Endpoint-pair Taylor coefficients [(q_k, v_k)] of the solution
    through box (q0, v0) at time t0; 1/k! factors included.  This is the
    integrator's inner loop, written on raw endpoint pairs.

    With want_cos the cos(q(t)) coefficient list is returned as well (used
    by the variational recursion).
    """
    u, _w = _forcing_series_cached(fs, t0, order)
    coef = fs.coef
    clo, chi_ = coef.lo, coef.hi
    alo_, ahi_ = fs.A.lo, fs.A.hi
    q = [q0]
    v = [v0]
    if fs.kind == "pendulum":
        s = [sin_kernel(*q0)]
        c = [cos_kernel(*q0)]
        jq: list = [None]  # j * q_j, filled as q grows
        for k in range(order):
            m = k + 1
            q.append(div_pos_int(*v[k], m))
            glo, ghi = mul_kernel(clo, chi_, *s[k])
            flo, fhi = mul_kernel(alo_, ahi_, *u[k])
            v.append(div_pos_int(add_down(-ghi, flo), add_up(-glo, fhi), m))
            jm_lo, jm_hi = mul_kernel(*q[m], m, m)
            jq.append((jm_lo, jm_hi))
            # sin/cos of the q-series: s' = c q', c' = -s q'
            as_lo = as_hi = ac_lo = ac_hi = 0.0
            for j in range(1, m + 1):
                tlo, thi = mul_kernel(*jq[j], *c[m - j])
                as_lo = add_down(as_lo, tlo)
                as_hi = add_up(as_hi, thi)
                tlo, thi = mul_kernel(*jq[j], *s[m - j])
                ac_lo = add_down(ac_lo, tlo)
                ac_hi = add_up(ac_hi, thi)
            s.append(div_pos_int(as_lo, as_hi, m))
            c.append(div_pos_int(-ac_hi, -ac_lo, m))
    else:
        c = [(1.0, 1.0)] + [(0.0, 0.0)] * order
        for k in range(order):
            m = k + 1
            q.append(div_pos_int(*v[k], m))
            glo, ghi = mul_kernel(clo, chi_, *q[k])
            flo, fhi = mul_kernel(alo_, ahi_, *u[k])
            v.append(div_pos_int(add_down(-ghi, flo), add_up(-glo, fhi), m))
    coeffs = list(zip(q, v))
    if want_cos:
        return coeffs, c
    return coeffs


def taylor_coeffs(fs: VectorFieldSpec, q0: Interval, v0: Interval,
                  t0: Interval, order: int) -> list[tuple[Interval, Interval]]:
    """Interval Taylor coefficients (q_k, v_k), k = 0..order, of the solution
    through (q0, v0) at time t0 (coefficients include the 1/k! factors)."""
    raw = _taylor_coeffs_raw(fs, (q0.lo, q0.hi), (v0.lo, v0.hi), t0, order)
    return [(Interval._raw(*qk), Interval._raw(*vk)) for qk, vk in raw]


def taylor_step(fs: VectorFieldSpec, b: Box2, t0: Interval, h: Interval,
                order: int, rough: Box2) -> FlowStep:
    """Tight enclosure of the time-(t0+h) states of all solutions from b,
    given a rough enclosure valid over the whole step."""
    t_span = t0 + Interval(0.0, h.hi)
    series = _taylor_coeffs_raw(fs, (b.x.lo, b.x.hi), (b.y.lo, b.y.hi), t0, order)
    rem = _taylor_coeffs_raw(fs, (rough.x.lo, rough.x.hi), (rough.y.lo, rough.y.hi),
                             t_span, order + 1)[order + 1]
    (aq_lo, aq_hi), (av_lo, av_hi) = rem
    hlo, hhi = h.lo, h.hi
    for k in range(order, -1, -1):
        (qlo, qhi), (vlo, vhi) = series[k]
        plo, phi = mul_kernel(aq_lo, aq_hi, hlo, hhi)
        aq_lo, aq_hi = add_down(plo, qlo), add_up(phi, qhi)
        plo, phi = mul_kernel(av_lo, av_hi, hlo, hhi)
        av_lo, av_hi = add_down(plo, vlo), add_up(phi, vhi)
    tight = Box2(Interval(aq_lo, aq_hi), Interval(av_lo, av_hi))
    clipped = tight.intersect(rough)
    if clipped is None:
        # cannot happen for sound enclosures; fall back to the wider box
        clipped = tight.hull(rough)
    return FlowStep(rough=rough, tight=clipped, t_span=t_span)


def flow_span(fs: VectorFieldSpec, b: Box2, t_start: Interval, t_end: float,
              settings: IntegrationSettings) -> Box2:
    """Enclosure of the states at time t_end of all solutions from b at
    t_start (composition of validated steps, adaptive halving unless
    fixed_step).  The final step uses the interval remainder t_end - t so
    the result covers the exact end time."""
    h0, h_min = settings.steps_for(fs.T)
    t = t_start
    cur = b
    h = h0
    order = settings.taylor_order
    while True:
        remaining_hi = sub_up(t_end, t.lo)
        if remaining_hi <= 0.0:
            break
        final = h >= remaining_hi
        if final:
            h_iv = Interval(max(sub_down(t_end, t.hi), 0.0), remaining_hi)
        else:
            h_iv = Interval.point(h)
        try:
            rough = a_priori_enclosure(fs, cur, t, h_iv.hi, settings)
            step = taylor_step(fs, cur, t, h_iv, order, rough)
        except PicardFailure:
            if settings.fixed_step:
                raise IntegrationFailure(
                    f"fixed-step Picard failure at t = [{t.lo}, {t.hi}]")
            if h / 2.0 < h_min:
                raise IntegrationFailure(
                    f"step underflow below h_min = {h_min} at t = [{t.lo}, {t.hi}]")
            h = h / 2.0
            continue
        cur = step.tight
        if final:
            break
        t = t + h_iv
        if not settings.fixed_step and h < h0:
            h = min(h * 2.0, h0)
    return cur


def flow_time_T(fs: VectorFieldSpec, b: Box2, settings: IntegrationSettings) -> Box2:
    """Enclosure of the time-T (Poincare) map applied to b."""
    return flow_span(fs, b, Interval.point(0.0), fs.T, settings)


# ---------------------------------------------------------------------------
# mean-value transport: center flow plus a variational-equation enclosure of
# the flow derivative over a box, so cells inside the box can be moved by an
# affine form instead of a full (wrapping-prone) box integration.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineFlow:
    """Enclosure of the time span map on a box: for every x in ``domain``,
    flow(x) lies in ``center_image + J * (x - center)``."""

    domain: Box2
    center: tuple[float, float]
    center_image: Box2
    j11: Interval
    j12: Interval
    j21: Interval
    j22: Interval

    def transport(self, z: Box2) -> Box2:
        dx = z.x - self.center[0]
        dy = z.y - self.center[1]
        return Box2(
            self.center_image.x + self.j11 * dx + self.j12 * dy,
            self.center_image.y + self.j21 * dx + self.j22 * dy,
        )


def _var_column_series(c_series: list, m0: tuple[tuple, tuple], coef: Interval,
                       order: int) -> list:
    """Taylor coefficients of one variational column (dq, dv)' =
    (dv, -coef * cosq(t) * dq), with cosq(t) given as the series c_series."""
    clo, chi_ = coef.lo, coef.hi
    mq = [m0[0]]
    mv = [m0[1]]
    for k in range(order):
        m = k + 1
        mq.append(div_pos_int(*mv[k], m))
        acc_lo = acc_hi = 0.0
        for j in range(0, k + 1):
            tlo, thi = mul_kernel(*c_series[j], *mq[k - j])
            acc_lo = add_down(acc_lo, tlo)
            acc_hi = add_up(acc_hi, thi)
        glo, ghi = mul_kernel(clo, chi_, acc_lo, acc_hi)
        mv.append(div_pos_int(-ghi, -glo, m))
    return list(zip(mq, mv))


def _matrix_rough(a21: tuple, m_cols, h: float, retries: int):
    """Rough enclosure of the variational columns over one step: candidate
    inflation verified against M0 + [0,h] * A * M."""
    out = []
    for (mq0, mv0) in m_cols:
        mag_q = max(abs(mq0[0]), abs(mq0[1]))
        mag_v = max(abs(mv0[0]), abs(mv0[1]))
        a_mag = max(abs(a21[0]), abs(a21[1]))
        sq = 2.0 * h * (mag_v + 1.0) + 1e-15
        sv = 2.0 * h * (a_mag * (mag_q + 1.0)) + 1e-15
        cq = (add_down(mq0[0], -sq), add_up(mq0[1], sq))
        cv = (add_down(mv0[0], -sv), add_up(mv0[1], sv))
        ok = False
        for _ in range(retries + 1):
            # image: M0 + [0,h] * (cv, a21 * cq)
            plo, phi = mul_kernel(0.0, h, *cv)
            iq = (add_down(mq0[0], min(plo, 0.0)), add_up(mq0[1], max(phi, 0.0)))
            wlo, whi = mul_kernel(*a21, *cq)
            plo, phi = mul_kernel(0.0, h, wlo, whi)
            iv_ = (add_down(mv0[0], min(plo, 0.0)), add_up(mv0[1], max(phi, 0.0)))
            if cq[0] <= iq[0] and iq[1] <= cq[1] and cv[0] <= iv_[0] and iv_[1] <= cv[1]:
                cq, cv = iq, iv_
                ok = True
                break
            wq = 0.2 * (cq[1] - cq[0]) + 1e-12
            wv = 0.2 * (cv[1] - cv[0]) + 1e-12
            cq = (min(cq[0], iq[0]) - wq, max(cq[1], iq[1]) + wq)
            cv = (min(cv[0], iv_[0]) - wv, max(cv[1], iv_[1]) + wv)
        if not ok:
            raise PicardFailure("no rough enclosure for variational columns")
        out.append((cq, cv))
    return out


def variational_flow_span(fs: VectorFieldSpec, box: Box2, t0: Interval,
                          t_end: float, settings: IntegrationSettings) -> AffineFlow:
    """Center flow plus an interval enclosure of the flow Jacobian over
    ``box``: integrates the variational equations alongside a tube (naive
    box flow) that dominates every trajectory from the box."""
    h0, h_min = settings.steps_for(fs.T)
    order = settings.taylor_order
    cx, cy = box.midpoint()
    center = Box2.make(cx, cx, cy, cy)
    tube = box
    mat = [[(1.0, 1.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 1.0)]]
    t = t0
    h = h0
    coef = fs.coef
    while True:
        remaining_hi = sub_up(t_end, t.lo)
        if remaining_hi <= 0.0:
            break
        final = h >= remaining_hi
        if final:
            h_iv = Interval(max(sub_down(t_end, t.hi), 0.0), remaining_hi)
        else:
            h_iv = Interval.point(h)
        try:
            tube_rough = a_priori_enclosure(fs, tube, t, h_iv.hi, settings)
            tube_step = taylor_step(fs, tube, t, h_iv, order, tube_rough)
            center_rough = a_priori_enclosure(fs, center, t, h_iv.hi, settings)
            center_step = taylor_step(fs, center, t, h_iv, order, center_rough)

            t_span = t + Interval(0.0, h_iv.hi)
            # series part: cos(q) along the tube *initial* box trajectory is
            # not enough; evaluate on the rough tube so it covers the step
            _, c_series = _taylor_coeffs_raw(
                fs, (tube_rough.x.lo, tube_rough.x.hi),
                (tube_rough.y.lo, tube_rough.y.hi), t_span, order + 1,
                want_cos=True)
            if fs.kind == "pendulum":
                a21 = mul_kernel(-coef.hi, -coef.lo, *c_series[0])
            else:
                a21 = (-coef.hi, -coef.lo)
            cols = [((mat[0][0], mat[1][0])), ((mat[0][1], mat[1][1]))]
            rough_cols = _matrix_rough(a21, cols, h_iv.hi, settings.max_picard_retries)
            step_mat = [[None, None], [None, None]]
            for ci, (m0, m_rough) in enumerate(zip(cols, rough_cols)):
                series = _var_column_series(c_series, m0, coef, order)
                rem = _var_column_series(c_series, m_rough, coef, order + 1)[order + 1]
                aq, av = rem
                hlo, hhi = h_iv.lo, h_iv.hi
                for k in range(order, -1, -1):
                    qk, vk = series[k]
                    plo, phi = mul_kernel(*aq, hlo, hhi)
                    aq = (add_down(plo, qk[0]), add_up(phi, qk[1]))
                    plo, phi = mul_kernel(*av, hlo, hhi)
                    av = (add_down(plo, vk[0]), add_up(phi, vk[1]))
                step_mat[0][ci] = aq
                step_mat[1][ci] = av
        except PicardFailure:
            if settings.fixed_step:
                raise IntegrationFailure(
                    f"fixed-step Picard failure at t = [{t.lo}, {t.hi}]")
            if h / 2.0 < h_min:
                raise IntegrationFailure(
                    f"step underflow below h_min = {h_min} at t = [{t.lo}, {t.hi}]")
            h = h / 2.0
            continue
        mat = step_mat  # step matrix already includes the previous columns
        tube = tube_step.tight
        center = center_step.tight
        if final:
            break
        t = t + h_iv
        if not settings.fixed_step and h < h0:
            h = min(h * 2.0, h0)
    return AffineFlow(
        domain=box,
        center=(cx, cy),
        center_image=center,
        j11=Interval(*mat[0][0]), j12=Interval(*mat[0][1]),
        j21=Interval(*mat[1][0]), j22=Interval(*mat[1][1]),
    )


def flow_map(fs: VectorFieldSpec, settings: IntegrationSettings):
    """Closure evaluating the Poincare (time-T) map on boxes."""
    def apply(box: Box2) -> Box2:
        return flow_time_T(fs, box, settings)
    return apply


def energy_enclosure(fs: VectorFieldSpec, b: Box2) -> Interval:
    """Enclosure of v^2/2 - (g/l) cos q over the box (pendulum kind)."""
    pot = iv_cos(b.x) if fs.kind == "pendulum" else b.x.sqr().scale_pow2(0.5)
    return b.y.sqr().scale_pow2(0.5) - fs.coef * pot
