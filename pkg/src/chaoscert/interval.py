"""Directed-rounded interval arithmetic and axis-aligned planar boxes.

Endpoints are binary64.  Directed rounding is realized by post-hoc endpoint
nudging around round-to-nearest evaluation: error-free transformations
(TwoSum / Dekker's TwoProd) detect whether the nearest result is exact and
which side it erred on, so exact endpoint arithmetic stays exact and
inexact results are widened by exactly one ulp.  Division always widens by
one ulp.  Elementary functions (sin, cos, exp) are evaluated through libm
and widened by two ulps; this assumes the platform libm is accurate to
within 1.5 ulp for these functions, which the test suite verifies against
a high-precision oracle.

All values are immutable.  An empty intersection is returned as ``None``,
never as an inverted interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DivisionByZeroInterval,
    EmptySplit,
    IntervalOverflow,
    InvalidParameter,
)

_INF = math.inf
_SPLITTER = 134217729.0  # 2**27 + 1, for Dekker's product splitting
# Outside this magnitude window Dekker splitting may overflow or lose the
# error term to underflow; fall back to unconditional outward nudging.
_SAFE_LO = 2.0 ** -500
_SAFE_HI = 2.0 ** 500


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ca = _SPLITTER * a
    ah = ca - (ca - a)
    al = a - ah
    cb = _SPLITTER * b
    bh = cb - (cb - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _down(x: float) -> float:
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def add_down(a: float, b: float) -> float:
    s, e = _two_sum(a, b)
    return math.nextafter(s, -_INF) if e < 0.0 else s


def add_up(a: float, b: float) -> float:
    s, e = _two_sum(a, b)
    return math.nextafter(s, _INF) if e > 0.0 else s


def sub_down(a: float, b: float) -> float:
    return add_down(a, -b)


def sub_up(a: float, b: float) -> float:
    return add_up(a, -b)


def mul_down(a: float, b: float) -> float:
    p = a * b
    ap, bp = abs(a), abs(b)
    if not (_SAFE_LO < ap < _SAFE_HI and _SAFE_LO < bp < _SAFE_HI) and p != 0.0:
        return math.nextafter(p, -_INF)
    _, e = _two_prod(a, b)
    return math.nextafter(p, -_INF) if e < 0.0 else p


def mul_up(a: float, b: float) -> float:
    p = a * b
    ap, bp = abs(a), abs(b)
    if not (_SAFE_LO < ap < _SAFE_HI and _SAFE_LO < bp < _SAFE_HI) and p != 0.0:
        return math.nextafter(p, _INF)
    _, e = _two_prod(a, b)
    return math.nextafter(p, _INF) if e > 0.0 else p


def div_down(a: float, b: float) -> float:
    # One-ulp unconditional widening; exactness detection is not worth the
    # cost here since divisions are rare outside Taylor-coefficient scaling.
    q = a / b
    if q == 0.0 and a == 0.0:
        return 0.0
    return math.nextafter(q, -_INF)


def div_up(a: float, b: float) -> float:
    q = a / b
    if q == 0.0 and a == 0.0:
        return 0.0
    return math.nextafter(q, _INF)


def mul_kernel(alo: float, ahi: float, blo: float, bhi: float) -> tuple[float, float]:
    """Endpoint product [alo,ahi]*[blo,bhi] with sign-case selection (two
    directed products in the common cases instead of eight)."""
    if alo >= 0.0:
        if blo >= 0.0:
            return mul_down(alo, blo), mul_up(ahi, bhi)
        if bhi <= 0.0:
            return mul_down(ahi, blo), mul_up(alo, bhi)
        return mul_down(ahi, blo), mul_up(ahi, bhi)
    if ahi <= 0.0:
        if blo >= 0.0:
            return mul_down(alo, bhi), mul_up(ahi, blo)
        if bhi <= 0.0:
            return mul_down(ahi, bhi), mul_up(alo, blo)
        return mul_down(alo, bhi), mul_up(alo, blo)
    if blo >= 0.0:
        return mul_down(alo, bhi), mul_up(ahi, bhi)
    if bhi <= 0.0:
        return mul_down(ahi, blo), mul_up(alo, blo)
    return (min(mul_down(alo, bhi), mul_down(ahi, blo)),
            max(mul_up(alo, blo), mul_up(ahi, bhi)))


def div_pos_int(lo: float, hi: float, k: int) -> tuple[float, float]:
    """Endpoint division by a positive integer."""
    return div_down(lo, k), div_up(hi, k)


def _check_finite(lo: float, hi: float) -> None:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise IntervalOverflow(f"endpoint left finite range: [{lo}, {hi}]")


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval [lo, hi] with finite binary64 endpoints.

    Every operation returns an interval containing the exact real image of
    its operands (outward rounding), with at most one ulp of slack per
    arithmetic operation beyond the correctly rounded endpoints.
    """

    lo: float
    hi: float

    def __post_init__(self):
        _check_finite(self.lo, self.hi)
        if self.lo > self.hi:
            raise InvalidParameter(f"inverted interval [{self.lo}, {self.hi}]")

    @staticmethod
    def point(x: float) -> Interval:
        x = float(x)
        return Interval(x, x)

    @staticmethod
    def _raw(lo: float, hi: float) -> Interval:
        """Construct without the ordering check (endpoints already valid)."""
        iv = object.__new__(Interval)
        object.__setattr__(iv, "lo", lo)
        object.__setattr__(iv, "hi", hi)
        return iv

    # -- queries -----------------------------------------------------------

    def width(self) -> float:
        """Upper bound on hi - lo."""
        return sub_up(self.hi, self.lo)

    def mid(self) -> float:
        m = self.lo + 0.5 * (self.hi - self.lo)
        if m < self.lo:
            m = self.lo
        if m > self.hi:
            m = self.hi
        return m

    def mag(self) -> float:
        return max(abs(self.lo), abs(self.hi))

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: Interval) -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def strictly_inside(self, other: Interval) -> bool:
        """True iff self lies in the open interior of other."""
        return other.lo < self.lo and self.hi < other.hi

    def is_disjoint(self, other: Interval) -> bool:
        return self.hi < other.lo or other.hi < self.lo

    def intersect(self, other: Interval) -> Interval | None:
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return None
        return Interval._raw(lo, hi)

    def hull(self, other: Interval) -> Interval:
        return Interval._raw(min(self.lo, other.lo), max(self.hi, other.hi))

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other) -> Interval:
        if isinstance(other, Interval):
            lo, hi = add_down(self.lo, other.lo), add_up(self.hi, other.hi)
        else:
            v = float(other)
            lo, hi = add_down(self.lo, v), add_up(self.hi, v)
        _check_finite(lo, hi)
        return Interval._raw(lo, hi)

    __radd__ = __add__

    def __neg__(self) -> Interval:
        return Interval._raw(-self.hi, -self.lo)

    def __sub__(self, other) -> Interval:
        if isinstance(other, Interval):
            lo, hi = add_down(self.lo, -other.hi), add_up(self.hi, -other.lo)
        else:
            v = float(other)
            lo, hi = add_down(self.lo, -v), add_up(self.hi, -v)
        _check_finite(lo, hi)
        return Interval._raw(lo, hi)

    def __rsub__(self, other) -> Interval:
        return (-self) + other

    def __mul__(self, other) -> Interval:
        if isinstance(other, Interval):
            lo, hi = mul_kernel(self.lo, self.hi, other.lo, other.hi)
        else:
            v = float(other)
            lo, hi = mul_kernel(self.lo, self.hi, v, v)
        _check_finite(lo, hi)
        return Interval._raw(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other) -> Interval:
        if not isinstance(other, Interval):
            other = Interval.point(other)
        if other.lo <= 0.0 <= other.hi:
            raise DivisionByZeroInterval(f"divisor {other} contains zero")
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        lo = min(div_down(a, c), div_down(a, d), div_down(b, c), div_down(b, d))
        hi = max(div_up(a, c), div_up(a, d), div_up(b, c), div_up(b, d))
        _check_finite(lo, hi)
        return Interval._raw(lo, hi)

    def __rtruediv__(self, other) -> Interval:
        return Interval.point(other) / self

    def sqr(self) -> Interval:
        """Tight enclosure of {x^2 : x in self} (tighter than self*self)."""
        a, b = self.lo, self.hi
        if a <= 0.0 <= b:
            m = max(abs(a), abs(b))
            return Interval._raw(0.0, mul_up(m, m))
        m_lo, m_hi = (a, b) if a > 0.0 else (-b, -a)
        return Interval._raw(mul_down(m_lo, m_lo), mul_up(m_hi, m_hi))

    def scale_pow2(self, f: float) -> Interval:
        """Exact scaling by a power of two (no rounding)."""
        lo, hi = self.lo * f, self.hi * f
        if f < 0.0:
            lo, hi = hi, lo
        _check_finite(lo, hi)
        return Interval._raw(lo, hi)

    def inflate(self, eps: float) -> Interval:
        if eps < 0.0:
            raise InvalidParameter("inflate requires eps >= 0")
        return Interval._raw(add_down(self.lo, -eps), add_up(self.hi, eps))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"


# Enclosure of pi: math.pi is the nearest double and rounds down, so the
# true value lies strictly between math.pi and its successor (width 1 ulp,
# well under the 4-ulp contract).
PI = Interval(math.pi, math.nextafter(math.pi, _INF))
TWO_PI = PI.scale_pow2(2.0)
HALF_PI = PI.scale_pow2(0.5)


def enclose_decimal(text: str) -> Interval:
    """Tightest interval containing the exact decimal value of ``text``.

    Exactly representable decimals give a point interval; otherwise the
    two neighboring doubles.
    """
    from fractions import Fraction

    v = Fraction(text)
    f = float(v)
    if not math.isfinite(f):
        raise IntervalOverflow(f"decimal {text!r} outside binary64 range")
    fv = Fraction(f)
    if fv == v:
        return Interval._raw(f, f)
    if fv < v:
        return Interval._raw(f, _up(f))
    return Interval._raw(_down(f), f)


def as_interval(x) -> Interval:
    """Coerce float/int (exact), decimal string (enclosed) or Interval."""
    if isinstance(x, Interval):
        return x
    if isinstance(x, str):
        return enclose_decimal(x)
    return Interval.point(float(x))


def _contains_integer(lo: float, hi: float) -> bool:
    return math.ceil(lo) <= math.floor(hi)


def _crit_inside(a: Interval, offset: Interval) -> bool:
    """Conservatively: does a contain a point offset + 2*k*pi for some k?

    Errs toward True (which only widens results downstream).
    """
    num_lo = add_down(a.lo, -offset.hi)
    num_hi = add_up(a.hi, -offset.lo)
    if num_lo > num_hi:
        num_lo, num_hi = num_hi, num_lo
    qlo = min(div_down(num_lo, TWO_PI.lo), div_down(num_lo, TWO_PI.hi))
    qhi = max(div_up(num_hi, TWO_PI.lo), div_up(num_hi, TWO_PI.hi))
    return _contains_integer(qlo, qhi)


def _libm_down(y: float) -> float:
    return _down(_down(y))


def _libm_up(y: float) -> float:
    return _up(_up(y))


def sin_kernel(alo: float, ahi: float) -> tuple[float, float]:
    """Endpoint enclosure of sin over [alo, ahi]."""
    if sub_up(ahi, alo) >= TWO_PI.lo:
        return -1.0, 1.0
    a = Interval._raw(alo, ahi)
    has_max = _crit_inside(a, HALF_PI)
    has_min = _crit_inside(a, -HALF_PI)
    slo, shi = math.sin(alo), math.sin(ahi)
    hi = 1.0 if has_max else min(max(_libm_up(slo), _libm_up(shi)), 1.0)
    lo = -1.0 if has_min else max(min(_libm_down(slo), _libm_down(shi)), -1.0)
    return lo, hi


def cos_kernel(alo: float, ahi: float) -> tuple[float, float]:
    """Endpoint enclosure of cos over [alo, ahi] (maxima at 2k*pi, minima
    at pi + 2k*pi)."""
    if sub_up(ahi, alo) >= TWO_PI.lo:
        return -1.0, 1.0
    a = Interval._raw(alo, ahi)
    has_max = _crit_inside(a, _ZERO_IV)
    has_min = _crit_inside(a, PI)
    clo, chi = math.cos(alo), math.cos(ahi)
    hi = 1.0 if has_max else min(max(_libm_up(clo), _libm_up(chi)), 1.0)
    lo = -1.0 if has_min else max(min(_libm_down(clo), _libm_down(chi)), -1.0)
    return lo, hi


_ZERO_IV = Interval._raw(0.0, 0.0)


def iv_sin(a: Interval) -> Interval:
    """Enclosure of sin over a.  Full range for widths >= 2*pi."""
    return Interval._raw(*sin_kernel(a.lo, a.hi))


def iv_cos(a: Interval) -> Interval:
    return Interval._raw(*cos_kernel(a.lo, a.hi))


def iv_exp(a: Interval) -> Interval:
    try:
        elo, ehi = math.exp(a.lo), math.exp(a.hi)
    except OverflowError as exc:
        raise IntervalOverflow(f"exp overflow on {a}") from exc
    if not math.isfinite(ehi):
        raise IntervalOverflow(f"exp overflow on {a}")
    return Interval._raw(max(_libm_down(elo), 0.0), _libm_up(ehi))


@dataclass(frozen=True, slots=True)
class Box2:
    """Axis-aligned planar box: x is the annular coordinate, y the vertical
    one (momentum, for the pendulum)."""

    x: Interval
    y: Interval

    @staticmethod
    def make(xlo, xhi, ylo, yhi) -> Box2:
        return Box2(Interval(float(xlo), float(xhi)), Interval(float(ylo), float(yhi)))

    @staticmethod
    def around(cx: float, cy: float, half_x: float, half_y: float) -> Box2:
        return Box2(
            Interval(sub_down(cx, half_x), add_up(cx, half_x)),
            Interval(sub_down(cy, half_y), add_up(cy, half_y)),
        )

    def widths(self) -> tuple[float, float]:
        return self.x.width(), self.y.width()

    def max_width(self) -> float:
        return max(self.x.width(), self.y.width())

    def midpoint(self) -> tuple[float, float]:
        return self.x.mid(), self.y.mid()

    def hull(self, other: Box2) -> Box2:
        return Box2(self.x.hull(other.x), self.y.hull(other.y))

    def intersect(self, other: Box2) -> Box2 | None:
        ix = self.x.intersect(other.x)
        if ix is None:
            return None
        iy = self.y.intersect(other.y)
        if iy is None:
            return None
        return Box2(ix, iy)

    def is_disjoint(self, other: Box2) -> bool:
        return self.x.is_disjoint(other.x) or self.y.is_disjoint(other.y)

    def contains_point(self, px: float, py: float) -> bool:
        return self.x.contains(px) and self.y.contains(py)

    def contains_box(self, other: Box2) -> bool:
        return self.x.contains_interval(other.x) and self.y.contains_interval(other.y)

    def strictly_inside(self, other: Box2) -> bool:
        """True iff self lies in the open interior of other (strict float
        inequalities; directed rounding supplies the rigor, no margins)."""
        return self.x.strictly_inside(other.x) and self.y.strictly_inside(other.y)

    def split(self, axis: str) -> tuple[Box2, Box2]:
        """Bisect at the midpoint of the chosen axis ('x' or 'y').

        The two halves cover the original exactly and overlap only in the
        shared midpoint edge.
        """
        iv = self.x if axis == "x" else self.y
        if not iv.hi > iv.lo:
            raise EmptySplit(f"axis {axis} has zero width")
        m = iv.mid()
        if not (iv.lo < m < iv.hi):
            raise EmptySplit(f"axis {axis} too thin to bisect")
        a = Interval._raw(iv.lo, m)
        b = Interval._raw(m, iv.hi)
        if axis == "x":
            return Box2(a, self.y), Box2(b, self.y)
        return Box2(self.x, a), Box2(self.x, b)

    def split_widest(self) -> tuple[Box2, Box2]:
        wx, wy = self.x.width(), self.y.width()
        return self.split("x" if wx >= wy else "y")

    def inflate(self, eps: float) -> Box2:
        return Box2(self.x.inflate(eps), self.y.inflate(eps))

    def translate_x(self, dx: Interval) -> Box2:
        return Box2(self.x + dx, self.y)

    def corners(self) -> list[tuple[float, float]]:
        return [
            (self.x.lo, self.y.lo),
            (self.x.hi, self.y.lo),
            (self.x.hi, self.y.hi),
            (self.x.lo, self.y.hi),
        ]

    def __repr__(self):
        return (
            f"Box2([{self.x.lo!r}, {self.x.hi!r}] x [{self.y.lo!r}, {self.y.hi!r}])"
        )
