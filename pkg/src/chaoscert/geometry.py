"""Covering-space bookkeeping for the annulus R^2 / (x ~ x + L).

Lifted boxes carry an integer shift recording which fundamental-domain
translate their canonical planar representative came from; the denoted set
is ``planar + (shift * L, 0)`` with L the *real* circumference (held as an
interval enclosure, since e.g. 2*pi is not a binary64 number).  Integer
shifts make horizontal translation exact; materializing a shifted box into
planar coordinates costs one outward-rounded interval translation.

Two sufficient inessentiality criteria are implemented:

* strip: greedily align each piece's translate to keep the running x-hull
  small; hull width < L puts the union in an open vertical strip, which is
  an open disk of the annulus.
* corridor: when images stretch beyond one circumference the union can be
  inessential without fitting any strip.  We then search a rasterized
  window of the cover for a free 4-connected corridor of grid cells from
  below the union to above it, check that the corridor is disjoint from
  all its own horizontal-period translates and that no piece sits inside a
  pocket enclosed by the corridor.  Such a corridor, extended by vertical
  rays, is an end-to-end cut whose complement projects injectively to an
  open disk containing the union.

Both criteria are one-sided: True is a proof, False only means
"not proven here".
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .errors import TooWide
from .interval import Box2, Interval

_INF = math.inf


@dataclass(frozen=True, slots=True)
class LiftedBox:
    """A planar box plus the integer translate it denotes."""

    planar: Box2
    shift: int = 0

    def translated(self, k: int) -> LiftedBox:
        return LiftedBox(self.planar, self.shift + k)

    def materialize(self, circ: Interval) -> Box2:
        """Outward enclosure of the denoted set in planar coordinates."""
        if self.shift == 0:
            return self.planar
        return self.planar.translate_x(circ * self.shift)


@dataclass(frozen=True)
class EnclosureSet:
    """A finite union of lifted boxes covering F^stage of a source box."""

    members: tuple[LiftedBox, ...]
    stage: int = 0
    source: str = ""

    @staticmethod
    def single(box: Box2, shift: int = 0, stage: int = 0, source: str = "") -> EnclosureSet:
        return EnclosureSet((LiftedBox(box, shift),), stage=stage, source=source)

    def __len__(self):
        return len(self.members)

    def materialized(self, circ: Interval) -> list[Box2]:
        return [m.materialize(circ) for m in self.members]

    def hull(self, circ: Interval) -> Box2:
        boxes = self.materialized(circ)
        out = boxes[0]
        for b in boxes[1:]:
            out = out.hull(b)
        return out

    def y_hull(self) -> Interval:
        # y is unaffected by horizontal translates
        out = self.members[0].planar.y
        for m in self.members[1:]:
            out = out.hull(m.planar.y)
        return out


def _as_enclosure(obj) -> EnclosureSet:
    if isinstance(obj, EnclosureSet):
        return obj
    if isinstance(obj, Box2):
        return EnclosureSet.single(obj)
    if isinstance(obj, LiftedBox):
        return EnclosureSet((obj,))
    raise TypeError(f"expected EnclosureSet/Box2/LiftedBox, got {type(obj)!r}")


def reduce_box(b: Box2, circ: Interval) -> tuple[Box2, int]:
    """Translate b by an integer multiple of the circumference so that its
    x-midpoint lands in [0, L); returns (reduced, k) with b ~ reduced + k*L.

    The k == 0 case returns b unchanged, bit for bit.  Boxes at least one
    circumference wide have no canonical representative and are rejected.
    """
    if b.x.width() >= circ.lo:
        raise TooWide(f"x-width {b.x.width()} >= circumference {circ.lo}")
    l_mid = circ.mid()
    k = math.floor(b.x.mid() / l_mid)
    for _ in range(3):
        mid = b.x.mid() - k * l_mid
        if mid < 0.0:
            k -= 1
        elif mid >= l_mid:
            k += 1
        else:
            break
    if k == 0:
        return b, 0
    return b.translate_x(circ * (-k)), k


def canonicalize(lb: LiftedBox, circ: Interval) -> LiftedBox:
    reduced, k = reduce_box(lb.planar, circ)
    return LiftedBox(reduced, lb.shift + k)


def _translate_overlap_range(a: Interval, b: Interval, circ: Interval) -> range:
    """Integers k for which a and b + k*L might overlap in x (conservative)."""
    k_lo = math.floor((a.lo - b.hi) / circ.hi) - 1
    k_hi = math.ceil((a.hi - b.lo) / circ.lo) + 1
    return range(k_lo, k_hi + 1)


def annulus_disjoint(a, b, circ: Interval) -> bool:
    """True iff the projections of a and b to the annulus are provably
    disjoint (every integer translate of each b-member misses every
    a-member).  False means the outer enclosures overlap somewhere, which
    is not a proof of true intersection.
    """
    ea, eb = _as_enclosure(a), _as_enclosure(b)
    if ea.y_hull().is_disjoint(eb.y_hull()):
        return True
    for ma in ea.members:
        pa = ma.planar
        for mb in eb.members:
            pb = mb.planar
            if pa.y.is_disjoint(pb.y):
                continue
            for k in _translate_overlap_range(pa.x, pb.x, circ):
                if not pa.x.is_disjoint(pb.x + circ * k):
                    return False
    return True


def annulus_gap_lower_bound(a, b, circ: Interval) -> float:
    """Conservative lower bound on the annulus distance between two
    provably disjoint enclosures (0.0 when not disjoint).  Used only for
    ranking candidates, not for verdicts."""
    ea, eb = _as_enclosure(a), _as_enclosure(b)
    best = _INF
    for ma in ea.members:
        pa = ma.planar
        for mb in eb.members:
            pb = mb.planar
            dy = max(pb.y.lo - pa.y.hi, pa.y.lo - pb.y.hi, 0.0)
            dx = _INF
            for k in _translate_overlap_range(pa.x, pb.x, circ):
                bx = pb.x + circ * k
                dx = min(dx, max(bx.lo - pa.x.hi, pa.x.lo - bx.hi, 0.0))
            d = max(dx, dy) if dy > 0.0 or dx > 0.0 else 0.0
            best = min(best, d)
    return 0.0 if best is _INF else best


# ---------------------------------------------------------------------------
# inessentiality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorridorGrid:
    """Raster resolutions tried by the corridor fallback, coarse to fine.
    Columns per circumference must be powers of two so the grid is exactly
    period-aligned."""

    cols_per_circ: tuple[int, ...] = (64, 128, 256)
    rows: tuple[int, ...] = (96, 192, 384)
    pad_circ: float = 1.25  # window padding, in circumference units


def _strip_alignment(pieces: list[Box2], circ: Interval) -> tuple[bool, list[int], Interval]:
    """Greedy per-piece translate choice, in chain order.  Returns
    (hull_width < L, chosen shifts, final hull x-interval)."""
    l_mid = circ.mid()
    first = pieces[0]
    hull = first.x
    ks = [0]
    for p in pieces[1:]:
        base = round(((hull.lo + hull.hi) - (p.x.lo + p.x.hi)) / (2.0 * l_mid))
        best_k, best_w, best_hull = None, _INF, None
        for k in (base - 1, base, base + 1):
            cand = hull.hull(p.x + circ * k)
            w = cand.width()
            if w < best_w or (w == best_w and best_k is not None and k < best_k):
                best_k, best_w, best_hull = k, w, cand
        ks.append(best_k)
        hull = best_hull
    return hull.width() < circ.lo, ks, hull


def _collect_pieces(chain, circ: Interval) -> list[Box2]:
    pieces: list[Box2] = []
    for stage in chain:
        for m in _as_enclosure(stage).members:
            pieces.append(m.materialize(circ))
    return pieces


def inessential_union(chain, circ: Interval, grid: CorridorGrid | None = None) -> bool:
    """True => the projected union of all chain stages is inessential.

    Tries the aligned-strip criterion first, then the corridor search.
    False is a sound "not proven" verdict.
    """
    pieces = _collect_pieces(chain, circ)
    if not pieces:
        return True
    ok, _, _ = _strip_alignment(pieces, circ)
    if ok:
        return True
    grid = grid or CorridorGrid()
    for cols, rows in zip(grid.cols_per_circ, grid.rows):
        if _corridor_search(pieces, circ, cols, rows, grid.pad_circ):
            return True
    return False


def strip_evidence(chain, circ: Interval) -> tuple[bool, list[int], Interval]:
    """Expose the strip check's chosen translates and hull for certificates."""
    pieces = _collect_pieces(chain, circ)
    return _strip_alignment(pieces, circ)


def _shift_cols(k: int, col_w: float, l_lo: float, l_hi: float) -> range:
    """Column-index shifts that a horizontal translate by k*L can induce
    (conservative on both sides, sign-safe)."""
    a, b = k * l_lo, k * l_hi
    if a > b:
        a, b = b, a
    return range(int(math.floor(a / col_w)) - 1, int(math.ceil(b / col_w)) + 2)


def _corridor_search(pieces: list[Box2], circ: Interval, cols_per_circ: int,
                     n_rows: int, pad_circ: float) -> bool:
    l_lo, l_hi = circ.lo, circ.hi
    x_min = min(p.x.lo for p in pieces)
    x_max = max(p.x.hi for p in pieces)
    y_min = min(p.y.lo for p in pieces)
    y_max = max(p.y.hi for p in pieces)

    pad_x = pad_circ * l_hi
    x0, x1 = x_min - pad_x, x_max + pad_x
    # two clear rows below and above the union so the border rows are free
    row_h = (y_max - y_min) / max(n_rows - 4, 1)
    y0 = y_min - 2.0 * row_h
    col_w = l_hi / cols_per_circ
    n_cols = int(math.ceil((x1 - x0) / col_w)) + 1
    if n_cols * n_rows > 4_000_000:
        return False

    # conservative cell/range helpers: a cell c spans roughly
    # [x0 + c*col_w, x0 + (c+1)*col_w]; the +-1 margins absorb rounding
    def col_range(xiv: Interval) -> tuple[int, int]:
        return (int(math.floor((xiv.lo - x0) / col_w)) - 1,
                int(math.floor((xiv.hi - x0) / col_w)) + 1)

    def row_range(yiv: Interval) -> tuple[int, int]:
        return (int(math.floor((yiv.lo - y0) / row_h)) - 1,
                int(math.floor((yiv.hi - y0) / row_h)) + 1)

    blocked = bytearray(n_cols * n_rows)
    piece_cells: list[tuple[int, int, int, int]] = []
    for p in pieces:
        c_lo, c_hi = col_range(p.x)
        r_lo, r_hi = row_range(p.y)
        piece_cells.append((c_lo, c_hi, r_lo, r_hi))
        # block the piece and every period translate inside the window
        k_lo = int(math.floor((x0 - p.x.hi) / l_lo)) - 1
        k_hi = int(math.ceil((x1 - p.x.lo) / l_lo)) + 1
        for k in range(k_lo, k_hi + 1):
            cl, ch = col_range(p.x + circ * k)
            for c in range(max(cl, 0), min(ch, n_cols - 1) + 1):
                base = c * n_rows
                for r in range(max(r_lo, 0), min(r_hi, n_rows - 1) + 1):
                    blocked[base + r] = 1

    # BFS bottom row -> top row over free cells (in the cover: no x wrap)
    parent = [-1] * (n_cols * n_rows)
    dq = deque()
    for c in range(n_cols):
        idx = c * n_rows
        if not blocked[idx]:
            parent[idx] = idx
            dq.append(idx)
    goal = -1
    top = n_rows - 1
    while dq:
        idx = dq.popleft()
        c, r = divmod(idx, n_rows)
        if r == top:
            goal = idx
            break
        neighbors = []
        if r + 1 <= top:
            neighbors.append(idx + 1)
        if r - 1 >= 0:
            neighbors.append(idx - 1)
        if c + 1 < n_cols:
            neighbors.append(idx + n_rows)
        if c - 1 >= 0:
            neighbors.append(idx - n_rows)
        for nidx in neighbors:
            if not blocked[nidx] and parent[nidx] < 0:
                parent[nidx] = idx
                dq.append(nidx)
    if goal < 0:
        return False

    path = []
    idx = goal
    while True:
        path.append(idx)
        if parent[idx] == idx:
            break
        idx = parent[idx]
    path_set = set(path)
    cols_of = [i // n_rows for i in path]
    c_min, c_max = min(cols_of), max(cols_of)
    bottom_col = path[-1] // n_rows
    top_col = path[0] // n_rows

    # The corridor (path cells plus vertical rays at its end columns) must
    # be disjoint from all its own period translates, with >= 2 columns of
    # separation so closed cells cannot touch.
    span_cols = c_max - c_min
    k_max = int(math.ceil(span_cols * col_w / l_lo)) + 1
    for k in range(1, k_max + 1):
        for s in _shift_cols(k, col_w, l_lo, l_hi):
            for idx in path:
                c, r = divmod(idx, n_rows)
                for dc in (-1, 0, 1):
                    if (c + s + dc) * n_rows + r in path_set:
                        return False
                # translated rays meet only border-row cells
                if r == 0 and (abs(c - (bottom_col + s)) <= 1
                               or abs(c - (bottom_col - s)) <= 1):
                    return False
                if r == top and (abs(c - (top_col + s)) <= 1
                                 or abs(c - (top_col - s)) <= 1):
                    return False

    # Pocket check: no piece translate may sit in a bounded complement
    # component of the corridor.  Flood the complement of the path within a
    # padded bounding box; cells the flood cannot reach are pockets.
    fb_c0, fb_c1 = c_min - 2, c_max + 2
    fb_r0, fb_r1 = -1, n_rows  # one virtual row beyond each side for the rays
    fw = fb_c1 - fb_c0 + 1
    fh = fb_r1 - fb_r0 + 1
    wall = {divmod(idx, n_rows) for idx in path}
    wall.add((bottom_col, -1))
    wall.add((top_col, n_rows))
    reach = bytearray(fw * fh)
    dq = deque()

    def seed(fc, fr):
        if not reach[fc * fh + fr] and (fb_c0 + fc, fb_r0 + fr) not in wall:
            reach[fc * fh + fr] = 1
            dq.append((fc, fr))

    for fc in range(fw):
        seed(fc, 0)
        seed(fc, fh - 1)
    for fr in range(fh):
        seed(0, fr)
        seed(fw - 1, fr)
    while dq:
        fc, fr = dq.popleft()
        for dfc, dfr in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nfc, nfr = fc + dfc, fr + dfr
            if 0 <= nfc < fw and 0 <= nfr < fh and not reach[nfc * fh + nfr]:
                if (fb_c0 + nfc, fb_r0 + nfr) not in wall:
                    reach[nfc * fh + nfr] = 1
                    dq.append((nfc, nfr))

    k_window = int(math.ceil((n_cols + fw) * col_w / l_lo)) + 2
    for (c_lo, c_hi, r_lo, r_hi) in piece_cells:
        for k in range(-k_window, k_window + 1):
            for s in _shift_cols(k, col_w, l_lo, l_hi):
                if c_hi + s < fb_c0 or c_lo + s > fb_c1:
                    continue
                for c in range(max(c_lo + s, fb_c0), min(c_hi + s, fb_c1) + 1):
                    fc = c - fb_c0
                    for r in range(max(r_lo, fb_r0), min(r_hi, fb_r1) + 1):
                        fr = r - fb_r0
                        if (c, r) not in wall and not reach[fc * fh + fr]:
                            return False
    return True
