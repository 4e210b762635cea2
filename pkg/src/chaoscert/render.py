"""SVG figures: boxes and iterate enclosures in the annulus or its
universal cover.

Rendering is deterministic for a fixed document (stable element order) and
emits plain SVG 1.1.  The annulus view reduces every box modulo the
circumference (splitting boxes that straddle the seam); the cover view
draws boxes at their lifted positions with fundamental-domain gridlines at
integer multiples of the circumference and dashed translates of the named
boxes across the drawn x-range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .document import RunConfig, dec_eset
from .geometry import EnclosureSet
from .interval import Box2

_COLORS = ["#2166ac", "#d6604d", "#4dac26", "#b2abd2", "#e08214", "#5aae61"]


@dataclass
class _Rect:
    x0: float
    y0: float
    x1: float
    y1: float
    fill: str
    opacity: float
    stroke: str | None
    dash: bool
    label: str


def _stage_opacity(stage: int) -> float:
    return max(0.25, 0.85 * (0.65 ** stage))


def _collect(doc_or_cfg) -> tuple[dict, list[tuple[str, EnclosureSet]], float]:
    """Named boxes, (source, stage) enclosures, circumference."""
    if isinstance(doc_or_cfg, RunConfig):
        cfg = doc_or_cfg
        chains: list[tuple[str, EnclosureSet]] = []
    else:
        cfg = RunConfig(doc_or_cfg["config"])
        ev = doc_or_cfg.get("evidence", {})
        if doc_or_cfg.get("kind") == "chaos":
            ev = ev.get("dpd", {})
        chains = []
        for name, key in (("U0", "chain0"), ("U1", "chain1")):
            for d in ev.get(key, []) or []:
                es = dec_eset(d)
                if es.stage > 0:
                    chains.append((name, es))
        for key in ("left_enclosure", "right_enclosure", "full_enclosure",
                    "free_enclosures"):
            if key in ev:
                items = ev[key] if isinstance(ev[key], list) else [ev[key]]
                for d in items:
                    chains.append((key, dec_eset(d)))
    m = cfg.build_map()
    return cfg.boxes, chains, m.circ_float


def _reduce_rect(x0: float, x1: float, circ: float) -> list[tuple[float, float]]:
    """x-pieces of [x0, x1] reduced into [0, circ) (1 or 2 pieces)."""
    k = math.floor(x0 / circ)
    a, b = x0 - k * circ, x1 - k * circ
    if b <= circ:
        return [(a, b)]
    return [(a, circ), (0.0, b - circ)]


def render_svg(doc_or_cfg, view: str = "annulus") -> str:
    """Build the SVG text for a certificate document or bare config."""
    if view not in ("annulus", "cover"):
        raise ValueError(f"view must be 'annulus' or 'cover', got {view!r}")
    boxes, chains, circ = _collect(doc_or_cfg)
    color_of: dict[str, str] = {}

    def color(name: str) -> str:
        if name not in color_of:
            color_of[name] = _COLORS[len(color_of) % len(_COLORS)]
        return color_of[name]

    rects: list[_Rect] = []

    def add_box(b: Box2, name: str, stage: int, dash: bool = False,
                label: str = "") -> None:
        op = _stage_opacity(stage)
        fill = color(name)
        if view == "annulus":
            for (a, c) in _reduce_rect(b.x.lo, b.x.hi, circ):
                rects.append(_Rect(a, b.y.lo, c, b.y.hi, fill, op,
                                   "#333333" if stage == 0 else None, dash, label))
        else:
            rects.append(_Rect(b.x.lo, b.y.lo, b.x.hi, b.y.hi, fill, op,
                               "#333333" if stage == 0 else None, dash, label))

    for name in sorted(boxes):
        add_box(boxes[name], name, 0, label=name)
    circ_iv = _circ_interval(circ)
    for name, es in sorted(chains, key=lambda t: (t[0], t[1].stage)):
        for mm in es.members:
            add_box(mm.materialize(circ_iv), name, es.stage)

    # frame
    if not rects:
        x_lo, x_hi, y_lo, y_hi = 0.0, circ, -1.0, 1.0
    else:
        x_lo = min(r.x0 for r in rects)
        x_hi = max(r.x1 for r in rects)
        y_lo = min(r.y0 for r in rects)
        y_hi = max(r.y1 for r in rects)
    if view == "annulus":
        x_lo, x_hi = 0.0, circ

    # dashed translates of the named boxes across the drawn x-range (cover)
    if view == "cover":
        for name in sorted(boxes):
            b = boxes[name]
            k_lo = math.floor((x_lo - b.x.hi) / circ)
            k_hi = math.ceil((x_hi - b.x.lo) / circ)
            for k in range(k_lo, k_hi + 1):
                if k == 0:
                    continue
                shifted = Box2.make(b.x.lo + k * circ, b.x.hi + k * circ,
                                    b.y.lo, b.y.hi)
                if shifted.x.hi < x_lo or shifted.x.lo > x_hi:
                    continue
                rects.append(_Rect(shifted.x.lo, shifted.y.lo, shifted.x.hi,
                                   shifted.y.hi, "none", 1.0, color(name), True,
                                   f"{name}+{k}"))

    pad_x = 0.05 * (x_hi - x_lo) or 1.0
    pad_y = 0.08 * (y_hi - y_lo) or 1.0
    x_lo -= pad_x
    x_hi += pad_x
    y_lo -= pad_y
    y_hi += pad_y

    width, height = 900.0, 520.0
    sx = width / (x_hi - x_lo)
    sy = height / (y_hi - y_lo)

    def X(x: float) -> float:
        return (x - x_lo) * sx

    def Y(y: float) -> float:
        return height - (y - y_lo) * sy

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.0f}" height="{height + 40:.0f}" '
        f'viewBox="0 0 {width:.0f} {height + 40:.0f}">')
    out.append(f'<rect x="0" y="0" width="{width:.0f}" height="{height + 40:.0f}" '
               'fill="#ffffff"/>')

    # fundamental-domain gridlines at multiples of the circumference
    k_lo = math.ceil(x_lo / circ)
    k_hi = math.floor(x_hi / circ)
    for k in range(k_lo, k_hi + 1):
        gx = X(k * circ)
        out.append(f'<line x1="{gx:.2f}" y1="0" x2="{gx:.2f}" y2="{height:.2f}" '
                   'stroke="#bbbbbb" stroke-width="1" stroke-dasharray="5,4"/>')
        out.append(f'<text x="{gx + 3:.2f}" y="{height - 6:.2f}" '
                   f'font-size="11" fill="#888888">{k}L</text>')

    for r in rects:
        x, y = X(r.x0), Y(r.y1)
        w = max((r.x1 - r.x0) * sx, 0.4)
        h = max((r.y1 - r.y0) * sy, 0.4)
        style = []
        if r.fill != "none":
            style.append(f'fill="{r.fill}" fill-opacity="{r.opacity:.2f}"')
        else:
            style.append('fill="none"')
        if r.stroke:
            dash = ' stroke-dasharray="4,3"' if r.dash else ""
            style.append(f'stroke="{r.stroke}" stroke-width="1"{dash}')
        out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{w:.2f}" '
                   f'height="{h:.2f}" {" ".join(style)}/>')

    # legend
    ly = height + 14
    lx = 10.0
    for name in sorted(color_of):
        out.append(f'<rect x="{lx:.1f}" y="{ly:.1f}" width="12" height="12" '
                   f'fill="{color_of[name]}" fill-opacity="0.8"/>')
        out.append(f'<text x="{lx + 16:.1f}" y="{ly + 10:.1f}" font-size="12" '
                   f'fill="#222222">{name}</text>')
        lx += 16 + 8 * len(name) + 24
    out.append(f'<text x="{width - 120:.1f}" y="{ly + 10:.1f}" font-size="12" '
               f'fill="#222222">view: {view}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _circ_interval(circ: float):
    from .interval import TWO_PI, Interval

    if abs(circ - 2.0 * math.pi) < 1e-12:
        return TWO_PI
    return Interval.point(circ)


def render_to_file(doc_or_cfg, view: str, path: str) -> None:
    svg = render_svg(doc_or_cfg, view)
    with open(path, "w") as fh:
        fh.write(svg)
