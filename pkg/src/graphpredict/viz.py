"""Deterministic SVG scatter plots and their CSV twins."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import math

from .errors import ValidationError

DEFAULT_PALETTE = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
]

# Binary healthy/sick plots get fixed green/red for readability.
_BINARY_COLORS = {
    frozenset(["0", "1"]): {"0": "#2ca02c", "1": "#d62728"},
    frozenset(["healthy", "sick"]): {"healthy": "#2ca02c", "sick": "#d62728"},
}

MAX_CLASSES = 12


@dataclass
class ScatterSpec:
    title: str
    points: list                        # (x, y, class label, optional tooltip)
    width: int = 800
    height: int = 600
    palette: list = field(default_factory=lambda: list(DEFAULT_PALETTE))
    legend: bool = True

    def validate(self):
        classes = []
        for i, pt in enumerate(self.points):
            x, y = pt[0], pt[1]
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValidationError(f"point {i}: non-finite coordinate")
            if pt[2] not in classes:
                classes.append(pt[2])
        if len(classes) > MAX_CLASSES:
            raise ValidationError(
                f"{len(classes)} classes exceed the {MAX_CLASSES}-class limit")
        return classes


def class_colors(spec: ScatterSpec) -> dict:
    """Class -> color, by first appearance order (binary classes fixed)."""
    classes = spec.validate()
    key = frozenset(str(c) for c in classes)
    if len(classes) == 2 and key in _BINARY_COLORS:
        table = _BINARY_COLORS[key]
        return {c: table[str(c)] for c in classes}
    return {c: spec.palette[i % len(spec.palette)]
            for i, c in enumerate(classes)}


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _bounds(values, fallback=(0.0, 1.0)):
    if not values:
        return fallback
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def scatter_svg(spec: ScatterSpec) -> str:
    """Self-contained SVG 1.1 document; byte-identical for identical specs."""
    colors = class_colors(spec)
    xs = [p[0] for p in spec.points]
    ys = [p[1] for p in spec.points]
    x0, x1 = _bounds(xs)
    y0, y1 = _bounds(ys)
    # plot rectangle inside the canvas
    left, right = 60.0, spec.width - 20.0
    top, bottom = 40.0, spec.height - 40.0

    def px(x):
        return left + (x - x0) / (x1 - x0) * (right - left)

    def py(y):
        return bottom - (y - y0) / (y1 - y0) * (bottom - top)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect x="0" y="0" width="{spec.width}" height="{spec.height}" '
        f'fill="white"/>',
        f'<text x="{_fmt(spec.width / 2)}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{_escape(spec.title)}</text>',
        f'<line x1="{_fmt(left)}" y1="{_fmt(bottom)}" x2="{_fmt(right)}" '
        f'y2="{_fmt(bottom)}" stroke="black"/>',
        f'<line x1="{_fmt(left)}" y1="{_fmt(bottom)}" x2="{_fmt(left)}" '
        f'y2="{_fmt(top)}" stroke="black"/>',
    ]
    for i in range(5):
        tx = x0 + (x1 - x0) * i / 4
        ty = y0 + (y1 - y0) * i / 4
        out.append(f'<text x="{_fmt(px(tx))}" y="{_fmt(bottom + 16)}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="10">{tx:.3g}</text>')
        out.append(f'<text x="{_fmt(left - 6)}" y="{_fmt(py(ty) + 3)}" '
                   f'text-anchor="end" font-family="sans-serif" '
                   f'font-size="10">{ty:.3g}</text>')
    for pt in spec.points:
        x, y, cls = pt[0], pt[1], pt[2]
        tooltip = pt[3] if len(pt) > 3 and pt[3] else None
        title = f'<title>{_escape(tooltip)}</title>' if tooltip else ""
        out.append(f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" '
                   f'fill="{colors[cls]}" fill-opacity="0.8">{title}</circle>'
                   if title else
                   f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" r="3" '
                   f'fill="{colors[cls]}" fill-opacity="0.8"/>')
    if spec.legend:
        ly = top + 4
        for cls, color in colors.items():
            out.append(f'<rect x="{_fmt(right - 130)}" y="{_fmt(ly)}" '
                       f'width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{_fmt(right - 116)}" y="{_fmt(ly + 9)}" '
                       f'font-family="sans-serif" font-size="11">'
                       f'{_escape(str(cls))}</text>')
            ly += 16
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return (str(text).replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def scatter_csv(spec: ScatterSpec) -> str:
    spec.validate()
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["x", "y", "class", "tooltip"])
    for pt in spec.points:
        tooltip = pt[3] if len(pt) > 3 and pt[3] is not None else ""
        w.writerow([repr(float(pt[0])), repr(float(pt[1])), pt[2], tooltip])
    return out.getvalue()


def parse_scatter_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    next(reader)
    return [(float(r[0]), float(r[1]), r[2], r[3] if r[3] else None)
            for r in reader]


def count_markers(svg_text: str) -> int:
    return svg_text.count("<circle")
