"""Self-contained SVG of cost against strong queries, one series per delta."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from ..errors import UsageError
from .records import ExperimentRecord

WIDTH, HEIGHT = 720, 440
MARGIN = dict(left=80, right=150, top=40, bottom=60)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
LOG_Y_SPAN = 100.0


def _series(records, x: str, y: str, group: str) -> dict:
    """Mean ``(x, y)`` per (group, const) cell, sorted by ``x`` inside each group."""
    cells: dict = {}
    for r in records:
        xv, yv = getattr(r, x), getattr(r, y)
        if xv is None or yv is None:
            continue
        cells.setdefault(getattr(r, group), {}).setdefault(r.const, []).append((float(xv), float(yv)))
    out = {}
    for g in sorted(cells, key=lambda v: (v is None, v)):
        pts = []
        for vals in cells[g].values():
            xs, ys = zip(*vals)
            pts.append((sum(xs) / len(xs), sum(ys) / len(ys)))
        out[g] = sorted(pts)
    return out


class _Axis:
    def __init__(self, lo: float, hi: float, log: bool, pix_lo: float, pix_hi: float):
        if log:
            lo, hi = math.log10(lo), math.log10(hi)
        if hi - lo < 1e-12:
            pad = 0.5 if log else max(abs(lo) * 0.1, 1.0)
            lo, hi = lo - pad, hi + pad
        else:
            pad = (hi - lo) * 0.05
            lo, hi = lo - pad, hi + pad
        self.lo, self.hi, self.log = lo, hi, log
        self.pix_lo, self.pix_hi = pix_lo, pix_hi

    def __call__(self, v: float) -> float:
        if self.log:
            v = math.log10(v)
        return self.pix_lo + (v - self.lo) / (self.hi - self.lo) * (self.pix_hi - self.pix_lo)

    def ticks(self) -> list[float]:
        if self.log:
            a, b = math.ceil(self.lo), math.floor(self.hi)
            if b >= a:
                return [10.0 ** e for e in range(a, b + 1)]
            return [10.0 ** ((self.lo + self.hi) / 2)]
        step = (self.hi - self.lo) / 4
        return [self.lo + i * step for i in range(5)]


def _label(v: float) -> str:
    return f"{v:.3g}"


def render_svg(records: Sequence[ExperimentRecord], *, x: str = "strong_distinct",
               y: str = "true_cost", group: str = "delta", title: Optional[str] = None) -> str:
    series = _series(records, x, y, group)
    if not any(series.values()):
        raise UsageError(f"no records with both {x} and {y} to plot")
    base = [r.baseline_cost for r in records if r.baseline_cost is not None]
    weak = [r.weak_baseline_cost for r in records if r.weak_baseline_cost is not None]
    rules = []
    if base:
        rules.append(("strong baseline", base[0], "#444444"))
    if weak:
        rules.append(("weak baseline", sum(weak) / len(weak), "#999999"))

    xs = [p[0] for pts in series.values() for p in pts]
    ys = [p[1] for pts in series.values() for p in pts] + [v for _, v, _ in rules]
    # log-x needs positive values; zero-query runs sit at the left edge
    x_floor = min((v for v in xs if v > 0), default=1.0) / 2
    xs = [max(v, x_floor) for v in xs]
    y_pos = [v for v in ys if v > 0]
    log_y = bool(y_pos) and len(y_pos) == len(ys) and max(ys) / min(ys) > LOG_Y_SPAN

    left, top = MARGIN["left"], MARGIN["top"]
    right, bottom = WIDTH - MARGIN["right"], HEIGHT - MARGIN["bottom"]
    ax = _Axis(min(xs), max(xs), True, left, right)
    ay = _Axis(min(ys), max(ys), log_y, bottom, top)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
           f'{escape(title or f"{y} vs {x}")}</text>',
           f'<rect class="frame" x="{left}" y="{top}" width="{right - left}" height="{bottom - top}" '
           f'fill="none" stroke="black"/>']
    for t in ax.ticks():
        px = ax(t)
        out.append(f'<line class="tick" x1="{px:.2f}" y1="{bottom}" x2="{px:.2f}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{px:.2f}" y="{bottom + 18}" text-anchor="middle">{_label(t)}</text>')
    for t in ay.ticks():
        py = ay(t)
        out.append(f'<line class="tick" x1="{left - 5}" y1="{py:.2f}" x2="{left}" y2="{py:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py + 4:.2f}" text-anchor="end">{_label(t)}</text>')
    out.append(f'<text x="{(left + right) / 2:.1f}" y="{HEIGHT - 18}" text-anchor="middle">'
               f'{escape(x)} (log)</text>')
    out.append(f'<text x="18" y="{(top + bottom) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {(top + bottom) / 2:.1f})">{escape(y)}'
               f'{" (log)" if log_y else ""}</text>')

    for name, value, colour in rules:
        py = ay(value)
        out.append(f'<line class="baseline" x1="{left}" y1="{py:.2f}" x2="{right}" y2="{py:.2f}" '
                   f'stroke="{colour}" stroke-dasharray="6 4"/>')
        out.append(f'<text x="{right + 6}" y="{py + 4:.2f}" fill="{colour}">{name}</text>')

    legend_y = top + 10
    for i, (g, pts) in enumerate(series.items()):
        colour = PALETTE[i % len(PALETTE)]
        coords = [(ax(max(px, x_floor)), ay(py)) for px, py in pts]
        out.append(f'<g class="series" data-{escape(group)}="{g}">')
        if len(coords) > 1:
            path = " ".join(f"{cx:.2f},{cy:.2f}" for cx, cy in coords)
            out.append(f'<polyline points="{path}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
        for cx, cy in coords:
            out.append(f'<circle class="marker" cx="{cx:.2f}" cy="{cy:.2f}" r="3.5" fill="{colour}"/>')
        out.append("</g>")
        out.append(f'<text x="{right + 6}" y="{legend_y + 16 * i:.1f}" fill="{colour}">'
                   f'{escape(group)}={g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(records: Sequence[ExperimentRecord], path, **kw) -> Path:
    """Write :func:`render_svg` output to ``path``; empty input is an error."""
    if not records:
        raise UsageError("cannot plot an empty record set")
    p = Path(path)
    p.write_text(render_svg(records, **kw))
    return p
