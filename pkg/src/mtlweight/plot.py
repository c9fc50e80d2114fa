"""Standalone SVG line charts of weight trajectories (no plotting dependency)."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape, quoteattr

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")
DASHES = ("", "6,3", "2,3", "8,3,2,3")

WIDTH, HEIGHT = 760, 440
LEFT, RIGHT, TOP, BOTTOM = 60, 190, 30, 50


def nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    v = start
    while v <= hi + step * 1e-9:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt_tick(v: float) -> str:
    return format(v, ".4g")


def line_chart(series: Mapping[str, Sequence[tuple[float, float]]], title: str,
               x_label: str, y_label: str, styles: Mapping[str, tuple[str, str]] | None = None) -> str:
    """Render ``{label: [(x, y), ...]}`` as an SVG document string.

    ``styles`` optionally maps a label to ``(colour, dasharray)``.
    """
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
           f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{WIDTH / 2:g}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>']

    pts = [p for s in series.values() for p in s]
    if pts:
        xs, ys = [p[0] for p in pts], [p[1] for p in pts]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(0.0, min(ys)), max(ys)
    else:
        x_lo, x_hi, y_lo, y_hi = 0.0, 1.0, 0.0, 1.0
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_ticks, y_ticks = nice_ticks(x_lo, x_hi), nice_ticks(y_lo, y_hi)
    x_lo, x_hi = min([x_lo] + x_ticks), max([x_hi] + x_ticks)
    y_lo, y_hi = min([y_lo] + y_ticks), max([y_hi] + y_ticks)

    def sx(x):
        return LEFT + (x - x_lo) / (x_hi - x_lo) * pw

    def sy(y):
        return TOP + ph - (y - y_lo) / (y_hi - y_lo) * ph

    out.append(f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>')
    out.append(f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>')
    for t in x_ticks:
        x = sx(t)
        out.append(f'<line x1="{x:.2f}" y1="{TOP + ph}" x2="{x:.2f}" y2="{TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{TOP + ph + 16}" text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in y_ticks:
        y = sy(t)
        out.append(f'<line x1="{LEFT - 4}" y1="{y:.2f}" x2="{LEFT}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 7}" y="{y + 4:.2f}" text-anchor="end">{_fmt_tick(t)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:g}" y="{HEIGHT - 12}" text-anchor="middle">{escape(x_label)}</text>')
    out.append(f'<text x="14" y="{TOP + ph / 2:g}" text-anchor="middle" '
               f'transform="rotate(-90 14 {TOP + ph / 2:g})">{escape(y_label)}</text>')

    if not pts:
        out.append(f'<text x="{LEFT + pw / 2:g}" y="{TOP + ph / 2:g}" text-anchor="middle" '
                   f'font-size="16" fill="#666">no data</text>')

    for i, (label, s) in enumerate(series.items()):
        colour, dash = (styles or {}).get(label, (PALETTE[i % len(PALETTE)], ""))
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in s)
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash_attr} '
                   f'points="{coords}"><title>{escape(label)}</title></polyline>')
        ly = TOP + 10 + 15 * i
        lx = LEFT + pw + 12
        out.append(f'<rect x="{lx}" y="{ly - 4}" width="18" height="3" fill="{colour}"/>')
        out.append(f'<text x="{lx + 24}" y="{ly}" data-series={quoteattr(label)}>{escape(label)}</text>')

    out.append("</svg>")
    return "\n".join(out) + "\n"


def weights_chart(rows: Sequence[Mapping[str, str]]) -> str:
    """Chart one weight series per (strategy, task) from weights-log rows."""
    series: dict[str, list[tuple[float, float]]] = {}
    styles: dict[str, tuple[str, str]] = {}
    strategies: list[str] = []
    tasks: list[str] = []
    for r in rows:
        if r["strategy"] not in strategies:
            strategies.append(r["strategy"])
        if r["task"] not in tasks:
            tasks.append(r["task"])
        label = f'{r["strategy"]}/{r["task"]}'
        series.setdefault(label, []).append((float(r["epoch"]), float(r["weight"])))
        styles[label] = (PALETTE[tasks.index(r["task"]) % len(PALETTE)],
                         DASHES[strategies.index(r["strategy"]) % len(DASHES)])
    for s in series.values():
        s.sort()
    return line_chart(series, "Task weight by epoch", "epoch", "weight", styles)
