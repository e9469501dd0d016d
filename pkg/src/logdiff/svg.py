"""Tiny SVG line plots with optional log axes (no plotting dependency)."""
from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, Sequence, Tuple

W, H_, PAD = 480, 320, 56
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _transform(vals, log):
    out = []
    for v in vals:
        if log:
            if not v > 0:
                raise ValueError("log axis needs positive data")
            out.append(math.log10(v))
        else:
            out.append(float(v))
    return out


def _ticks(lo, hi, log):
    if log:
        return [float(k) for k in range(math.floor(lo), math.ceil(hi) + 1)]
    step = (hi - lo) / 4 or 1.0
    return [lo + i * step for i in range(5)]


def _label(v, log):
    return f"1e{int(v)}" if log else f"{v:.3g}"


def line_plot(series: Dict[str, Tuple[Sequence[float], Sequence[float]]], path, title: str = "",
              xlabel: str = "", ylabel: str = "", logx: bool = True, logy: bool = True) -> Path:
    """Write one polyline per series; axis bounds cover every point."""
    pts = {k: (_transform(x, logx), _transform(y, logy)) for k, (x, y) in series.items()}
    xs = [v for x, _ in pts.values() for v in x]
    ys = [v for _, y in pts.values() for v in y]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    if logx:
        x0, x1 = math.floor(x0), math.ceil(x1)
    if logy:
        y0, y1 = math.floor(y0), math.ceil(y1)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def px(x):
        return PAD + (x - x0) / (x1 - x0) * (W - 2 * PAD)

    def py(y):
        return H_ - PAD - (y - y0) / (y1 - y0) * (H_ - 2 * PAD)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H_}" viewBox="0 0 {W} {H_}">',
           f'<rect width="{W}" height="{H_}" fill="white"/>',
           f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{PAD}" y1="{H_ - PAD}" x2="{W - PAD}" y2="{H_ - PAD}" stroke="black"/>',
           f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H_ - PAD}" stroke="black"/>']
    for t in _ticks(x0, x1, logx):
        out.append(f'<text x="{px(t):.1f}" y="{H_ - PAD + 16}" text-anchor="middle" font-size="10">{_label(t, logx)}</text>')
    for t in _ticks(y0, y1, logy):
        out.append(f'<text x="{PAD - 6}" y="{py(t) + 3:.1f}" text-anchor="end" font-size="10">{_label(t, logy)}</text>')
    out.append(f'<text x="{W / 2:.1f}" y="{H_ - 12}" text-anchor="middle" font-size="12">{xlabel}</text>')
    out.append(f'<text x="14" y="{H_ / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 14 {H_ / 2:.1f})">{ylabel}</text>')
    for i, (name, (x, y)) in enumerate(pts.items()):
        c = COLOURS[i % len(COLOURS)]
        poly = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{poly}"/>')
        out.append(f'<text x="{W - PAD + 4}" y="{PAD + 14 * i}" font-size="10" fill="{c}">{name}</text>')
    out.append("</svg>")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(out) + "\n")
    return path


def table_plot(rows: Sequence[dict], path, title: str = "", x: str = "mu", y: str = "value",
               group: str = "t", **kw) -> Path:
    """Plot a ``mu,t,value`` table: one series per distinct ``group`` value."""
    series: Dict[str, Tuple[list, list]] = {}
    for r in rows:
        key = f"{group}={r[group]:g}"
        xs, ys = series.setdefault(key, ([], []))
        xs.append(r[x])
        ys.append(r[y])
    return line_plot(series, path, title=title, xlabel=x, ylabel=y, **kw)
