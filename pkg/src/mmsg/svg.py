"""Minimal SVG 1.1 writers. Output is a pure function of the input."""
from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


def _f(v: float) -> str:
    return f"{v:.3f}"


def _header(width: int, height: int) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def line_chart(series: list[tuple[str, list[float], list[float]]], *, title: str = "",
               xlabel: str = "", ylabel: str = "", width: int = 640, height: int = 420) -> str:
    """Line chart with markers and a legend; `series` is [(label, xs, ys), ...]."""
    left, right, top, bottom = 70, 170, 40, 60
    pw, ph = width - left - right, height - top - bottom
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    xlo, xhi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if xhi == xlo:
        xlo, xhi = xlo - 0.5, xhi + 0.5
    yhi = max(ys) if ys else 1.0
    yhi = max(0.1, math.ceil(yhi * 10.0 + 1e-9) / 10.0)
    ylo = 0.0

    def px(x):
        return left + (x - xlo) / (xhi - xlo) * pw

    def py(y):
        return top + ph - (y - ylo) / (yhi - ylo) * ph

    out = _header(width, height)
    out.append(f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" '
               f'font-size="15">{escape(title)}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    for t in _ticks(xlo, xhi):
        out.append(f'<line x1="{_f(px(t))}" y1="{top + ph}" x2="{_f(px(t))}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_f(px(t))}" y="{top + ph + 19}" text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{t:.4g}</text>')
    for t in _ticks(ylo, yhi):
        out.append(f'<line x1="{left - 5}" y1="{_f(py(t))}" x2="{left}" y2="{_f(py(t))}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{_f(py(t) + 4)}" text-anchor="end" font-family="sans-serif" '
                   f'font-size="11">{t:.3g}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle" font-family="sans-serif" '
               f'font-size="13">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
               f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(ylabel)}</text>')

    for i, (label, sx, sy) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_f(px(x))},{_f(py(y))}" for x, y in zip(sx, sy))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        for x, y in zip(sx, sy):
            out.append(f'<circle cx="{_f(px(x))}" cy="{_f(py(y))}" r="3" fill="{color}"/>')
        ly = top + 14 + 18 * i
        lx = left + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 28}" y="{ly + 4}" font-family="sans-serif" font-size="11">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _marker(shape: str, x: float, y: float, color: str, r: float = 4.0) -> str:
    if shape == "circle":
        return f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{r}" fill="{color}" fill-opacity="0.8"/>'
    if shape == "triangle":
        pts = f"{_f(x)},{_f(y - r)} {_f(x - r)},{_f(y + r)} {_f(x + r)},{_f(y + r)}"
        return f'<polygon points="{pts}" fill="{color}" fill-opacity="0.8"/>'
    return (f'<rect x="{_f(x - r)}" y="{_f(y - r)}" width="{2 * r}" height="{2 * r}" '
            f'fill="{color}" fill-opacity="0.8"/>')


MARKERS = {"highly-pure": "circle", "moderate": "triangle", "highly-mixed": "square"}


def ternary_plot(points, *, title: str = "", labels=("Comp1", "Comp2", "Comp3"), size: int = 520) -> str:
    """Points are (x, y, purity_class, home_base) in unit-triangle coordinates."""
    margin = 60
    side = size - 2 * margin
    height = int(side * math.sqrt(3) / 2 + 2 * margin + 60)

    def tx(x):
        return margin + x * side

    def ty(y):
        return height - margin - 40 - y * side

    out = _header(size, height)
    out.append(f'<text x="{size / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" '
               f'font-size="15">{escape(title)}</text>')
    verts = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2)]
    pts = " ".join(f"{_f(tx(x))},{_f(ty(y))}" for x, y in verts)
    out.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    offsets = [(-8, 18, "end"), (8, 18, "start"), (0, -10, "middle")]
    for (x, y), name, (dx, dy, anchor) in zip(verts, labels, offsets):
        out.append(f'<text x="{_f(tx(x) + dx)}" y="{_f(ty(y) + dy)}" text-anchor="{anchor}" '
                   f'font-family="sans-serif" font-size="13">{escape(name)}</text>')
    for x, y, cls, home in points:
        out.append(_marker(MARKERS[cls], tx(x), ty(y), PALETTE[home % len(PALETTE)]))
    ly = height - 30
    for j, (cls, shape) in enumerate(MARKERS.items()):
        lx = margin + j * 140
        out.append(_marker(shape, lx, ly, "#555555"))
        out.append(f'<text x="{lx + 10}" y="{ly + 4}" font-family="sans-serif" font-size="11">{cls}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
