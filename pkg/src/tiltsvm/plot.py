"""Standalone SVG line chart of a validation curve."""

from __future__ import annotations

import math
import os
from xml.sax.saxutils import escape

from tiltsvm._format import atomic_write_text
from tiltsvm.errors import NoResultError
from tiltsvm.model_selection import ValidationCurve

WIDTH, HEIGHT = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 40, 60
TRAIN_COLOR = "#1f77b4"
VALID_COLOR = "#d62728"

_LABELS = {"c": "C (inverse regularization)", "gamma": "gamma", "degree": "polynomial degree"}


def _num(x: float) -> str:
    return f"{x:.2f}"


def render_curve_svg(curve: ValidationCurve) -> str:
    """Return SVG markup; output bytes depend only on ``curve``."""
    pts = sorted(curve.successful(), key=lambda p: p.param_value)
    if not pts:
        raise NoResultError("curve has no successful points to plot")
    log_x = curve.axis.log_scale
    xs = [math.log10(p.param_value) if log_x else float(p.param_value) for p in pts]
    lo, hi = min(xs), max(xs)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    accs = [a for p in pts for a in (p.train_accuracy, p.validation_accuracy)]
    y_lo = max(0.0, math.floor(min(accs) * 10) / 10)
    y_hi = min(1.0, math.ceil(max(accs) * 10) / 10)
    if y_hi <= y_lo:
        y_lo, y_hi = max(0.0, y_lo - 0.1), min(1.0, y_hi + 0.1)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(v: float) -> float:
        return LEFT + (v - lo) / (hi - lo) * pw

    def sy(a: float) -> float:
        return TOP + (y_hi - a) / (y_hi - y_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="14">'
        f"{escape(curve.kernel.family)} kernel: accuracy vs {escape(curve.axis.name)}</text>",
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    step = 0.1 if y_hi - y_lo > 0.25 else 0.05
    for t in range(int(round((y_hi - y_lo) / step)) + 1):
        a = y_lo + t * step
        y = _num(sy(a))
        out.append(f'<line x1="{LEFT - 5}" y1="{y}" x2="{LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<line x1="{LEFT}" y1="{y}" x2="{LEFT + pw}" y2="{y}" stroke="#dddddd"/>')
        out.append(f'<text x="{LEFT - 8}" y="{y}" text-anchor="end" dominant-baseline="middle">{a:.2f}</text>')
    for p, v in zip(pts, xs):
        x = _num(sx(v))
        out.append(f'<line x1="{x}" y1="{TOP + ph}" x2="{x}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{TOP + ph + 18}" text-anchor="middle">{p.param_value:g}</text>')
    x_title = _LABELS[curve.axis.name] + (" (log scale)" if log_x else "")
    out.append(
        f'<text x="{LEFT + pw / 2:.0f}" y="{HEIGHT - 18}" text-anchor="middle">{escape(x_title)}</text>'
    )
    out.append(
        f'<text x="18" y="{TOP + ph / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {TOP + ph / 2:.0f})">accuracy</text>'
    )
    for name, color, attr in (
        ("train", TRAIN_COLOR, "train_accuracy"),
        ("validation", VALID_COLOR, "validation_accuracy"),
    ):
        coords = [(sx(v), sy(getattr(p, attr))) for p, v in zip(pts, xs)]
        if len(coords) > 1:
            path = " ".join(f"{_num(x)},{_num(y)}" for x, y in coords)
            out.append(
                f'<polyline class="{name}" points="{path}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
        for x, y in coords:
            out.append(f'<circle class="{name}" cx="{_num(x)}" cy="{_num(y)}" r="3.5" fill="{color}"/>')
    lx, ly = LEFT + pw + 15, TOP + 15
    for n, (name, color) in enumerate((("train", TRAIN_COLOR), ("validation", VALID_COLOR))):
        y = ly + 20 * n
        out.append(f'<line x1="{lx}" y1="{y}" x2="{lx + 25}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 32}" y="{y}" dominant-baseline="middle">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_curve_svg(curve: ValidationCurve, path: str | os.PathLike) -> None:
    atomic_write_text(path, render_curve_svg(curve))
