"""Minimal standalone SVG output for decay curves (no plotting dependency)."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

W, H = 360, 280
PAD = 48
COLOURS = {"exponential": "#c0392b", "power": "#2471a3"}


def _panel(ox: float, title: str, xs, ys, errs, curves: dict, xlabel: str) -> list[str]:
    logs = [math.log10(y) for y in ys if y > 0]
    for vals in curves.values():
        logs += [math.log10(v) for v in vals if v > 0]
    x0, x1 = min(xs), max(xs)
    x1 = x1 if x1 > x0 else x0 + 1
    y0, y1 = math.floor(min(logs)), math.ceil(max(logs))
    y1 = y1 if y1 > y0 else y0 + 1

    def px(x):
        return ox + PAD + (x - x0) / (x1 - x0) * (W - 2 * PAD)

    def py(v):
        return H - PAD - (math.log10(v) - y0) / (y1 - y0) * (H - 2 * PAD)

    out = [
        f'<rect x="{ox + PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" '
        'fill="none" stroke="#444"/>',
        f'<text x="{ox + W / 2}" y="{PAD - 14}" text-anchor="middle" font-size="13">{escape(title)}</text>',
        f'<text x="{ox + W / 2}" y="{H - 10}" text-anchor="middle" font-size="11">{escape(xlabel)}</text>',
    ]
    for e in range(y0, y1 + 1):
        out.append(
            f'<text x="{ox + PAD - 4}" y="{py(10.0 ** e) + 4:.1f}" text-anchor="end" '
            f'font-size="10">1e{e}</text>'
        )
    for name, vals in curves.items():
        pts = " ".join(f"{px(x):.1f},{py(v):.1f}" for x, v in zip(xs, vals) if v > 0)
        out.append(f'<polyline points="{pts}" fill="none" stroke="{COLOURS[name]}" stroke-width="1.5"/>')
    for x, y, e in zip(xs, ys, errs):
        if y <= 0:
            continue
        lo = max(y - e, y * 1e-3)
        out.append(
            f'<line x1="{px(x):.1f}" y1="{py(y + e):.1f}" x2="{px(x):.1f}" y2="{py(lo):.1f}" stroke="#000"/>'
        )
        out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="3" fill="#000"/>')
    return out


def decay_svg(ns: Sequence[float], est: Sequence[float], err: Sequence[float],
              fits: dict[str, Sequence[float]] | None = None, title: str = "") -> str:
    """Two panels: ``P`` on a log scale against ``n`` and against ``log10 n``.

    ``fits`` maps ``"exponential"``/``"power"`` to fitted values at ``ns``.
    Points with zero estimate are omitted.
    """
    if not any(y > 0 for y in est):
        raise ValueError("nothing to plot: every estimate is zero")
    ns = [float(n) for n in ns]
    fits = dict(fits or {})
    body = _panel(0, "log-linear", ns, est, err, fits, "n")
    body += _panel(W, "log-log", [math.log10(n) for n in ns], est, err, fits, "log10 n")
    for i, name in enumerate(fits):
        body.append(
            f'<text x="{PAD + 110 * i}" y="{H + 18}" font-size="11" '
            f'fill="{COLOURS[name]}">{name} fit</text>'
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * W}" height="{H + 30}" '
        f'font-family="sans-serif">\n<title>{escape(title)}</title>\n' + "\n".join(body) + "\n</svg>\n"
    )
