"""Flat-file emitters: CSV tables, JSON records and a small SVG line chart."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Sequence

SCHEMA_VERSION = "zenopurify.run/1"


def fmt(x: float | None) -> str:
    """Shortest round-trip text for a float; empty for missing values."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def fmt_bool(x: bool) -> str:
    return "true" if x else "false"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def complex_json(z: complex) -> dict:
    return {"re": float(z.real), "im": float(z.imag)}


def _clean(obj):
    # JSON has no NaN/Infinity; map them to null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def dumps(record: dict) -> str:
    return json.dumps(_clean(record), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, record: dict) -> None:
    Path(path).write_text(dumps(record), encoding="utf-8", newline="\n")


def svg_chart(
    xs: Sequence[float],
    series: Sequence[tuple[str, str, Sequence[float | None]]],
    title: str = "",
    xlabel: str = "N",
    width: int = 640,
    height: int = 400,
) -> str:
    """Line chart with y fixed to [0, 1]; ``series`` holds (label, colour, values)."""
    left, right, top, bottom = 60, 130, 40, 50
    pw, ph = width - left - right, height - top - bottom
    x0, x1 = min(xs), max(xs)
    span = (x1 - x0) or 1.0

    def sx(x):
        return left + pw * (x - x0) / span

    def sy(y):
        return top + ph * (1.0 - y)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(6):
        y = i / 5
        out.append(f'<line x1="{left - 4}" y1="{sy(y):.2f}" x2="{left}" y2="{sy(y):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{sy(y) + 4:.2f}" text-anchor="end">{y:.1f}</text>')
    nticks = min(int(span), 10) or 1
    for i in range(nticks + 1):
        x = x0 + span * i / nticks
        out.append(f'<line x1="{sx(x):.2f}" y1="{top + ph}" x2="{sx(x):.2f}" y2="{top + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{sx(x):.2f}" y="{top + ph + 18}" text-anchor="middle">{x:g}</text>')
    out.append(f'<text x="{left + pw / 2}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    if title:
        out.append(f'<text x="{left + pw / 2}" y="{top - 15}" text-anchor="middle" font-size="14">{title}</text>')
    for k, (label, colour, ys) in enumerate(series):
        pts = " ".join(
            f"{sx(x):.2f},{sy(min(max(y, 0.0), 1.0)):.2f}" for x, y in zip(xs, ys) if y is not None
        )
        if pts:
            out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="2" points="{pts}"/>')
        ly = top + 20 * k + 10
        out.append(f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 40}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 46}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
