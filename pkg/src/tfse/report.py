"""CSV and SVG emission for experiment rows.

Both writers are byte-deterministic and write atomically (temp file, then
rename into place).
"""

from __future__ import annotations

import dataclasses
import logging
import math
import os
import sys
import tempfile
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

COLUMNS = {
    "solve": ("example", "alpha", "N", "M", "l2_final", "linf_max", "E_l", "E_g"),
    "table1": ("alpha", "N", "M", "E_l", "rate_l", "E_g", "rate_g"),
    "table2": ("alpha", "tau", "h", "N", "M", "E_l"),
    "two-mesh": ("example", "alpha", "N", "M", "e_L", "rate"),
    "stability": ("alpha", "N", "M", "epsilon", "amplification"),
    "probe-kernel": ("alpha", "gamma", "N", "error", "rate"),
}

# input parameters are printed in shortest round-trip form, measured values in %.4e
PARAMETER_COLUMNS = {"alpha", "tau", "h", "epsilon", "gamma"}


def format_cell(name: str, value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if not math.isfinite(value):
        return repr(value)
    if name in PARAMETER_COLUMNS:
        return repr(value)
    return f"{value:.4e}"


def csv_text(command: str, rows: Sequence[dict]) -> str:
    cols = COLUMNS[command]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(format_cell(c, row.get(c)) for c in cols))
    return "\n".join(lines) + "\n"


def as_dict(row) -> dict:
    return dataclasses.asdict(row) if dataclasses.is_dataclass(row) else dict(row)


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def emit_csv(command: str, rows: Sequence[dict], out: str | os.PathLike | None = None) -> None:
    """Header then one line per row; ``out=None`` writes to stdout."""
    text = csv_text(command, rows)
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        atomic_write(out, text)


def parse_csv(text: str) -> list[dict]:
    lines = text.strip("\n").split("\n")
    cols = lines[0].split(",")
    out = []
    for line in lines[1:]:
        row = {}
        for c, cell in zip(cols, line.split(",")):
            row[c] = None if cell == "" else (int(cell) if cell.lstrip("-").isdigit() else float(cell))
        out.append(row)
    return out


# plotted series per command: (column, label, dashed)
SERIES = {
    "table1": (("E_l", "local", False),),
    "two-mesh": (("e_L", "two-mesh", False),),
    "probe-kernel": (("error", "truncation", False),),
}

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
WIDTH, HEIGHT = 640, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 30, 50


def plot_series(command: str, rows: Sequence[dict]) -> list[tuple[str, float, str, bool, list[tuple[float, float]]]]:
    """``(column, alpha, label, dashed, [(log2 N, log2 err), ...])`` per polyline."""
    by_alpha: dict[float, list[dict]] = defaultdict(list)
    for row in rows:
        by_alpha[row["alpha"]].append(row)
    out = []
    for col, label, dashed in SERIES.get(command, ()):
        for alpha, group in by_alpha.items():
            pts = [(math.log2(r["N"]), math.log2(r[col])) for r in group if r.get(col) and r[col] > 0]
            if len(pts) >= 2:
                out.append((col, alpha, label, dashed, pts))
    return out


def svg_text(command: str, rows: Sequence[dict]) -> str | None:
    series = plot_series(command, rows)
    if not series:
        return None
    xs = [p[0] for s in series for p in s[4]]
    ys = [p[1] for s in series for p in s[4]]
    x0, x1 = math.floor(min(xs)), math.ceil(max(xs))
    y0, y1 = math.floor(min(ys)), math.ceil(max(ys))
    x1 = max(x1, x0 + 1)
    y1 = max(y1, y0 + 1)
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(v: float) -> float:
        return LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v: float) -> float:
        return TOP + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f"<title>{command}</title>",
        '<rect width="100%" height="100%" fill="white"/>',
        f'<g stroke="black" fill="none"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></g>',
        '<g font-family="sans-serif" font-size="11" fill="black">',
    ]
    for v in range(x0, x1 + 1):
        out.append(f'<text x="{sx(v):.2f}" y="{TOP + ph + 16}" text-anchor="middle">{v}</text>')
    step = max(1, (y1 - y0) // 10)
    for v in range(y0, y1 + 1, step):
        out.append(f'<text x="{LEFT - 6}" y="{sy(v) + 4:.2f}" text-anchor="end">{v}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle">log2 N</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.2f}" text-anchor="middle" transform="rotate(-90 16 {TOP + ph / 2:.2f})">log2 error</text>')
    out.append("</g>")

    # slope -1 guide through the first point of the first series
    gx, gy = series[0][4][0]
    out.append(
        f'<line class="guide" data-slope="-1" x1="{sx(gx):.2f}" y1="{sy(gy):.2f}" '
        f'x2="{sx(x1):.2f}" y2="{sy(gy - (x1 - gx)):.2f}" stroke="gray" stroke-dasharray="2,3"/>'
    )
    alphas = sorted({s[1] for s in series})
    for i, (col, alpha, label, dashed, pts) in enumerate(series):
        colour = PALETTE[alphas.index(alpha) % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        data = " ".join(f"{x:.6f},{y:.6f}" for x, y in pts)
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        out.append(
            f'<polyline data-series="{col}" data-alpha="{alpha!r}" data-points="{data}" '
            f'points="{coords}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>'
        )
        ly = TOP + 14 + 16 * i
        out.append(
            f'<text x="{WIDTH - RIGHT + 10}" y="{ly}" font-family="sans-serif" font-size="11" '
            f'fill="{colour}">{label} alpha={alpha!r}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(command: str, rows: Sequence[dict], out: str | os.PathLike) -> bool:
    """Write the SVG view of ``rows``; returns False when there is nothing to draw."""
    text = svg_text(command, rows)
    if text is None:
        log.warning("no plottable series for %s (need >= 2 rows per alpha)", command)
        return False
    atomic_write(out, text)
    return True


def rows_as_dicts(rows: Iterable) -> list[dict]:
    return [as_dict(r) for r in rows]
