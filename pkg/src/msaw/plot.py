"""Minimal SVG line charts for the CSV tables the CLI writes.

Output is built as text with fixed number formatting, so identical input
gives byte-identical files.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional, Sequence
from xml.sax.saxutils import escape

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")


class PlotError(ValueError):
    pass


@dataclass(frozen=True)
class KindInfo:
    required: tuple[str, ...]
    xlabel: str
    ylabel: str
    x_scale: float = 1.0


KINDS = {
    "spectrum_db": KindInfo(("frequency_hz", "s11_db"), "Frequency (MHz)", "|S11| (dB)", 1e-6),
    "time_envelope_db": KindInfo(("time_s", "level_db"), "Time (ns)", "Level (dB)", 1e9),
    "shift_vs_temperature": KindInfo(("temperature_c", "peak_id", "f_zero_hz"),
                                     "Temperature (°C)", "Relative shift (ppm)"),
    "shift_vs_field": KindInfo(("sweep_id", "temperature_c", "field_mt", "peak_id", "f_zero_hz"),
                               "Field (mT)", "Relative shift (ppm)"),
    "compensated_overlay": KindInfo(("sweep_id", "temperature_c", "field_mt", "shift_ppm_compensated"),
                                    "Field (mT)", "Compensated shift (ppm)"),
    "dispersion_curve": KindInfo(("control", "mode_index", "phase_velocity_mps"),
                                 "Control value", "Phase velocity (m/s)"),
}
# shift_vs_field also accepts the magnetization-curve table directly
MAGCURVE_REQUIRED = ("field_mt", "shift_ppm")


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    title: str = ""
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None
    xrange: Optional[tuple[float, float]] = None
    yrange: Optional[tuple[float, float]] = None
    peak_id: Optional[int] = None
    width: int = 640
    height: int = 420

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotError(f"unknown plot kind {self.kind!r} (choose from {', '.join(KINDS)})")
        for name in ("xrange", "yrange"):
            r = getattr(self, name)
            if r is not None and not r[0] < r[1]:
                raise PlotError(f"{name} must be increasing")


@dataclass
class Series:
    label: str
    x: list[float]
    y: list[float]


def _check_columns(required: Sequence[str], columns: Sequence[str]) -> None:
    missing = [c for c in required if c not in columns]
    if missing:
        raise PlotError(f"missing columns: {', '.join(missing)}")


def _ppm(f: float, f0: float) -> float:
    return (f / f0 - 1.0) * 1e6


def _grouped(rows, key) -> "OrderedDict":
    groups: OrderedDict = OrderedDict()
    for r in rows:
        groups.setdefault(key(r), []).append(r)
    return groups


def build_series(spec: PlotSpec, columns: Sequence[str], rows: Sequence[dict]) -> list[Series]:
    """Turn table rows into labelled series for ``spec.kind``."""
    info = KINDS[spec.kind]
    kind = spec.kind
    if kind == "shift_vs_field" and all(c in columns for c in MAGCURVE_REQUIRED) \
            and "f_zero_hz" not in columns:
        return [Series("model", [r["field_mt"] for r in rows], [r["shift_ppm"] for r in rows])]
    _check_columns(info.required, columns)
    if spec.peak_id is not None and "peak_id" in columns:
        rows = [r for r in rows if int(r["peak_id"]) == spec.peak_id]
    sx = info.x_scale

    if kind == "spectrum_db":
        return [Series("S11", [r["frequency_hz"] * sx for r in rows], [r["s11_db"] for r in rows])]
    if kind == "time_envelope_db":
        return [Series("envelope", [r["time_s"] * sx for r in rows], [r["level_db"] for r in rows])]
    if kind == "shift_vs_temperature":
        out = []
        for pid, grp in _grouped(rows, lambda r: int(r["peak_id"])).items():
            f0 = grp[0]["f_zero_hz"]
            out.append(Series(f"peak {pid}", [r["temperature_c"] for r in grp],
                              [_ppm(r["f_zero_hz"], f0) for r in grp]))
        return out
    if kind == "shift_vs_field":
        # one common reference per peak keeps the static temperature offsets visible
        ref = {}
        for r in rows:
            ref.setdefault(int(r["peak_id"]), r["f_zero_hz"])
        out = []
        groups = _grouped(rows, lambda r: (int(r["peak_id"]), int(r["sweep_id"])))
        for (pid, _), grp in groups.items():
            label = f"peak {pid}, {grp[0]['temperature_c']:g} °C"
            out.append(Series(label, [r["field_mt"] for r in grp],
                              [_ppm(r["f_zero_hz"], ref[pid]) for r in grp]))
        return out
    if kind == "compensated_overlay":
        return [
            Series(f"{grp[0]['temperature_c']:g} °C", [r["field_mt"] for r in grp],
                   [r["shift_ppm_compensated"] for r in grp])
            for grp in _grouped(rows, lambda r: int(r["sweep_id"])).values()
        ]
    # dispersion_curve
    return [
        Series(f"mode {m}", [r["control"] for r in grp], [r["phase_velocity_mps"] for r in grp])
        for m, grp in _grouped(rows, lambda r: int(r["mode_index"])).items()
    ]


def nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if raw <= m * mag:
            return m * mag
    return 10 * mag  # pragma: no cover


def _ticks(lo: float, hi: float) -> list[float]:
    step = nice_step(hi - lo)
    first = math.ceil(lo / step - 1e-9)
    last = math.floor(hi / step + 1e-9)
    return [k * step for k in range(first, last + 1)]


def _tick_label(v: float, step: float) -> str:
    if v == 0 or abs(v) < step * 1e-6:
        return "0"
    if 1e-3 <= abs(step) and abs(v) < 1e6:
        decimals = max(0, -math.floor(math.log10(step) + 1e-9))
        if step * 10 ** decimals % 1:
            decimals += 1
        return f"{v:.{decimals}f}"
    return f"{v:.3g}"


def _extent(values: list[float], fixed: Optional[tuple[float, float]]) -> tuple[float, float]:
    if fixed is not None:
        return fixed
    if not values:
        return 0.0, 1.0
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = abs(lo) * 0.05 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.04
    return lo - pad, hi + pad


def simplify(points: list[tuple[float, float]], tol: float = 0.05) -> list[tuple[float, float]]:
    """Drop interior points lying within ``tol`` px of the line through their neighbours."""
    if len(points) < 3:
        return points
    kept = [points[0]]
    for i in range(1, len(points) - 1):
        (x0, y0), (x1, y1), (x2, y2) = kept[-1], points[i], points[i + 1]
        dx, dy = x2 - x0, y2 - y0
        norm = math.hypot(dx, dy)
        dist = abs(dy * (x1 - x0) - dx * (y1 - y0)) / norm if norm else math.hypot(x1 - x0, y1 - y0)
        if dist > tol:
            kept.append(points[i])
    kept.append(points[-1])
    return kept


def _f(v: float) -> str:
    return f"{v:.2f}"


def emit_plot(spec: PlotSpec, columns: Sequence[str], rows: Sequence[dict]) -> str:
    """Standalone SVG with axes, ticks and a legend."""
    series = build_series(spec, columns, rows)
    for s in series:
        pts = [(x, y) for x, y in zip(s.x, s.y) if math.isfinite(x) and math.isfinite(y)]
        s.x, s.y = [p[0] for p in pts], [p[1] for p in pts]
    info = KINDS[spec.kind]
    xlo, xhi = _extent([v for s in series for v in s.x], spec.xrange)
    ylo, yhi = _extent([v for s in series for v in s.y], spec.yrange)

    W, H = spec.width, spec.height
    left, right, top, bottom = 72, 20, 36 if spec.title else 16, 52
    pw, ph = W - left - right, H - top - bottom

    def px(x):
        return left + (x - xlo) / (xhi - xlo) * pw

    def py(y):
        return top + ph - (y - ylo) / (yhi - ylo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
        f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
    ]
    if spec.title:
        out.append(f'<text x="{_f(W / 2)}" y="22" text-anchor="middle" font-size="14">'
                   f'{escape(spec.title)}</text>')

    out.append('<g class="axes" stroke="#000" stroke-width="1">')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none"/>')
    xstep, ystep = nice_step(xhi - xlo), nice_step(yhi - ylo)
    labels = []
    for v in _ticks(xlo, xhi):
        x = px(v)
        out.append(f'<line x1="{_f(x)}" y1="{_f(top + ph)}" x2="{_f(x)}" y2="{_f(top + ph + 5)}"/>')
        labels.append(f'<text x="{_f(x)}" y="{_f(top + ph + 18)}" text-anchor="middle">'
                      f'{_tick_label(v, xstep)}</text>')
    for v in _ticks(ylo, yhi):
        y = py(v)
        out.append(f'<line x1="{left - 5}" y1="{_f(y)}" x2="{left}" y2="{_f(y)}"/>')
        labels.append(f'<text x="{left - 8}" y="{_f(y + 4)}" text-anchor="end">'
                      f'{_tick_label(v, ystep)}</text>')
    out.append("</g>")
    out.append('<g class="tick-labels">')
    out.extend(labels)
    out.append("</g>")
    xlabel = spec.xlabel if spec.xlabel is not None else info.xlabel
    ylabel = spec.ylabel if spec.ylabel is not None else info.ylabel
    out.append(f'<text x="{_f(left + pw / 2)}" y="{H - 12}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{_f(top + ph / 2)}" text-anchor="middle" '
               f'transform="rotate(-90 16 {_f(top + ph / 2)})">{escape(ylabel)}</text>')

    out.append(f'<clipPath id="plot-area"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath>')
    out.append('<g class="series" fill="none" stroke-width="1.5" clip-path="url(#plot-area)">')
    for i, s in enumerate(series):
        if not s.x:
            continue
        pts = simplify([(px(x), py(y)) for x, y in zip(s.x, s.y)])
        coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in pts)
        out.append(f'<polyline stroke="{PALETTE[i % len(PALETTE)]}" points="{coords}"/>')
    out.append("</g>")

    shown = [s for s in series if s.x]
    if shown:
        out.append('<g class="legend">')
        lx, ly = left + pw - 150, top + 10
        out.append(f'<rect x="{lx}" y="{ly}" width="140" height="{18 * len(shown) + 6}" '
                   f'fill="white" stroke="#888"/>')
        for i, s in enumerate(shown):
            y = ly + 15 + 18 * i
            color = PALETTE[series.index(s) % len(PALETTE)]
            out.append(f'<line x1="{lx + 8}" y1="{y - 4}" x2="{lx + 30}" y2="{y - 4}" '
                       f'stroke="{color}" stroke-width="2"/>')
            out.append(f'<text x="{lx + 36}" y="{y}">{escape(s.label)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
