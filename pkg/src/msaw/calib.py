"""
Sensitivity fits and differential temperature compensation.

Peak 1 travels the uncoated gap and sees temperature only; peak 2 sees both
temperature and field. Scaling peak 1's relative shift by TCF2/TCF1 and
subtracting it from peak 2's removes the common temperature term:

    compensated = shift2 - (tcf2 / tcf1) * shift1
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class SweepRow:
    temperature: float  # degC
    field: float  # mT
    peak_id: int
    f_zero: float  # Hz
    sweep_id: int = 0


@dataclass
class SweepRecord:
    """Tracked frequencies in acquisition order.

    Rows of one peak within one sweep are paired with the other peak's rows
    by their position in that sweep.
    """

    rows: list[SweepRow] = field(default_factory=list)

    def append(self, row: SweepRow) -> None:
        self.rows.append(row)

    def extend(self, rows: Iterable[SweepRow]) -> None:
        self.rows.extend(rows)

    def peak(self, peak_id: int) -> list[SweepRow]:
        return [r for r in self.rows if r.peak_id == peak_id]

    def sweep_ids(self) -> list[int]:
        return list(dict.fromkeys(r.sweep_id for r in self.rows))

    def series(self, sweep_id: int, peak_id: int) -> list[SweepRow]:
        return [r for r in self.rows if r.sweep_id == sweep_id and r.peak_id == peak_id]


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float
    residual_rms: float
    n: int


def linear_fit(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    """Ordinary least-squares line."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        raise CalibrationError("need at least two distinct control values for a fit")
    xm, ym = x.mean(), y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2))
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(slope, intercept, r2, math.sqrt(ss_res / x.size), int(x.size))


def relative_shift(f_i, f_i0):
    """(f_i - f_i0) / f_i0 in ppm."""
    f_i0 = np.asarray(f_i0, dtype=float)
    if np.any(f_i0 <= 0):
        raise CalibrationError("reference frequency must be positive")
    out = (np.asarray(f_i, dtype=float) - f_i0) / f_i0 * 1e6
    return float(out) if out.ndim == 0 else out


def fit_tcf(rows: Sequence[SweepRow], reference: Optional[float] = None) -> LinearFit:
    """TCF in ppm/degC from a temperature sweep of one peak.

    Shifts are taken against ``reference`` (Hz), by default the first row.
    """
    if not rows:
        raise CalibrationError("empty sweep")
    f0 = rows[0].f_zero if reference is None else reference
    t = [r.temperature for r in rows]
    if len(set(t)) < 2:
        raise CalibrationError("temperature is constant; TCF is undefined")
    return linear_fit(t, relative_shift([r.f_zero for r in rows], f0))


@dataclass(frozen=True)
class MagneticFit:
    fit: LinearFit
    window: tuple[float, float]
    f_reference: float

    @property
    def slope(self) -> float:
        """ppm/mT"""
        return self.fit.slope

    @property
    def hz_per_ut(self) -> float:
        return hz_per_microtesla(self.fit.slope, self.f_reference)


def hz_per_microtesla(slope_ppm_per_mt: float, f_reference: float) -> float:
    return slope_ppm_per_mt * 1e-9 * f_reference


def fit_magnetic_sensitivity(
    rows: Sequence[SweepRow],
    window: tuple[float, float] = (-0.19, 0.69),
    reference: Optional[float] = None,
) -> MagneticFit:
    """Field slope in ppm/mT over the samples inside ``window`` (inclusive)."""
    if not rows:
        raise CalibrationError("empty sweep")
    f0 = rows[0].f_zero if reference is None else reference
    lo, hi = window
    inside = [r for r in rows if lo <= r.field <= hi]
    if len(inside) < 2:
        raise CalibrationError(f"fewer than two samples inside window [{lo}, {hi}] mT")
    fit = linear_fit([r.field for r in inside], relative_shift([r.f_zero for r in inside], f0))
    return MagneticFit(fit, (lo, hi), f0)


@dataclass(frozen=True)
class SensitivityModel:
    tcf1: float
    tcf2: float
    slope: Optional[float] = None
    h_low: float = -0.19
    h_high: float = 0.69
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.h_low < self.h_high:
            raise ValueError("window bounds must be ordered")


def compensate(shift2, shift1, tcf1: float, tcf2: float):
    if tcf1 == 0:
        raise CalibrationError("cannot ratio against zero-TCF reference")
    return shift2 - (tcf2 / tcf1) * shift1


@dataclass(frozen=True)
class CompensatedPoint:
    sweep_id: int
    temperature: float
    field: float
    shift1: float
    shift2: float
    compensated: float


def compensate_sweep(
    record: SweepRecord,
    model: SensitivityModel,
    reference: str = "sweep",
    reference_sweep: Optional[int] = None,
) -> list[CompensatedPoint]:
    """Compensated peak-2 curve for every sweep in ``record``.

    ``reference="sweep"`` takes each sweep's first sample as f_i0 for that
    sweep; ``reference="global"`` takes the first sample of ``reference_sweep``
    (default: the first sweep) for all sweeps, which keeps the static
    temperature offset between sweeps visible in the raw shifts.
    """
    if reference not in ("sweep", "global"):
        raise ValueError("reference must be 'sweep' or 'global'")
    sweeps = record.sweep_ids()
    series = {(s, p): record.series(s, p) for s in sweeps for p in (1, 2)}

    missing = []
    for s in sweeps:
        n1, n2 = len(series[s, 1]), len(series[s, 2])
        if n1 != n2 or n1 == 0:
            missing += [f"sweep {s} index {i}" for i in range(min(n1, n2), max(n1, n2, 1))]
        else:
            for i, (a, b) in enumerate(zip(series[s, 1], series[s, 2])):
                if (a.temperature, a.field) != (b.temperature, b.field):
                    missing.append(f"sweep {s} index {i}")
    if missing:
        raise CalibrationError("unpairable rows: " + ", ".join(missing))

    if reference == "global":
        ref = sweeps[0] if reference_sweep is None else reference_sweep
        if ref not in sweeps:
            raise CalibrationError(f"reference sweep {ref} not in record")
        f0 = {p: series[ref, p][0].f_zero for p in (1, 2)}

    out = []
    for s in sweeps:
        p1, p2 = series[s, 1], series[s, 2]
        if reference == "sweep":
            f0 = {1: p1[0].f_zero, 2: p2[0].f_zero}
        sh1 = relative_shift([r.f_zero for r in p1], f0[1])
        sh2 = relative_shift([r.f_zero for r in p2], f0[2])
        comp = compensate(sh2, sh1, model.tcf1, model.tcf2)
        pts = [
            CompensatedPoint(s, a.temperature, a.field, float(x1), float(x2), float(c))
            for a, x1, x2, c in zip(p1, sh1, sh2, comp)
        ]
        out.extend(sorted(pts, key=lambda p: p.field))
    return out


def superposition_spread(points: Sequence[CompensatedPoint], attr: str = "compensated") -> float:
    """Largest across-sweep spread of ``attr`` at a common field sample."""
    by_field: dict[float, list[float]] = defaultdict(list)
    for p in points:
        by_field[round(p.field, 9)].append(getattr(p, attr))
    return max(max(v) - min(v) for v in by_field.values())
