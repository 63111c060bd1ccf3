"""Simulated measurement campaigns: environment sweeps through the full reader chain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .calib import SweepRecord, SweepRow
from .device import (
    DeviceGeometry,
    EnvironmentState,
    FrequencyGrid,
    SensorPhysics,
    band_coherent_gain,
    echo_time_width,
    synthesize_s11,
)
from .pipeline import Gate, PipelineSettings, gates_for, locate_echoes, read_echoes


@dataclass(frozen=True)
class SweepPoint:
    sweep_id: int
    env: EnvironmentState


def settings_for(geometry: DeviceGeometry, grid: FrequencyGrid, physics: SensorPhysics,
                 **overrides) -> PipelineSettings:
    """Pipeline settings with echo width and level normalization taken from the device."""
    fc = physics.v2_nominal / geometry.wavelength
    kw = dict(
        echo_width=echo_time_width(geometry, fc),
        gain=band_coherent_gain(geometry, grid, fc),
        peak_count=len(geometry.echoes),
    )
    kw.update(overrides)
    return PipelineSettings(**kw)


def temperature_points(temperatures: Iterable[float], field: float = -4.0,
                       reference_temperature: float = 25.0) -> list[SweepPoint]:
    return [SweepPoint(0, EnvironmentState(t, field, reference_temperature)) for t in temperatures]


def field_points(
    fields: Sequence[float],
    temperatures: Sequence[float],
    drift: Sequence[float] = (),
    reference_temperature: float = 25.0,
) -> list[SweepPoint]:
    """One field sweep per temperature, sweep id = position in ``temperatures``.

    ``drift[k]`` is the total temperature change over sweep k, applied
    linearly from the first to the last field sample.
    """
    drift = list(drift) or [0.0] * len(temperatures)
    if len(drift) != len(temperatures):
        raise ValueError("need one drift value per temperature")
    n = len(fields)
    out = []
    for k, (t0, d) in enumerate(zip(temperatures, drift)):
        for i, h in enumerate(fields):
            t = t0 + d * (i / (n - 1) if n > 1 else 0.0)
            out.append(SweepPoint(k, EnvironmentState(t, h, reference_temperature)))
    return out


def run_sweep(
    points: Sequence[SweepPoint],
    geometry: DeviceGeometry = DeviceGeometry(),
    physics: SensorPhysics = SensorPhysics(),
    grid: FrequencyGrid = FrequencyGrid(),
    settings: Optional[PipelineSettings] = None,
    snr_db: Optional[float] = None,
    seed: int = 0,
    peak_ids: Sequence[int] = (1, 2),
    gates: Optional[dict[int, Gate]] = None,
) -> SweepRecord:
    """Simulate every point and track the requested peaks.

    Gates are placed once, on the noise-free spectrum of the first point, and
    held fixed for the whole campaign; the zero crossing tracked for each peak
    is the one nearest that reference reading. Point i uses noise seed
    ``seed + i``.
    """
    if not points:
        return SweepRecord()
    if settings is None:
        settings = settings_for(geometry, grid, physics)
    first = synthesize_s11(geometry, physics, points[0].env, grid)
    if gates is None:
        all_gates = gates_for(locate_echoes(first, settings), settings)
        gates = {pid: all_gates[pid] for pid in peak_ids}
    anchors = {pid: r.tracked.f_zero for pid, r in read_echoes(first, gates, settings).items()}
    record = SweepRecord()
    for i, pt in enumerate(points):
        spectrum = synthesize_s11(geometry, physics, pt.env, grid, snr_db=snr_db, seed=seed + i)
        readings = read_echoes(spectrum, gates, settings, near=anchors)
        for pid in peak_ids:
            record.append(SweepRow(pt.env.temperature, pt.env.field, pid,
                                   readings[pid].tracked.f_zero, pt.sweep_id))
    return record


def parse_range(text: str) -> list[float]:
    """``start:stop:step`` inclusive of stop when it is reached within 1e-9 steps."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"range {text!r} must be start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step == 0 or (stop - start) * step < 0:
        raise ValueError(f"range {text!r} does not progress from start to stop")
    n = int(np.floor((stop - start) / step + 1e-9))
    # 12 significant digits strips the representation noise of start + i*step
    values = start + step * np.arange(n + 1)
    values[np.abs(values) < 1e-9 * abs(step)] = 0.0
    return [float(f"{v:.12g}") for v in values]
