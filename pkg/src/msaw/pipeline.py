"""
Reader-side processing of a one-port S11 record.

Spectrum -> time response (zero-padded inverse DFT) -> peak detection ->
time gate around one echo -> back to the frequency grid -> unwrapped phase
-> frequency of zero phase. The fractional shift of that frequency between
two measurements equals the fractional velocity change of the gated echo.

Time-axis convention: with S_n sampled at f_start + n*df, the inverse DFT
puts an echo exp(-2j*pi*f*tau) at t = tau, with dt = 1/(M*df) for M padded
points. Amplitude convention: the transform is scaled by 1/(N*gain) where N is
the number of measured points, so a flat 0 dB echo peaks at 1/gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .device import Spectrum


class GridError(ValueError):
    """Frequency samples are not on a uniform grid."""


class GateError(ValueError):
    """Gate does not fit inside the time record."""


class ZeroMagnitudeError(ValueError):
    """A zero-magnitude sample inside the analysis band blocks unwrapping."""


class NoCrossingError(ValueError):
    """Unwrapped phase never crosses zero in the search band."""


def spectrum_from_samples(frequencies, values, rtol: float = 1e-9) -> Spectrum:
    """Build a :class:`Spectrum` from explicit samples, checking uniformity."""
    f = np.asarray(frequencies, dtype=float)
    if f.size < 2:
        raise GridError("need at least two frequency samples")
    steps = np.diff(f)
    step = (f[-1] - f[0]) / (f.size - 1)
    if step <= 0 or np.max(np.abs(steps - step)) > rtol * abs(f[-1]):
        raise GridError("frequency grid is not uniform")
    return Spectrum(float(f[0]), float(f[-1]), np.asarray(values, dtype=complex))


@dataclass(frozen=True, eq=False)
class TimeResponse:
    dt: float
    values: np.ndarray
    n_source: int  # measured points before padding
    f_start: float
    f_stop: float
    gain: float = 1.0
    t_start: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.values.size)

    @property
    def duration(self) -> float:
        return self.dt * self.values.size

    @property
    def envelope(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def level_db(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20 * np.log10(self.envelope)

    def to_spectrum(self) -> Spectrum:
        """Forward transform back onto the measured frequency grid."""
        m = self.values.size
        values = np.fft.fft(self.values)[: self.n_source] * (self.n_source * self.gain / m)
        return Spectrum(self.f_start, self.f_stop, values)


def to_time_domain(spectrum, zero_pad_factor: int = 4, gain: float = 1.0) -> TimeResponse:
    if not isinstance(spectrum, Spectrum):
        spectrum = spectrum_from_samples(*spectrum)
    if zero_pad_factor < 1 or int(zero_pad_factor) != zero_pad_factor:
        raise ValueError("zero_pad_factor must be an integer >= 1")
    if not gain > 0:
        raise ValueError("gain must be positive")
    n = spectrum.n_points
    m = n * int(zero_pad_factor)
    values = np.fft.ifft(spectrum.values, n=m) * (m / (n * gain))
    return TimeResponse(
        dt=1.0 / (m * spectrum.df),
        values=values,
        n_source=n,
        f_start=spectrum.f_start,
        f_stop=spectrum.f_stop,
        gain=gain,
    )


@dataclass(frozen=True)
class Peak:
    time: float
    level_db: float


class PeakList(list):
    """Peaks in descending level; ``incomplete`` when fewer than requested."""

    incomplete: bool = False


def detect_peaks(tr: TimeResponse, count: int, min_separation: float) -> PeakList:
    """Strongest local maxima of the envelope, at least ``min_separation`` apart.

    The record is treated as periodic. Each peak is refined with a parabola
    through the three samples around the maximum.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    env = tr.envelope
    left, right = np.roll(env, 1), np.roll(env, -1)
    idx = np.flatnonzero((env >= left) & (env > right) & (env > 0))
    # descending level, earlier time first on ties
    idx = idx[np.lexsort((idx, -env[idx]))]
    chosen: list[int] = []
    for i in idx:
        if all(abs(i - j) * tr.dt >= min_separation for j in chosen):
            chosen.append(int(i))
            if len(chosen) == count:
                break
    peaks = PeakList(_refine(env, i, tr.dt, tr.t_start) for i in chosen)
    peaks.incomplete = len(peaks) < count
    return peaks


def _refine(env: np.ndarray, i: int, dt: float, t0: float) -> Peak:
    m = env.size
    a, b, c = env[(i - 1) % m], env[i], env[(i + 1) % m]
    denom = a - 2 * b + c
    offset = 0.5 * (a - c) / denom if denom < 0 else 0.0
    level = b - 0.25 * (a - c) * offset
    return Peak(t0 + (i + offset) * dt, 20 * math.log10(level))


@dataclass(frozen=True)
class Gate:
    """Time window; ``taper`` is the cosine-tapered fraction of the width."""

    center: float
    width: float
    kind: str = "tukey"
    taper: float = 0.25

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("gate width must be positive")
        if self.kind not in ("rectangular", "tukey"):
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if not 0 <= self.taper <= 1:
            raise ValueError("taper must be in [0, 1]")

    @property
    def start(self) -> float:
        return self.center - self.width / 2

    @property
    def stop(self) -> float:
        return self.center + self.width / 2

    def window(self, t) -> np.ndarray:
        d = np.abs(np.asarray(t, dtype=float) - self.center)
        half = self.width / 2
        inside = d <= half
        if self.kind == "rectangular" or self.taper == 0:
            return inside.astype(float)
        flat = half * (1 - self.taper)
        ramp = half - flat
        w = np.where(d <= flat, 1.0, 0.5 * (1 + np.cos(np.pi * (d - flat) / ramp)))
        return np.where(inside, w, 0.0)


def gate_and_return(spectrum: Spectrum, gate: Gate, zero_pad_factor: int = 4) -> Spectrum:
    tr = to_time_domain(spectrum, zero_pad_factor)
    return gate_time_response(tr, gate).to_spectrum()


def gate_time_response(tr: TimeResponse, gate: Gate) -> TimeResponse:
    eps = 1e-9 * tr.dt
    if gate.start < tr.t_start - eps or gate.stop > tr.t_start + tr.duration + eps:
        raise GateError(
            f"gate [{gate.start:.6g}, {gate.stop:.6g}] s lies outside the record "
            f"[{tr.t_start:.6g}, {tr.t_start + tr.duration:.6g}] s"
        )
    return TimeResponse(tr.dt, tr.values * gate.window(tr.times), tr.n_source,
                        tr.f_start, tr.f_stop, tr.gain, tr.t_start)


def analysis_band(spectrum: Spectrum, threshold_db: float = -40.0) -> tuple[int, int]:
    """First and last index whose magnitude is within ``threshold_db`` of the max."""
    mag = np.abs(spectrum.values)
    top = mag.max()
    if top == 0:
        raise ZeroMagnitudeError("spectrum is identically zero")
    above = np.flatnonzero(mag >= top * 10 ** (threshold_db / 20))
    return int(above[0]), int(above[-1])


def wrap_step(d):
    """Map phase differences into (-pi, pi]."""
    return d + 2 * np.pi * -np.ceil((d - np.pi) / (2 * np.pi))


def unwrap_phase(spectrum: Spectrum, threshold_db: float = -40.0) -> np.ndarray:
    lo, hi = analysis_band(spectrum, threshold_db)
    zero = np.flatnonzero(spectrum.values[lo : hi + 1] == 0)
    if zero.size:
        f = spectrum.frequencies[lo + zero[0]]
        raise ZeroMagnitudeError(f"zero-magnitude sample at {f:.9g} Hz inside the analysis band")
    phase = np.angle(spectrum.values)
    steps = wrap_step(np.diff(phase))
    return np.concatenate(([phase[0]], steps)).cumsum()


@dataclass(frozen=True)
class TrackedFrequency:
    f_zero: float
    phase_slope: float  # rad/Hz
    peak_id: Optional[int] = None


def track_zero_phase(
    spectrum: Spectrum,
    search_band: Optional[tuple[float, float]] = None,
    threshold_db: float = -40.0,
    peak_id: Optional[int] = None,
    near: Optional[float] = None,
) -> TrackedFrequency:
    """Frequency where the unwrapped phase crosses zero, nearest the band maximum.

    The unwrapped phase is first shifted by a whole number of turns so that
    it lies in [-pi, pi] at the magnitude maximum of the search band.

    Passing ``near`` (typically the previous reading of the same echo) moves
    that anchor from the magnitude maximum to the grid point closest to
    ``near``, so successive readings follow one crossing. The anchor is
    unambiguous while the echo shifts by less than half a crossing spacing,
    1/(2*tau) in frequency.
    """
    phase = unwrap_phase(spectrum, threshold_db)
    f = spectrum.frequencies
    if search_band is None:
        lo, hi = analysis_band(spectrum, threshold_db)
    else:
        sel = np.flatnonzero((f >= search_band[0]) & (f <= search_band[1]))
        if sel.size < 2:
            raise NoCrossingError("search band holds fewer than two grid points")
        lo, hi = int(sel[0]), int(sel[-1])
    if near is None:
        imax = lo + int(np.argmax(np.abs(spectrum.values[lo : hi + 1])))
    else:
        imax = int(np.clip(np.round((near - spectrum.f_start) / spectrum.df), lo, hi))
    phase = phase - 2 * np.pi * np.round(phase[imax] / (2 * np.pi))

    p = phase[lo : hi + 1]
    fb = f[lo : hi + 1]
    best = None
    for i in range(p.size - 1):
        if p[i] == 0:
            fz, j = fb[i], i
        elif p[i] * p[i + 1] < 0:
            fz = fb[i] - p[i] * (fb[i + 1] - fb[i]) / (p[i + 1] - p[i])
            j = i
        else:
            continue
        key = (abs(fz - f[imax]), fz)
        if best is None or key < best[0]:
            best = (key, fz, j)
    if p[-1] == 0:
        key = (abs(fb[-1] - f[imax]), fb[-1])
        if best is None or key < best[0]:
            best = (key, fb[-1], p.size - 2)
    if best is None:
        raise NoCrossingError("unwrapped phase has no zero crossing in the search band")
    _, fz, j = best
    slope = (p[j + 1] - p[j]) / (fb[j + 1] - fb[j])
    return TrackedFrequency(float(fz), float(slope), peak_id)


# -- orchestration -----------------------------------------------------------


@dataclass(frozen=True)
class PipelineSettings:
    """Knobs of the interrogation chain.

    ``gate_width`` and ``min_separation`` default to half the smallest
    spacing between detected echoes and to ``echo_width`` respectively.
    """

    zero_pad_factor: int = 4
    gate_kind: str = "tukey"
    gate_taper: float = 0.25
    gate_width: Optional[float] = None
    threshold_db: float = -40.0
    peak_count: int = 4
    min_separation: Optional[float] = None
    echo_width: float = 2 * 11 / 410e6
    gain: float = 1.0

    def __post_init__(self):
        if self.zero_pad_factor < 1:
            raise ValueError("zero_pad_factor must be >= 1")
        if self.peak_count < 1:
            raise ValueError("peak_count must be >= 1")
        if self.gate_width is not None and not self.gate_width > 0:
            raise ValueError("gate_width must be positive")
        if not self.gain > 0:
            raise ValueError("gain must be positive")


@dataclass(frozen=True)
class EchoReading:
    peak_id: int
    gate: Gate
    level_db: float
    tracked: TrackedFrequency


def locate_echoes(spectrum: Spectrum, settings: PipelineSettings = PipelineSettings()) -> list[Peak]:
    """Detected echoes sorted by arrival time (index 0 is peak 1)."""
    tr = to_time_domain(spectrum, settings.zero_pad_factor, settings.gain)
    sep = settings.min_separation if settings.min_separation is not None else settings.echo_width
    peaks = detect_peaks(tr, settings.peak_count, sep)
    return sorted(peaks, key=lambda p: p.time)


def gates_for(peaks: Sequence[Peak], settings: PipelineSettings = PipelineSettings()) -> dict[int, Gate]:
    """One gate per peak, keyed by 1-based arrival order."""
    times = [p.time for p in peaks]
    gates = {}
    for k, t in enumerate(times):
        if settings.gate_width is not None:
            width = settings.gate_width
        else:
            gaps = [abs(t - u) for u in times if u != t]
            width = min(gaps) / 2 if gaps else settings.echo_width * 2
        gates[k + 1] = Gate(t, width, settings.gate_kind, settings.gate_taper)
    return gates


def read_echoes(
    spectrum: Spectrum,
    gates: dict[int, Gate],
    settings: PipelineSettings = PipelineSettings(),
    near: Optional[dict[int, float]] = None,
) -> dict[int, EchoReading]:
    """Gate, return and track every gated echo of one spectrum.

    ``near`` maps peak ids to anchor frequencies for :func:`track_zero_phase`.
    """
    tr = to_time_domain(spectrum, settings.zero_pad_factor, settings.gain)
    out = {}
    for pid, gate in gates.items():
        gated = gate_time_response(tr, gate)
        env = gated.envelope
        level = 20 * math.log10(env.max()) if env.max() > 0 else -math.inf
        tracked = track_zero_phase(
            gated.to_spectrum(),
            threshold_db=settings.threshold_db,
            peak_id=pid,
            near=None if near is None else near.get(pid),
        )
        out[pid] = EchoReading(pid, gate, level, tracked)
    return out
