"""
Connected-IDT reflective delay line and its S11 response.

Two acoustic gaps separate three electrically connected transducers: a bare
gap of 120 wavelengths (path 1) and a CoFeB-coated gap of 180 wavelengths
(path 2). The one-port response seen by the reader is a sum of band-limited
echoes, one per acoustic route through the gaps:

    id  route                              default level
    1   one way over path 1                -18 dB
    2   one way over path 2                -24 dB
    3   path 1 and back                    -30 dB
    4   path 1 then path 2                 -28 dB

Levels are time-domain peak levels after the coherent-gain normalization of
:func:`msaw.pipeline.to_time_domain`; the S11 values themselves carry the
bare band shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .dispersion import DEFAULT_WAVELENGTH, default_path_velocities
from .magnetics import MagnetoelasticModel, fractional_shift

BARE = "bare"
COATED = "coated"
PATH_KINDS = (BARE, COATED)
BAND_EDGE_LIMIT = 1e-3  # -60 dB of the band shape


@dataclass(frozen=True)
class Segment:
    length: float  # wavelengths
    kind: str

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"segment length must be positive, got {self.length}")
        if self.kind not in PATH_KINDS:
            raise ValueError(f"segment kind must be one of {PATH_KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class EchoSpec:
    id: int
    segments: tuple[Segment, ...]
    amplitude_db: float
    polarity: int = 1

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValueError(f"echo {self.id} has no segments")
        if self.polarity not in (1, -1):
            raise ValueError("polarity must be +1 or -1")

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def amplitude(self) -> float:
        return 10 ** (self.amplitude_db / 20)


def default_echoes(path1: float = 120.0, path2: float = 180.0,
                   levels_db: Sequence[float] = (-18.0, -24.0, -30.0, -28.0)) -> tuple[EchoSpec, ...]:
    a1, a2, a3, a4 = levels_db
    return (
        EchoSpec(1, (Segment(path1, BARE),), a1),
        EchoSpec(2, (Segment(path2, COATED),), a2),
        EchoSpec(3, (Segment(path1, BARE), Segment(path1, BARE)), a3),
        EchoSpec(4, (Segment(path1, BARE), Segment(path2, COATED)), a4),
    )


@dataclass(frozen=True)
class DeviceGeometry:
    """Layout of the delay line. Path lengths are in wavelengths.

    ``metallization_ratio`` and ``reflector_count`` are recorded for
    completeness; the echo model only uses them through the echo levels.
    """

    wavelength: float = DEFAULT_WAVELENGTH
    idt_pairs: int = 11
    metallization_ratio: float = 0.5
    path1_length: float = 120.0
    path2_length: float = 180.0
    reflector_count: int = 200
    echoes: Optional[tuple[EchoSpec, ...]] = None

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if self.idt_pairs < 1:
            raise ValueError("idt_pairs must be >= 1")
        if not 0 < self.metallization_ratio < 1:
            raise ValueError("metallization_ratio must be in (0, 1)")
        if not (self.path1_length > 0 and self.path2_length > 0):
            raise ValueError("path lengths must be positive")
        if self.echoes is None:
            object.__setattr__(
                self, "echoes", default_echoes(self.path1_length, self.path2_length)
            )
        else:
            object.__setattr__(self, "echoes", tuple(self.echoes))
        ids = [e.id for e in self.echoes]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate echo ids: {ids}")

    def echo(self, echo_id: int) -> EchoSpec:
        for e in self.echoes:
            if e.id == echo_id:
                return e
        raise KeyError(f"no echo with id {echo_id}")


@dataclass(frozen=True)
class EnvironmentState:
    temperature: float = 25.0  # degC
    field: float = -4.0  # mT, easy axis
    reference_temperature: float = 25.0

    def __post_init__(self):
        for name in ("temperature", "field", "reference_temperature"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True)
class SensorPhysics:
    """Velocities at the reference state and their sensitivities.

    Unset nominal velocities are taken from the calibrated Love-mode solver
    (ZnO/LiNbO3 for path 1, CoFeB/ZnO/LiNbO3 for path 2).
    """

    v1_nominal: Optional[float] = None
    v2_nominal: Optional[float] = None
    tcf1: float = -67.7
    tcf2: float = -66.2
    magnetoelastic: MagnetoelasticModel = field(default_factory=MagnetoelasticModel)

    def __post_init__(self):
        if self.v1_nominal is None or self.v2_nominal is None:
            v1, v2 = default_path_velocities()
            if self.v1_nominal is None:
                object.__setattr__(self, "v1_nominal", v1)
            if self.v2_nominal is None:
                object.__setattr__(self, "v2_nominal", v2)
        if not (self.v1_nominal > 0 and self.v2_nominal > 0):
            raise ValueError("nominal velocities must be positive")


@dataclass(frozen=True)
class FrequencyGrid:
    f_start: float = 370e6
    f_stop: float = 450e6
    n_points: int = 4001

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("n_points must be >= 2")
        if not 0 < self.f_start < self.f_stop:
            raise ValueError("need 0 < f_start < f_stop")

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, self.n_points)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex S11 on a uniform frequency grid.

    ``band_warning`` is set when some echo's band shape is still above -60 dB
    at a grid edge, i.e. the record truncates its sidelobes.
    """

    f_start: float
    f_stop: float
    values: np.ndarray
    band_warning: bool = False

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("spectrum needs at least 2 points")
        if not self.f_start < self.f_stop:
            raise ValueError("need f_start < f_stop")
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrum values must be finite")

    @property
    def n_points(self) -> int:
        return self.values.size

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.f_start, self.f_stop, self.n_points)

    @property
    def df(self) -> float:
        return (self.f_stop - self.f_start) / (self.n_points - 1)

    def __add__(self, other: "Spectrum") -> "Spectrum":
        if (self.f_start, self.f_stop, self.n_points) != (other.f_start, other.f_stop, other.n_points):
            raise ValueError("spectra are on different grids")
        return Spectrum(self.f_start, self.f_stop, self.values + other.values,
                        self.band_warning or other.band_warning)


def nominal_frequency(v: float, wavelength: float) -> float:
    """Synchronous frequency f = v / lambda."""
    if not (v > 0 and wavelength > 0):
        raise ValueError("velocity and wavelength must be positive")
    return v / wavelength


def path_velocity(physics: SensorPhysics, kind: str, env: EnvironmentState) -> float:
    dt = env.temperature - env.reference_temperature
    if kind == BARE:
        return physics.v1_nominal * (1 + physics.tcf1 * dt * 1e-6)
    if kind == COATED:
        mag = fractional_shift(physics.magnetoelastic, env.field)
        return physics.v2_nominal * (1 + physics.tcf2 * dt * 1e-6 + mag * 1e-6)
    raise ValueError(f"unknown path kind {kind!r}")


def echo_delay(geometry: DeviceGeometry, physics: SensorPhysics, echo: EchoSpec,
               env: EnvironmentState) -> float:
    return sum(
        seg.length * geometry.wavelength / path_velocity(physics, seg.kind, env)
        for seg in echo.segments
    )


def echo_center_frequency(geometry: DeviceGeometry, physics: SensorPhysics,
                          echo: EchoSpec, env: EnvironmentState) -> float:
    """Center frequency from the delay-weighted mean velocity of the route."""
    return echo.length / echo_delay(geometry, physics, echo, env)


def echo_delays(geometry: DeviceGeometry, physics: SensorPhysics,
                env: EnvironmentState) -> dict[int, float]:
    return {e.id: echo_delay(geometry, physics, e, env) for e in geometry.echoes}


def idt_band_shape(geometry: DeviceGeometry, f, f_center: float):
    """Squared-sinc response of an N-pair transducer, unity at f_center."""
    if not f_center > 0:
        raise ValueError("f_center must be positive")
    x = (np.asarray(f, dtype=float) - f_center) / f_center
    out = np.sinc(geometry.idt_pairs * x) ** 2
    return float(out) if out.ndim == 0 else out


def echo_time_width(geometry: DeviceGeometry, f_center: float) -> float:
    """Base width 2N/f of an echo in the time domain."""
    return 2 * geometry.idt_pairs / f_center


def band_coherent_gain(geometry: DeviceGeometry, grid: Union[FrequencyGrid, Spectrum],
                       f_center: Optional[float] = None) -> float:
    """Mean of the band shape over the grid.

    This is the time-domain peak of a 0 dB echo under the plain 1/N
    transform; pass it to ``to_time_domain`` to read echo levels directly.
    The default center is the nominal path-2 synchronous frequency.
    """
    if f_center is None:
        f_center = SensorPhysics().v2_nominal / geometry.wavelength
    return float(np.mean(idt_band_shape(geometry, grid.frequencies, f_center)))


def _echo_spectrum(geometry, physics, echo, env, f):
    tau = echo_delay(geometry, physics, echo, env)
    fc = echo.length / tau
    shape = idt_band_shape(geometry, f, fc)
    return echo.amplitude * echo.polarity * shape * np.exp(-2j * np.pi * f * tau), shape


def synthesize_s11(
    geometry: DeviceGeometry,
    physics: SensorPhysics,
    env: EnvironmentState,
    grid: FrequencyGrid = FrequencyGrid(),
    snr_db: Optional[float] = None,
    seed: int = 0,
) -> Spectrum:
    """Sum of band-limited echoes, optionally with complex white noise.

    ``snr_db`` is the ratio of the strongest echo's time-domain peak power to
    the noise power per time sample under the 1/N inverse transform. The
    noise generator is built from ``seed`` on every call.
    """
    f = grid.frequencies
    values = np.zeros(f.shape, dtype=complex)
    warn = False
    strongest = 0.0
    for echo in geometry.echoes:
        s, shape = _echo_spectrum(geometry, physics, echo, env, f)
        values += s
        warn = warn or shape[0] > BAND_EDGE_LIMIT or shape[-1] > BAND_EDGE_LIMIT
        strongest = max(strongest, echo.amplitude * float(np.mean(shape)))
    if snr_db is not None and strongest > 0:
        rng = np.random.default_rng(seed)
        sigma2 = f.size * strongest**2 / 10 ** (snr_db / 10)
        noise = rng.standard_normal(f.size) + 1j * rng.standard_normal(f.size)
        values = values + noise * math.sqrt(sigma2 / 2)
    return Spectrum(grid.f_start, grid.f_stop, values, band_warning=warn)
