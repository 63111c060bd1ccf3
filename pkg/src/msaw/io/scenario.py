"""JSON scenario documents.

A scenario is a tree of plain config dataclasses whose field names are the
JSON keys. Every key is optional; ``{}`` yields the default device. The
``build_*`` helpers turn the config into library objects, and loading
validates by building each of them once, so bad values are reported with
the key path that produced them.
"""

from __future__ import annotations

import dataclasses
import json
import types
import typing
import warnings
from dataclasses import dataclass, field
from typing import Any, Optional

from ..device import (
    DeviceGeometry,
    EchoSpec,
    EnvironmentState,
    FrequencyGrid,
    Segment,
    SensorPhysics,
    default_echoes,
)
from ..dispersion import DEFAULT_WAVELENGTH, effective_materials
from ..magnetics import MagnetoelasticModel
from ..materials import Layer, LayerStack
from ..pipeline import PipelineSettings


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ScenarioWarning(UserWarning):
    pass


@dataclass
class SegmentConfig:
    length_wavelengths: float = 120.0
    kind: str = "bare"


@dataclass
class EchoConfig:
    id: int = 1
    segments: list[SegmentConfig] = field(default_factory=list)
    amplitude_db: float = -18.0
    polarity: int = 1


@dataclass
class GeometryConfig:
    wavelength_m: float = DEFAULT_WAVELENGTH
    idt_pairs: int = 11
    metallization_ratio: float = 0.5
    path1_wavelengths: float = 120.0
    path2_wavelengths: float = 180.0
    reflector_count: int = 200
    echoes: Optional[list[EchoConfig]] = None


@dataclass
class MagnetoelasticConfig:
    slope_ppm_per_mt: float = -781.0
    h_low_mt: float = -0.19
    h_high_mt: float = 0.69
    smoothing_mt: float = 0.0
    h_ref_mt: float = -4.0


@dataclass
class PhysicsConfig:
    v1_nominal_mps: Optional[float] = None
    v2_nominal_mps: Optional[float] = None
    tcf1_ppm_per_c: float = -67.7
    tcf2_ppm_per_c: float = -66.2
    magnetoelastic: MagnetoelasticConfig = field(default_factory=MagnetoelasticConfig)


@dataclass
class EnvironmentConfig:
    temperature_c: float = 25.0
    field_mt: float = -4.0
    reference_temperature_c: float = 25.0


@dataclass
class GridConfig:
    f_start_hz: float = 370e6
    f_stop_hz: float = 450e6
    n_points: int = 4001


@dataclass
class NoiseConfig:
    snr_db: Optional[float] = None
    seed: int = 0


@dataclass
class PipelineConfig:
    zero_pad_factor: int = 4
    gate_kind: str = "tukey"
    gate_taper: float = 0.25
    gate_width_s: Optional[float] = None
    threshold_db: float = -40.0
    min_separation_s: Optional[float] = None


@dataclass
class LayerConfig:
    material: str = "ZnO"
    thickness_m: float = 700e-9
    shear_stiffness_pa: Optional[float] = None
    density_kg_m3: Optional[float] = None


def _default_layers() -> list[LayerConfig]:
    return [LayerConfig("ZnO", 700e-9), LayerConfig("CoFeB", 100e-9)]


@dataclass
class StackConfig:
    substrate: str = "LiNbO3"
    substrate_shear_stiffness_pa: Optional[float] = None
    layers: list[LayerConfig] = field(default_factory=_default_layers)


@dataclass
class SweepConfig:
    vary: str = "temperature"
    temperatures_c: list[float] = field(default_factory=lambda: [25.0, 30.0, 35.0, 40.0, 45.0, 50.0])
    fields_mt: list[float] = field(default_factory=lambda: [-4.0])
    drift_c: list[float] = field(default_factory=list)


@dataclass
class RfidConfig:
    slot_count: int = 8
    amplitude_db: float = -24.0
    threshold_db: float = -12.0
    code: Optional[str] = None


@dataclass
class Scenario:
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    environment: EnvironmentConfig = field(default_factory=EnvironmentConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    stack: StackConfig = field(default_factory=StackConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    rfid: RfidConfig = field(default_factory=RfidConfig)


# -- generic dict -> dataclass conversion -----------------------------------

def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else key


def _coerce(tp, value, path: str, strict: bool):
    origin = typing.get_origin(tp)
    if origin in (typing.Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if value is None:
            return None
        return _coerce(args[0], value, path, strict)
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path, strict)
    if origin is list:
        if not isinstance(value, list):
            raise ScenarioError(path, "expected a list")
        (item,) = typing.get_args(tp)
        return [_coerce(item, v, _join(path, i), strict) for i, v in enumerate(value)]
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(path, f"expected a number, got {value!r}")
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ScenarioError(path, f"expected an integer, got {value!r}")
        return value
    if tp is str:
        if not isinstance(value, str):
            raise ScenarioError(path, f"expected a string, got {value!r}")
        return value
    raise TypeError(f"unsupported config type {tp!r}")  # pragma: no cover


def _build(cls, data, path: str, strict: bool):
    if not isinstance(data, dict):
        raise ScenarioError(path, "expected an object")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            msg = f"unknown key (allowed: {', '.join(sorted(names))})"
            if strict:
                raise ScenarioError(_join(path, key), msg)
            warnings.warn(f"{_join(path, key)}: {msg}", ScenarioWarning, stacklevel=4)
    kwargs = {
        name: _coerce(hints[name], data[name], _join(path, name), strict)
        for name in names
        if name in data
    }
    return cls(**kwargs)


# -- config -> library objects ------------------------------------------------

def _guard(path: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc_type is not None and issubclass(exc_type, (ValueError, KeyError)) \
                    and not issubclass(exc_type, ScenarioError):
                raise ScenarioError(path, str(exc).strip("'\"")) from exc
            return False

    return _Ctx()


def build_geometry(sc: Scenario) -> DeviceGeometry:
    g = sc.geometry
    with _guard("geometry"):
        if not g.wavelength_m > 0:
            raise ScenarioError("geometry.wavelength_m", "wavelength must be positive")
        echoes = None
        if g.echoes is not None:
            echoes = tuple(
                EchoSpec(e.id, tuple(Segment(s.length_wavelengths, s.kind) for s in e.segments),
                         e.amplitude_db, e.polarity)
                for e in g.echoes
            )
        return DeviceGeometry(g.wavelength_m, g.idt_pairs, g.metallization_ratio,
                              g.path1_wavelengths, g.path2_wavelengths, g.reflector_count, echoes)


def build_physics(sc: Scenario) -> SensorPhysics:
    p, m = sc.physics, sc.physics.magnetoelastic
    with _guard("physics.magnetoelastic"):
        model = MagnetoelasticModel(m.slope_ppm_per_mt, m.h_low_mt, m.h_high_mt,
                                    m.smoothing_mt, m.h_ref_mt)
    with _guard("physics"):
        return SensorPhysics(p.v1_nominal_mps, p.v2_nominal_mps,
                             p.tcf1_ppm_per_c, p.tcf2_ppm_per_c, model)


def build_environment(sc: Scenario) -> EnvironmentState:
    e = sc.environment
    with _guard("environment"):
        return EnvironmentState(e.temperature_c, e.field_mt, e.reference_temperature_c)


def build_grid(sc: Scenario) -> FrequencyGrid:
    g = sc.grid
    with _guard("grid"):
        return FrequencyGrid(g.f_start_hz, g.f_stop_hz, g.n_points)


def build_pipeline_overrides(sc: Scenario) -> dict[str, Any]:
    """Keyword overrides for ``sweeps.settings_for``."""
    p = sc.pipeline
    kw = dict(zero_pad_factor=p.zero_pad_factor, gate_kind=p.gate_kind, gate_taper=p.gate_taper,
              gate_width=p.gate_width_s, threshold_db=p.threshold_db,
              min_separation=p.min_separation_s)
    with _guard("pipeline"):
        PipelineSettings(**kw)
    return kw


def build_stack(sc: Scenario) -> LayerStack:
    s = sc.stack
    catalog = effective_materials()

    def material(name, mu, rho, path):
        if name not in catalog:
            raise ScenarioError(path, f"unknown material {name!r} (known: {', '.join(sorted(catalog))})")
        m = catalog[name]
        if rho is not None:
            m = dataclasses.replace(m, density=rho)
        if mu is not None:
            m = m.with_shear_stiffness(mu)
        return m

    with _guard("stack"):
        substrate = material(s.substrate, s.substrate_shear_stiffness_pa, None, "stack.substrate")
        layers = tuple(
            Layer(material(l.material, l.shear_stiffness_pa, l.density_kg_m3,
                           f"stack.layers[{i}].material"), l.thickness_m)
            for i, l in enumerate(s.layers)
        )
        return LayerStack(substrate, layers)


def _validate(sc: Scenario) -> None:
    build_geometry(sc)
    build_physics(sc)
    build_environment(sc)
    build_grid(sc)
    build_pipeline_overrides(sc)
    build_stack(sc)
    if sc.sweep.vary not in ("temperature", "field"):
        raise ScenarioError("sweep.vary", "must be 'temperature' or 'field'")
    if sc.sweep.drift_c and len(sc.sweep.drift_c) != len(sc.sweep.temperatures_c):
        raise ScenarioError("sweep.drift_c", "needs one value per temperature")
    if sc.rfid.slot_count < 1:
        raise ScenarioError("rfid.slot_count", "must be >= 1")
    if sc.rfid.code is not None:
        try:
            int(sc.rfid.code, 16)
        except ValueError:
            raise ScenarioError("rfid.code", f"not a hex string: {sc.rfid.code!r}")


def scenario_from_dict(data: dict, strict: bool = True) -> Scenario:
    sc = _build(Scenario, data, "", strict)
    _validate(sc)
    return sc


def load_scenario(text: str, strict: bool = True) -> Scenario:
    """Parse and validate a JSON scenario; unknown keys raise unless ``strict`` is off."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("", f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return scenario_from_dict(data, strict)


def dump_scenario(sc: Scenario) -> str:
    return json.dumps(dataclasses.asdict(sc), indent=2, sort_keys=True) + "\n"


def default_scenario() -> Scenario:
    return Scenario()


def echo_table(sc: Scenario) -> list[EchoConfig]:
    """Echo list of the scenario, expanding the default when none is given."""
    if sc.geometry.echoes is not None:
        return sc.geometry.echoes
    return [
        EchoConfig(e.id, [SegmentConfig(s.length, s.kind) for s in e.segments], e.amplitude_db, e.polarity)
        for e in default_echoes(sc.geometry.path1_wavelengths, sc.geometry.path2_wavelengths)
    ]
