"""
Material constants and layer stacks.

Catalog entries carry the elastic, piezoelectric and dielectric constants of
the three materials used in the CoFeB/ZnO/LiNbO3 structure exactly as they
were tabulated, including entries that look like misprints. For the
shear-horizontal dispersion model each material is reduced to a density and a
single effective shear stiffness; the calibrated values used by default live
in :mod:`msaw.dispersion`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

GPA = 1e9


class MaterialIncompleteError(ValueError):
    """Raised when a material lacks the constants a computation needs."""


@dataclass(frozen=True)
class Material:
    """Isotropic shear-horizontal reduction of an elastic material.

    Attributes:
        name: catalog key
        density: mass density [kg/m^3]
        shear_stiffness: effective SH stiffness mu [Pa], or None when unknown
        stiffness: tabulated C_ij entries [Pa], keyed "C11", "C12", ...
        piezo: tabulated e_ij entries [C/m^2]
        permittivity: relative permittivities, keyed "eps11", "eps33"
        as_printed: True when the numbers are a verbatim transcription
    """

    name: str
    density: float
    shear_stiffness: Optional[float] = None
    stiffness: dict[str, float] = field(default_factory=dict)
    piezo: dict[str, float] = field(default_factory=dict)
    permittivity: dict[str, float] = field(default_factory=dict)
    as_printed: bool = False

    def __post_init__(self):
        if not (self.density > 0 and math.isfinite(self.density)):
            raise ValueError(f"density must be positive, got {self.density}")
        if self.shear_stiffness is not None and not (
            self.shear_stiffness > 0 and math.isfinite(self.shear_stiffness)
        ):
            raise ValueError(
                f"shear_stiffness must be positive, got {self.shear_stiffness}"
            )

    def with_shear_stiffness(self, mu: float) -> "Material":
        return replace(self, shear_stiffness=float(mu), as_printed=False)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Material":
        return cls(
            name=data["name"],
            density=float(data["density"]),
            shear_stiffness=(
                None
                if data.get("shear_stiffness") is None
                else float(data["shear_stiffness"])
            ),
            stiffness={k: float(v) for k, v in data.get("stiffness", {}).items()},
            piezo={k: float(v) for k, v in data.get("piezo", {}).items()},
            permittivity={
                k: float(v) for k, v in data.get("permittivity", {}).items()
            },
            as_printed=bool(data.get("as_printed", False)),
        )


def shear_velocity(m: Material) -> float:
    """Bulk shear velocity sqrt(mu/rho) in m/s."""
    if m.shear_stiffness is None:
        raise MaterialIncompleteError(
            f"material incomplete: {m.name!r} has no shear_stiffness"
        )
    return math.sqrt(m.shear_stiffness / m.density)


@dataclass(frozen=True)
class Layer:
    material: Material
    thickness: float  # m

    def __post_init__(self):
        if not (self.thickness > 0 and math.isfinite(self.thickness)):
            raise ValueError(f"layer thickness must be positive, got {self.thickness}")


@dataclass(frozen=True)
class LayerStack:
    """Film layers over a semi-infinite substrate.

    ``layers`` is ordered from the substrate surface upward, so the last entry
    is the free surface layer. An empty tuple is a bare substrate.
    """

    substrate: Material
    layers: tuple[Layer, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def substrate_velocity(self) -> float:
        return shear_velocity(self.substrate)

    @property
    def min_layer_velocity(self) -> Optional[float]:
        if not self.layers:
            return None
        return min(shear_velocity(layer.material) for layer in self.layers)

    @property
    def supports_love_mode(self) -> bool:
        slowest = self.min_layer_velocity
        return slowest is not None and slowest < self.substrate_velocity

    @property
    def total_thickness(self) -> float:
        return sum(layer.thickness for layer in self.layers)

    def with_thickness(self, index: int, thickness: float) -> "LayerStack":
        layers = list(self.layers)
        layers[index] = Layer(layers[index].material, thickness)
        return replace(self, layers=tuple(layers))

    def scaled(self, factor: float) -> "LayerStack":
        """Copy with every layer thickness multiplied by ``factor``."""
        return replace(
            self,
            layers=tuple(Layer(l.material, l.thickness * factor) for l in self.layers),
        )

    def without(self, name: str) -> "LayerStack":
        """Copy with every layer of material ``name`` removed."""
        return replace(
            self, layers=tuple(l for l in self.layers if l.material.name != name)
        )


def builtin_materials() -> dict[str, Material]:
    """Catalog of LiNbO3, ZnO and CoFeB as tabulated.

    LiNbO3 and ZnO carry no shear stiffness: the tabulated tensors contain
    entries that cannot be reduced sensibly (C12, C13 > C11 for LiNbO3 and a
    C44 ten times too large for ZnO), so callers must supply an effective mu.
    CoFeB gets (C11 - C12)/2.
    """
    linbo3 = Material(
        name="LiNbO3",
        density=4700.0,
        stiffness={
            "C11": 202.897 * GPA,
            "C12": 529.177 * GPA,
            "C13": 749.098 * GPA,
            "C33": 243.075 * GPA,
            "C44": 599.034 * GPA,
            "C66": 748.772 * GPA,
        },
        piezo={"e15": 3.69594, "e16": -2.53384, "e31": 0.193644, "e33": 1.30863},
        permittivity={"eps11": 43.6, "eps33": 29.16},
        as_printed=True,
    )
    zno = Material(
        name="ZnO",
        density=5680.0,
        stiffness={
            "C11": 209.14 * GPA,
            "C12": 121.14 * GPA,
            "C13": 105.359 * GPA,
            "C33": 211.194 * GPA,
            "C44": 423.729 * GPA,
            "C66": 442.478 * GPA,
        },
        piezo={"e15": -0.48, "e31": -0.56, "e33": 1.32},
        permittivity={"eps11": 8.54, "eps33": 10.204},
        as_printed=True,
    )
    c11, c12 = 257.0 * GPA, 162.0 * GPA
    cofeb = Material(
        name="CoFeB",
        density=8000.0,
        shear_stiffness=(c11 - c12) / 2,
        stiffness={"C11": c11, "C12": c12, "C33": 105.0 * GPA},
        as_printed=True,
    )
    return {m.name: m for m in (linbo3, zno, cofeb)}
