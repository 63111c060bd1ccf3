"""
Shear-horizontal (Love) guided modes of a layered half-space.

Each layer is treated as an isotropic SH medium (density, effective shear
stiffness). The displacement/traction state is propagated from the traction
free surface down to the substrate with 2x2 layer transfer matrices, and the
mismatch with the decaying substrate solution is the dispersion function
whose sign changes bracket the guided modes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from .materials import Layer, LayerStack, Material, builtin_materials, shear_velocity

# Effective SH stiffnesses used by the default stack. ZnO takes the tabulated
# C44 divided by ten (the tabulated 423.7 GPa is an order of magnitude above
# any reported ZnO shear constant). The substrate value is fitted so that the
# CoFeB/ZnO/LiNbO3 fundamental mode at 9.2 um wavelength runs at 3772 m/s,
# i.e. 410 MHz; regenerate with scripts/calibrate_stack.py.
ZNO_EFFECTIVE_SHEAR_STIFFNESS = 42.3729e9
LINBO3_EFFECTIVE_SHEAR_STIFFNESS = 75618987497.48036
DEFAULT_WAVELENGTH = 9.2e-6
TARGET_VELOCITY = 410e6 * DEFAULT_WAVELENGTH

DEFAULT_GRID_POINTS = 2000
DEFAULT_RTOL = 1e-10
DEFAULT_RESIDUAL_TOL = 1e-6


class EvanescenceError(ValueError):
    """Trial velocity outside the open interval that admits a guided mode."""


@dataclass(frozen=True)
class DispersionProblem:
    """Mode search at either fixed frequency or fixed wavelength.

    Exactly one of ``frequency`` [Hz] and ``wavelength`` [m] must be given.
    Unset bounds default to the slowest layer and substrate shear velocities,
    pulled inward by the relative margin ``eps``.
    """

    stack: LayerStack
    frequency: Optional[float] = None
    wavelength: Optional[float] = None
    v_min: Optional[float] = None
    v_max: Optional[float] = None
    eps: float = 1e-9

    def __post_init__(self):
        if (self.frequency is None) == (self.wavelength is None):
            raise ValueError("give exactly one of frequency or wavelength")
        given = self.frequency if self.frequency is not None else self.wavelength
        if not given > 0:
            raise ValueError("frequency/wavelength must be positive")

    def bounds(self) -> tuple[float, float]:
        vs = self.stack.substrate_velocity
        slowest = self.stack.min_layer_velocity
        lo = self.v_min if self.v_min is not None else (slowest or vs) * (1 + self.eps)
        hi = self.v_max if self.v_max is not None else vs * (1 - self.eps)
        return lo, hi

    def wavenumber(self, v):
        if self.wavelength is not None:
            return np.full_like(np.asarray(v, dtype=float), 2 * np.pi / self.wavelength)
        return 2 * np.pi * self.frequency / np.asarray(v, dtype=float)


@dataclass(frozen=True)
class ModeSolution:
    phase_velocity: float
    mode_index: int
    residual: float


def _check_interval(stack: LayerStack, v: np.ndarray) -> None:
    vs = stack.substrate_velocity
    slowest = stack.min_layer_velocity
    lo = slowest if slowest is not None else -np.inf
    if np.any(v >= vs) or np.any(v <= lo):
        raise EvanescenceError(
            f"evanescence violated: trial velocity must lie in ({lo:.6g}, {vs:.6g}) m/s"
        )


def _layer_terms(layer: Layer, k, v):
    """Entries (c, S, B) of the SH transfer step [[c, S/mu], [-mu B, c]].

    In layers faster than v the cos/sin terms become cosh/sinh; those steps
    are divided by cosh, a positive factor, so thick evanescent layers cannot
    overflow. Signs and zeros of everything built from them are unchanged.
    """
    kh = k * layer.thickness
    b2 = (v / shear_velocity(layer.material)) ** 2 - 1.0
    b = np.sqrt(np.abs(b2))
    x = kh * b
    guided = b2 >= 0
    th = np.tanh(x)
    with np.errstate(invalid="ignore", divide="ignore"):
        th_over_x = np.where(x > 0, th / x, 1.0)
    c = np.where(guided, np.cos(x), 1.0)
    s_over_beta = np.where(guided, kh * np.sinc(x / np.pi), kh * th_over_x)
    beta_sin = np.where(guided, b * np.sin(x), -b * th)
    return c, s_over_beta, beta_sin


def _normalized(u, t):
    n = np.hypot(u, t)
    return u / n, t / n


def _mismatch(stack: LayerStack, k, v) -> np.ndarray:
    """Dispersion function for wavenumber k and phase velocity v.

    The traction-free surface solution is carried down and the decaying
    substrate solution up, both in (u, t/(k mu_s)) form. Their Wronskian is
    evaluated at every interface as the sine of the angle between the two
    states; in exact arithmetic all of these share one sign, and the one of
    least magnitude is returned. Evaluating at the best conditioned
    interface keeps the function continuous through roots whose
    neighbourhood a single downward sweep would lose to cancellation inside
    thick evanescent layers.
    """
    v = np.asarray(v, dtype=float)
    k = np.broadcast_to(np.asarray(k, dtype=float), v.shape)
    mu_s = stack.substrate.shear_stiffness
    beta_s = np.sqrt(1.0 - (v / stack.substrate_velocity) ** 2)
    layers = list(reversed(stack.layers))  # surface first
    terms = [_layer_terms(layer, k, v) for layer in layers]

    # downward: state below each layer, starting at the free surface
    down = [(np.ones(v.shape), np.zeros(v.shape))]
    for layer, (c, sb, bs) in zip(layers, terms):
        u, t = down[-1]
        r = layer.material.shear_stiffness / mu_s
        down.append(_normalized(c * u + sb / r * t, -r * bs * u + c * t))

    # upward: decaying substrate solution, through the adjugate of each step
    up = [_normalized(np.ones(v.shape), -beta_s)]
    for layer, (c, sb, bs) in zip(reversed(layers), reversed(terms)):
        u, t = up[-1]
        r = layer.material.shear_stiffness / mu_s
        up.append(_normalized(c * u - sb / r * t, r * bs * u + c * t))
    up.reverse()

    w = np.stack([ub * ta - ua * tb for (ua, ta), (ub, tb) in zip(down, up)])
    best = np.argmin(np.abs(w), axis=0)
    return np.take_along_axis(w, best[None, ...], axis=0)[0]


def determinant(stack: LayerStack, frequency: float, trial_velocity):
    """Dispersion function at fixed frequency (k = 2 pi f / v).

    Continuous in the trial velocity; roots are guided Love modes. For one
    layer it equals -(cos k h b1)/(mu_s) times mu1 b1 tan(k h b1) - mu_s b_s.
    """
    v = np.asarray(trial_velocity, dtype=float)
    _check_interval(stack, v)
    out = _mismatch(stack, 2 * np.pi * frequency / v, v)
    return float(out) if out.ndim == 0 else out


def determinant_at_wavelength(stack: LayerStack, wavelength: float, trial_velocity):
    """Dispersion function at fixed wavelength (k = 2 pi / lambda)."""
    v = np.asarray(trial_velocity, dtype=float)
    _check_interval(stack, v)
    out = _mismatch(stack, 2 * np.pi / wavelength, v)
    return float(out) if out.ndim == 0 else out


def solve_modes(
    problem: DispersionProblem,
    max_modes: int = 1,
    grid_points: int = DEFAULT_GRID_POINTS,
    rtol: float = DEFAULT_RTOL,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
) -> list[ModeSolution]:
    """Guided modes in ascending phase velocity (mode 0 is the fundamental)."""
    if max_modes < 1:
        raise ValueError("max_modes must be >= 1")
    stack = problem.stack
    if not stack.supports_love_mode:
        return []
    lo, hi = problem.bounds()
    vs = stack.substrate_velocity
    if not (stack.min_layer_velocity < lo < hi < vs):
        raise ValueError(
            f"invalid bracket ({lo:.6g}, {hi:.6g}); must lie inside "
            f"({stack.min_layer_velocity:.6g}, {vs:.6g})"
        )

    def f(v):
        return float(_mismatch(stack, problem.wavenumber(v), v))

    grid = np.linspace(lo, hi, grid_points)
    values = _mismatch(stack, problem.wavenumber(grid), grid)
    modes: list[ModeSolution] = []
    for i in range(grid_points - 1):
        a, b = values[i], values[i + 1]
        if a == 0.0:
            root = grid[i]
        elif a * b < 0.0:
            root = bisect(f, grid[i], grid[i + 1], xtol=1e-300, rtol=rtol)
            if abs(f(root)) >= residual_tol:
                root = bisect(f, grid[i], grid[i + 1], xtol=1e-300, rtol=4 * np.finfo(float).eps)
        else:
            continue
        modes.append(ModeSolution(float(root), len(modes), f(root)))
        if len(modes) == max_modes:
            break
    return modes


def fundamental_velocity(stack: LayerStack, wavelength: float = DEFAULT_WAVELENGTH) -> float:
    modes = solve_modes(DispersionProblem(stack, wavelength=wavelength))
    if not modes:
        raise ValueError("stack supports no guided Love mode")
    return modes[0].phase_velocity


def effective_materials() -> dict[str, Material]:
    """Catalog with the calibrated effective shear stiffnesses filled in."""
    catalog = builtin_materials()
    catalog["ZnO"] = catalog["ZnO"].with_shear_stiffness(ZNO_EFFECTIVE_SHEAR_STIFFNESS)
    catalog["LiNbO3"] = catalog["LiNbO3"].with_shear_stiffness(
        LINBO3_EFFECTIVE_SHEAR_STIFFNESS
    )
    return catalog


def calibrated_default_stack(
    zno_thickness: float = 700e-9, cofeb_thickness: float = 100e-9
) -> LayerStack:
    """CoFeB / ZnO / LiNbO3 stack with calibrated effective stiffnesses."""
    m = effective_materials()
    return LayerStack(
        substrate=m["LiNbO3"],
        layers=(Layer(m["ZnO"], zno_thickness), Layer(m["CoFeB"], cofeb_thickness)),
    )


@functools.lru_cache(maxsize=None)
def default_path_velocities(wavelength: float = DEFAULT_WAVELENGTH) -> tuple[float, float]:
    """Fundamental velocities of the uncoated (ZnO only) and coated paths."""
    stack = calibrated_default_stack()
    return (
        fundamental_velocity(stack.without("CoFeB"), wavelength),
        fundamental_velocity(stack, wavelength),
    )

