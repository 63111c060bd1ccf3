import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from msaw.dispersion import (
    DEFAULT_WAVELENGTH,
    DispersionProblem,
    EvanescenceError,
    calibrated_default_stack,
    default_path_velocities,
    determinant,
    fundamental_velocity,
    solve_modes,
)
from msaw.materials import Layer, LayerStack, Material, shear_velocity
from oracles import love_single_layer

V1, MU1 = 2731.0, 42.37e9
VS, RHO_S = 4000.0, 4700.0
MUS = RHO_S * VS**2
F = 410e6


def single_layer_stack(h, v1=V1, mu1=MU1):
    layer = Material("film", mu1 / v1**2, mu1)
    return LayerStack(Material("sub", RHO_S, MUS), (Layer(layer, h),))


def fundamental_at(stack, f=F):
    modes = solve_modes(DispersionProblem(stack, frequency=f))
    assert modes, "expected a guided mode"
    return modes[0].phase_velocity


@pytest.mark.parametrize("hf", np.logspace(0, np.log10(3000.0), 20))
def test_matches_closed_form(hf):
    h = hf / F
    expected = love_single_layer(V1, MU1, VS, MUS, h, F)
    assert fundamental_at(single_layer_stack(h)) == pytest.approx(expected, rel=1e-8)


def test_thin_and_thick_limits():
    thin = fundamental_at(single_layer_stack(0.05 / F))
    thick = fundamental_at(single_layer_stack(20000.0 / F))
    assert 0 < VS - thin < 1e-6 * VS
    assert 0 < thick - V1 < 1e-3 * V1


def test_two_identical_layers_equal_one():
    film = Material("film", MU1 / V1**2, MU1)
    sub = Material("sub", RHO_S, MUS)
    split = LayerStack(sub, (Layer(film, 300e-9), Layer(film, 450e-9)))
    expected = love_single_layer(V1, MU1, VS, MUS, 750e-9, F)
    assert fundamental_at(split) == pytest.approx(expected, rel=1e-8)


def test_single_layer_determinant_sign():
    h = 700e-9
    stack = single_layer_stack(h)
    for v in np.linspace(V1 * 1.001, VS * 0.999, 200):
        k = 2 * math.pi * F / v
        b1 = math.sqrt(v * v / V1**2 - 1)
        bs = math.sqrt(1 - v * v / VS**2)
        ref = -math.cos(k * h * b1) * (MU1 * b1 * math.tan(k * h * b1) - MUS * bs)
        assert np.sign(determinant(stack, F, v)) == np.sign(ref)


def test_slow_film_on_thick_fast_layer():
    # the mode lives in the slow top film and decays through a fast layer
    # many wavelengths thick; a one-way sweep loses it to cancellation
    slow = Material("slow", MU1 / 1900.0**2, MU1)
    fast = Material("fast", 3000.0, 3000.0 * 3500.0**2)
    sub = Material("sub", RHO_S, MUS)
    h_top = 400e-9
    stack = LayerStack(sub, (Layer(fast, 60e-6), Layer(slow, h_top)))
    modes = solve_modes(DispersionProblem(stack, frequency=F))
    assert modes and all(abs(m.residual) < 1e-6 for m in modes)
    # the fast layer acts as a half-space for the lowest mode
    expected = love_single_layer(1900.0, MU1, 3500.0, fast.shear_stiffness, h_top, F)
    assert modes[0].phase_velocity == pytest.approx(expected, rel=1e-8)


def test_bare_substrate_has_no_mode():
    stack = LayerStack(Material("sub", RHO_S, MUS))
    assert solve_modes(DispersionProblem(stack, frequency=F)) == []


def test_evanescence_violation():
    stack = single_layer_stack(700e-9)
    with pytest.raises(EvanescenceError, match="evanescence violated"):
        determinant(stack, F, VS)
    with pytest.raises(EvanescenceError):
        determinant(stack, F, V1 * 0.99)


def test_invalid_bracket():
    stack = single_layer_stack(700e-9)
    with pytest.raises(ValueError, match="invalid bracket"):
        solve_modes(DispersionProblem(stack, frequency=F, v_min=VS * 1.1))
    with pytest.raises(ValueError):
        solve_modes(DispersionProblem(stack, frequency=F), max_modes=0)


def test_problem_needs_one_of_frequency_or_wavelength():
    with pytest.raises(ValueError):
        DispersionProblem(single_layer_stack(1e-6))
    with pytest.raises(ValueError):
        DispersionProblem(single_layer_stack(1e-6), frequency=1.0, wavelength=1.0)


def test_bracketing_soundness_and_ordering():
    stack = single_layer_stack(8e-6)
    problem = DispersionProblem(stack, frequency=F)
    modes = solve_modes(problem, max_modes=5)
    assert len(modes) >= 2
    velocities = [m.phase_velocity for m in modes]
    assert velocities == sorted(velocities)
    assert [m.mode_index for m in modes] == list(range(len(modes)))
    lo, hi = problem.bounds()
    for m in modes:
        assert lo <= m.phase_velocity <= hi
        assert abs(m.residual) < 1e-6
        dv = m.phase_velocity * 1e-7
        assert determinant(stack, F, m.phase_velocity - dv) * determinant(stack, F, m.phase_velocity + dv) < 0


def test_default_stack():
    stack = calibrated_default_stack()
    assert [l.material.name for l in stack.layers] == ["ZnO", "CoFeB"]
    assert [l.thickness for l in stack.layers] == [700e-9, 100e-9]
    modes = solve_modes(DispersionProblem(stack, wavelength=DEFAULT_WAVELENGTH))
    assert len(modes) == 1
    assert modes[0].phase_velocity == pytest.approx(3772.0, rel=0.05)
    assert modes[0].phase_velocity / DEFAULT_WAVELENGTH == pytest.approx(410e6, rel=0.05)


def test_thicker_zno_is_slower():
    stack = calibrated_default_stack()
    assert fundamental_velocity(stack.with_thickness(0, 1400e-9)) < fundamental_velocity(stack)


def test_path_velocities():
    v1, v2 = default_path_velocities()
    assert v2 == pytest.approx(3772.0, rel=1e-9)
    assert v2 < v1 < shear_velocity(calibrated_default_stack().substrate)


@st.composite
def guided_stacks(draw):
    """Stacks whose fundamental mode is slower than none of its layers."""
    vs = draw(st.floats(3000, 6000))
    n = draw(st.integers(1, 3))
    layers = []
    for _ in range(n):
        v = draw(st.floats(0.3, 0.95)) * vs
        rho = draw(st.floats(2000, 9000))
        h = draw(st.floats(50e-9, 3e-6))
        layers.append(Layer(Material("m", rho, rho * v * v), h))
    stack = LayerStack(Material("sub", 4700.0, 4700.0 * vs * vs), tuple(layers))
    return stack


@settings(max_examples=40, deadline=None)
@given(stack=guided_stacks(), index=st.integers(0, 2), factor=st.floats(1.05, 3.0))
def test_thickness_monotonicity(stack, index, factor):
    v = fundamental_at(stack)
    fastest_layer = max(shear_velocity(l.material) for l in stack.layers)
    if v <= fastest_layer:
        return  # outside the valid-stack class: some layer is evanescent at the mode
    index %= len(stack.layers)
    thicker = stack.with_thickness(index, stack.layers[index].thickness * factor)
    assert fundamental_at(thicker) <= v * (1 + 1e-10)
