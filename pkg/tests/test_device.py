import math

import numpy as np
import pytest

from msaw.device import (
    BARE,
    COATED,
    DeviceGeometry,
    EchoSpec,
    EnvironmentState,
    FrequencyGrid,
    Segment,
    SensorPhysics,
    Spectrum,
    band_coherent_gain,
    echo_delay,
    echo_delays,
    idt_band_shape,
    nominal_frequency,
    path_velocity,
    synthesize_s11,
)

GEOM = DeviceGeometry()
PHYS = SensorPhysics(v1_nominal=3772.0, v2_nominal=3772.0)
REF = EnvironmentState()


def test_nominal_frequency():
    assert nominal_frequency(3772.0, 9.2e-6) == pytest.approx(410e6)
    assert nominal_frequency(2 * 3772.0, 9.2e-6) == pytest.approx(820e6)
    assert nominal_frequency(9.2e-6, 9.2e-6) == 1.0
    with pytest.raises(ValueError):
        nominal_frequency(0.0, 9.2e-6)
    with pytest.raises(ValueError):
        nominal_frequency(3772.0, -1.0)


def test_geometry_defaults_and_validation():
    assert (GEOM.wavelength, GEOM.idt_pairs, GEOM.path1_length, GEOM.path2_length) == (9.2e-6, 11, 120, 180)
    assert [e.id for e in GEOM.echoes] == [1, 2, 3, 4]
    assert [e.amplitude_db for e in GEOM.echoes] == [-18, -24, -30, -28]
    assert {s.kind for s in GEOM.echo(2).segments} == {COATED}
    assert {s.kind for s in GEOM.echo(1).segments} == {BARE}
    for kw in (dict(wavelength=0), dict(idt_pairs=0), dict(path1_length=-1), dict(metallization_ratio=1.0)):
        with pytest.raises(ValueError):
            DeviceGeometry(**kw)
    with pytest.raises(ValueError, match="duplicate"):
        DeviceGeometry(echoes=(GEOM.echo(1), GEOM.echo(1)))
    with pytest.raises(KeyError):
        GEOM.echo(9)


def test_environment_must_be_finite():
    with pytest.raises(ValueError):
        EnvironmentState(temperature=math.inf)


def test_path_velocity_reference_state():
    phys = SensorPhysics()
    for h in (-4.0, 0.0, 3.0):
        assert path_velocity(phys, BARE, EnvironmentState(field=h)) == phys.v1_nominal


def test_path_velocity_temperature():
    phys = SensorPhysics()
    v = path_velocity(phys, BARE, EnvironmentState(temperature=50.0))
    assert v == pytest.approx(phys.v1_nominal * (1 - 1692.5e-6), rel=1e-14)


def test_path_velocity_field():
    phys = SensorPhysics()
    v = path_velocity(phys, COATED, EnvironmentState(field=0.69))
    assert v == pytest.approx(phys.v2_nominal * (1 - 687.28e-6), rel=1e-14)
    with pytest.raises(ValueError):
        path_velocity(phys, "gold", REF)


def test_echo_delay_arithmetic():
    # 120 * 9.2e-6 / 3772 = 292.683 ns
    assert echo_delay(GEOM, PHYS, GEOM.echo(1), REF) == pytest.approx(292.7e-9, abs=0.05e-9)


@pytest.mark.parametrize("env", [REF, EnvironmentState(7.0, 0.3), EnvironmentState(50.0, 4.0)])
def test_echo_delay_identities(env):
    phys = SensorPhysics()
    d = echo_delays(GEOM, phys, env)
    assert d[3] == pytest.approx(2 * d[1], rel=1e-15)
    assert d[4] == pytest.approx(d[1] + d[2], rel=1e-15)


def test_delay_reciprocity():
    phys = SensorPhysics()
    t0 = echo_delay(GEOM, phys, GEOM.echo(1), REF)
    t1 = echo_delay(GEOM, phys, GEOM.echo(1), EnvironmentState(temperature=35.0))
    assert t1 / t0 == pytest.approx(1 / (1 - 677e-6), rel=1e-12)
    assert (t1 / t0 - 1) * 1e6 == pytest.approx(677, abs=0.5)


def test_band_shape():
    assert idt_band_shape(GEOM, 410e6, 410e6) == 1.0
    assert idt_band_shape(GEOM, 410e6 * (1 + 1 / 11), 410e6) == pytest.approx(0.0, abs=1e-30)
    x = 0.5 / 11
    # sin(pi/2)/(pi/2) squared
    assert idt_band_shape(GEOM, 410e6 * (1 + x), 410e6) == pytest.approx((2 / math.pi) ** 2, rel=1e-14)
    with pytest.raises(ValueError):
        idt_band_shape(GEOM, 1.0, 0.0)


def test_single_zero_delay_echo_is_band_shape():
    # a vanishing path gives tau -> 0; the phase factor is then 1 to double precision
    geom = DeviceGeometry(echoes=(EchoSpec(1, (Segment(1e-12, BARE),), 0.0),))
    grid = FrequencyGrid(370e6, 450e6, 801)
    s = synthesize_s11(geom, PHYS, REF, grid)
    fc = geom.echo(1).length / echo_delay(geom, PHYS, geom.echo(1), REF)
    assert np.allclose(s.values.real, idt_band_shape(geom, grid.frequencies, fc), atol=1e-12)
    assert np.max(np.abs(s.values.imag)) < 1e-9


def test_linearity_over_echoes():
    grid = FrequencyGrid(370e6, 450e6, 1001)
    phys = SensorPhysics()
    env = EnvironmentState(31.0, 0.2)
    total = synthesize_s11(GEOM, phys, env, grid)
    parts = [synthesize_s11(DeviceGeometry(echoes=(e,)), phys, env, grid) for e in GEOM.echoes]
    acc = parts[0]
    for p in parts[1:]:
        acc = acc + p
    assert np.allclose(total.values, acc.values, rtol=0, atol=1e-15)


def test_noise_is_deterministic_per_seed():
    phys = SensorPhysics()
    a = synthesize_s11(GEOM, phys, REF, snr_db=30, seed=4)
    b = synthesize_s11(GEOM, phys, REF, snr_db=30, seed=4)
    c = synthesize_s11(GEOM, phys, REF, snr_db=30, seed=5)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_noise_level_matches_snr():
    phys = SensorPhysics()
    clean = synthesize_s11(GEOM, phys, REF)
    noisy = synthesize_s11(GEOM, phys, REF, snr_db=20, seed=1)
    noise = noisy.values - clean.values
    n = noise.size
    # time-domain noise power per sample under 1/N ifft = sigma^2 / N
    td_power = np.mean(np.abs(noise) ** 2) / n
    peak = 10 ** (-18 / 20) * band_coherent_gain(GEOM, FrequencyGrid(), phys.v1_nominal / GEOM.wavelength)
    assert 10 * np.log10(peak**2 / td_power) == pytest.approx(20, abs=0.3)


def test_band_warning():
    assert synthesize_s11(GEOM, SensorPhysics(), REF).band_warning
    # edges on the second nulls of the band shape
    fc = 410e6
    wide = FrequencyGrid(fc * (1 - 2 / 11), fc * (1 + 2 / 11), 4001)
    geom = DeviceGeometry(echoes=(GEOM.echo(1),))
    assert not synthesize_s11(geom, PHYS, REF, wide).band_warning


def test_spectrum_validation():
    with pytest.raises(ValueError):
        Spectrum(1.0, 2.0, [1.0])
    with pytest.raises(ValueError):
        Spectrum(2.0, 1.0, [1.0, 2.0])
    with pytest.raises(ValueError):
        Spectrum(1.0, 2.0, [1.0, np.nan])
    with pytest.raises(ValueError):
        Spectrum(1.0, 2.0, [1, 2]) + Spectrum(1.0, 3.0, [1, 2])
