import cmath
import math

import numpy as np
import pytest

from msaw.device import Spectrum
from msaw.io import TouchstoneError, TouchstoneRecord, read_s1p, write_s1p


def test_ri_example():
    rec = read_s1p("# HZ S RI R 50\n410e6 -0.5 0.1\n")
    assert rec.frequencies.tolist() == [410e6]
    assert rec.values[0] == complex(-0.5, 0.1)
    assert (rec.unit, rec.fmt, rec.resistance) == ("HZ", "RI", 50.0)


def test_db_angle_example():
    rec = read_s1p("# Hz S DB R 50\n410e6 -18 30\n")
    expected = cmath.rect(10 ** (-18 / 20), math.radians(30))
    assert rec.values[0] == pytest.approx(expected, rel=1e-15)
    assert abs(rec.values[0]) == pytest.approx(0.12589254117941673)


def test_ma_and_units():
    rec = read_s1p("# mhz s ma r 75\n410 0.5 -90\n")
    assert rec.frequencies[0] == 410e6
    assert rec.values[0] == pytest.approx(-0.5j, abs=1e-16)
    assert rec.resistance == 75


def test_defaults_without_tokens():
    rec = read_s1p("#\n1 1 0\n")
    assert (rec.unit, rec.fmt, rec.resistance) == ("GHZ", "MA", 50.0)
    assert rec.frequencies[0] == 1e9


def test_comments_kept():
    rec = read_s1p("! first\n# HZ S RI R 50\n! second\n1 0 0 ! trailing\n")
    assert rec.comments == ["first", "second", "trailing"]
    assert rec.values[0] == 0


@pytest.mark.parametrize(
    "text, line",
    [
        ("# HZ S RI R 50\n2 0 0\n1 0 0\n", 3),
        ("# HZ S RI R 50\n1 0 0\n1 0 0\n", 3),
        ("# HZ S RI R 50\n1 0\n", 2),
        ("# HZ S RI R 50\n1 0 0 0 0\n", 2),
        ("# HZ S RI R 50\n1 x 0\n", 2),
        ("1 0 0\n# HZ S RI R 50\n", 1),
        ("# HZ Y RI R 50\n", 1),
        ("# HZ S XX R 50\n", 1),
    ],
)
def test_malformed_reports_line(text, line):
    with pytest.raises(TouchstoneError) as info:
        read_s1p(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_header():
    with pytest.raises(TouchstoneError, match="option line"):
        read_s1p("! only a comment\n")


def test_second_option_line_ignored():
    rec = read_s1p("# HZ S RI R 50\n# GHZ S DB R 75\n1 0.5 0\n")
    assert rec.fmt == "RI" and rec.values[0] == 0.5


def test_empty_record_is_header_only():
    text = write_s1p(TouchstoneRecord([], []))
    assert text == "# HZ S RI R 50\n"
    assert read_s1p(text).frequencies.size == 0


def random_record(seed, n=1000):
    rng = np.random.default_rng(seed)
    f = np.cumsum(rng.uniform(1e3, 1e5, n)) + 370e6
    mag = 10 ** rng.uniform(-4, 0, n)
    s = mag * np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    return TouchstoneRecord(f, s)


def max_rel_error(a, b):
    return float(np.max(np.abs(a - b) / np.abs(b)))


@pytest.mark.parametrize("fmt", ["RI", "MA", "DB"])
@pytest.mark.parametrize("unit", ["HZ", "MHZ", "GHZ"])
def test_round_trip(fmt, unit):
    rec = random_record(7)
    back = read_s1p(write_s1p(rec, fmt, unit))
    assert max_rel_error(back.values, rec.values) < 1e-9
    assert max_rel_error(back.frequencies, rec.frequencies) < 1e-12


def test_conversion_chain():
    rec = random_record(8)
    db = read_s1p(write_s1p(rec, "DB"))
    ri = read_s1p(write_s1p(db, "RI"))
    assert max_rel_error(ri.values, rec.values) < 1e-9


def test_spectrum_bridge():
    sp = Spectrum(1e6, 2e6, np.exp(1j * np.linspace(0, 1, 11)))
    rec = TouchstoneRecord.from_spectrum(sp, comments=["x"])
    assert rec.comments == ["x"]
    back = read_s1p(write_s1p(rec)).to_spectrum()
    assert np.allclose(back.values, sp.values, rtol=1e-12)
    assert back.f_start == sp.f_start and back.f_stop == sp.f_stop


def test_write_rejects_unknown_format():
    with pytest.raises(TouchstoneError):
        write_s1p(random_record(1, 3), "XY")
