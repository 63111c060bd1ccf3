import pytest
from hypothesis import given, strategies as st

from msaw.io import dumps_csv, loads_csv
from msaw.io.tables import SWEEP_COLUMNS, TableError, format_number


def test_number_formatting():
    assert format_number(0.0) == "0"
    assert format_number(3) == "3"
    assert format_number(True) == "1"
    assert format_number(410e6) == "410000000.0"
    assert format_number(-67.7) == "-67.7"
    assert format_number(1e-7) == "1e-07"
    assert format_number(-2.5e-4) == "-2.5e-04"
    assert format_number(1e-3) == "0.001"
    assert "e" in format_number(9.99e-4)


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_number_round_trip(x):
    text = format_number(x)
    assert float(text) == x
    assert "," not in text
    if x != 0 and abs(x) < 1e-3:
        assert "e" in text


def test_csv_layout():
    text = dumps_csv(("a", "b"), [(1, 0.5), (2, 1e-9)], comments=["seed=0"])
    assert text == "# seed=0\na,b\n1,0.5\n2,1e-09\n"
    assert text.endswith("\n")


def test_header_only():
    assert dumps_csv(SWEEP_COLUMNS, []) == ",".join(SWEEP_COLUMNS) + "\n"


def test_round_trip_and_missing_columns():
    text = dumps_csv(("x", "name"), [(1.25, "peak"), (3e-5, "q")])
    rows = loads_csv(text, required=("x",))
    assert rows == [{"x": 1.25, "name": "peak"}, {"x": 3e-5, "name": "q"}]
    with pytest.raises(TableError, match="missing columns: y, z"):
        loads_csv(text, required=("x", "y", "z"))
    with pytest.raises(TableError):
        loads_csv("")


def test_row_width_checked():
    with pytest.raises(TableError):
        dumps_csv(("a", "b"), [(1,)])
