"""CSV tables with fixed column sets.

Numbers use '.' as decimal separator; magnitudes below 1e-3 are written in
exponent notation, everything else with the shortest round-trip form. Every
file starts with a header row and every row ends with a newline.
"""

from __future__ import annotations

import csv
import io
import math
from typing import Iterable, Sequence

# columns per producing subcommand
SWEEP_COLUMNS = ("sweep_id", "temperature_c", "field_mt", "peak_id", "f_zero_hz")
INTERROGATE_COLUMNS = ("peak_id", "gate_center_s", "f_zero_hz", "level_db")
COMPENSATE_COLUMNS = ("sweep_id", "temperature_c", "field_mt", "shift_ppm", "shift_ppm_compensated")
CALIBRATE_COLUMNS = ("quantity", "peak_id", "value", "unit", "r_squared", "residual_rms")
DISPERSE_COLUMNS = ("control", "mode_index", "phase_velocity_mps", "residual")
MAGCURVE_COLUMNS = ("field_mt", "shift_ppm")
SPECTRUM_COLUMNS = ("frequency_hz", "s11_real", "s11_imag", "s11_db")
TIME_COLUMNS = ("time_s", "level_db")


class TableError(ValueError):
    pass


def format_number(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0:
        return "0"
    if math.isfinite(x) and abs(x) < 1e-3:
        # shortest exponent form that still parses back to the same float
        for digits in range(17):
            text = f"{x:.{digits}e}"
            if float(text) == x:
                return text
    return repr(x)


def dumps_csv(columns: Sequence[str], rows: Iterable[Sequence], comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise TableError(f"row has {len(row)} fields, header has {len(columns)}")
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def loads_csv(text: str, required: Sequence[str] = ()) -> list[dict]:
    """Rows as dicts; numeric-looking cells become floats. '#' lines are skipped."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    if reader.fieldnames is None:
        raise TableError("missing header row")
    missing = [c for c in required if c not in reader.fieldnames]
    if missing:
        raise TableError(f"missing columns: {', '.join(missing)}")
    out = []
    for row in reader:
        parsed = {}
        for k, v in row.items():
            try:
                parsed[k] = float(v)
            except (TypeError, ValueError):
                parsed[k] = v
        out.append(parsed)
    return out
