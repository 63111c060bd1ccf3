"""Touchstone v1 one-port (.s1p) reader and writer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..device import Spectrum
from ..pipeline import spectrum_from_samples

UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
FORMATS = ("RI", "MA", "DB")


class TouchstoneError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(eq=False)
class TouchstoneRecord:
    """One-port S-parameter data. Frequencies are held in Hz whatever ``unit`` says."""

    frequencies: np.ndarray
    values: np.ndarray
    unit: str = "HZ"
    fmt: str = "RI"
    resistance: float = 50.0
    comments: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        self.unit = self.unit.upper()
        self.fmt = self.fmt.upper()
        if self.unit not in UNITS:
            raise TouchstoneError(f"unsupported frequency unit {self.unit!r}")
        if self.fmt not in FORMATS:
            raise TouchstoneError(f"unsupported data format {self.fmt!r}")
        if self.frequencies.shape != self.values.shape:
            raise TouchstoneError("frequency and value arrays differ in length")

    def to_spectrum(self) -> Spectrum:
        return spectrum_from_samples(self.frequencies, self.values)

    @classmethod
    def from_spectrum(cls, spectrum: Spectrum, **kw) -> "TouchstoneRecord":
        return cls(spectrum.frequencies, spectrum.values, **kw)


def _to_complex(a: float, b: float, fmt: str) -> complex:
    if fmt == "RI":
        return complex(a, b)
    mag = a if fmt == "MA" else 10 ** (a / 20)
    ang = math.radians(b)
    return complex(mag * math.cos(ang), mag * math.sin(ang))


def _parse_option_line(tokens: list[str], lineno: int) -> tuple[str, str, float]:
    unit, fmt, resistance = "GHZ", "MA", 50.0
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in UNITS:
            unit = tok
        elif tok in FORMATS:
            fmt = tok
        elif tok == "S":
            pass
        elif tok in ("Y", "Z", "G", "H"):
            raise TouchstoneError(f"parameter {tok} is not supported, only S", lineno)
        elif tok == "R":
            try:
                resistance = float(tokens[i + 1])
            except (IndexError, ValueError):
                raise TouchstoneError("R must be followed by a reference resistance", lineno)
            i += 1
        else:
            raise TouchstoneError(f"unrecognized option {tokens[i]!r}", lineno)
        i += 1
    return unit, fmt, resistance


def read_s1p(text: str) -> TouchstoneRecord:
    """Parse one-port Touchstone v1 text.

    Only the first option line counts; later ones are ignored as the format
    prescribes. Comments are kept in order without their '!' marker.
    """
    comments: list[str] = []
    option = None
    freqs: list[float] = []
    values: list[complex] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body, bang, comment = raw.partition("!")
        if bang:
            comments.append(comment.strip())
        body = body.strip()
        if not body:
            continue
        if body.startswith("#"):
            if option is None:
                option = _parse_option_line(body[1:].split(), lineno)
            continue
        if option is None:
            raise TouchstoneError("data before the option line ('# ...')", lineno)
        cols = body.split()
        if len(cols) != 3:
            raise TouchstoneError(f"expected 3 columns for a one-port row, got {len(cols)}", lineno)
        try:
            f, a, b = (float(c) for c in cols)
        except ValueError:
            raise TouchstoneError(f"non-numeric value in row {body!r}", lineno)
        unit, fmt, _ = option
        f *= UNITS[unit]
        if freqs and not f > freqs[-1]:
            raise TouchstoneError("frequencies must be strictly increasing", lineno)
        freqs.append(f)
        values.append(_to_complex(a, b, fmt))
    if option is None:
        raise TouchstoneError("missing option line ('# ...')")
    unit, fmt, resistance = option
    return TouchstoneRecord(np.array(freqs), np.array(values, dtype=complex),
                            unit, fmt, resistance, comments)


def write_s1p(record: TouchstoneRecord, fmt: Optional[str] = None, unit: Optional[str] = None) -> str:
    """Serialize with shortest round-trip float formatting."""
    fmt = (fmt or record.fmt).upper()
    unit = (unit or record.unit).upper()
    if fmt not in FORMATS:
        raise TouchstoneError(f"unsupported data format {fmt!r}")
    if unit not in UNITS:
        raise TouchstoneError(f"unsupported frequency unit {unit!r}")
    scale = UNITS[unit]
    lines = [f"! {c}" if c else "!" for c in record.comments]
    lines.append(f"# {unit} S {fmt} R {record.resistance:g}")
    for f, s in zip(record.frequencies, record.values):
        if fmt == "RI":
            a, b = s.real, s.imag
        else:
            mag = abs(s)
            a = mag if fmt == "MA" else 20 * math.log10(mag)
            b = math.degrees(math.atan2(s.imag, s.real))
        lines.append(f"{float(f) / scale!r} {float(a)!r} {float(b)!r}")
    return "\n".join(lines) + "\n"
