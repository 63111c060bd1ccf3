"""Anhysteretic Delta-E response of the CoFeB-coated path along the easy axis."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MagnetoelasticModel:
    """Clamped-linear fractional velocity response to the in-plane field.

    Attributes:
        slope: sensitivity inside the linear window [ppm/mT]
        h_low, h_high: linear window bounds [mT]
        smoothing: half-width of the quadratic corner blends [mT]; 0 gives
            hard corners
        h_ref: field at which the shift is zero [mT]
    """

    slope: float = -781.0
    h_low: float = -0.19
    h_high: float = 0.69
    smoothing: float = 0.0
    h_ref: float = -4.0

    def __post_init__(self):
        for name in ("slope", "h_low", "h_high", "smoothing", "h_ref"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.h_low < self.h_high:
            raise ValueError("h_low must be below h_high")
        if self.smoothing < 0:
            raise ValueError("smoothing must be >= 0")
        if 2 * self.smoothing > self.h_high - self.h_low:
            raise ValueError("smoothing corners overlap: need 2*smoothing <= h_high - h_low")

    @property
    def span_ppm(self) -> float:
        """Full swing between the two plateaus."""
        return abs(self.slope) * (self.h_high - self.h_low)

    def _clamp(self, h):
        h = np.asarray(h, dtype=float)
        a, b, w = self.h_low, self.h_high, self.smoothing
        out = np.array(np.clip(h, a, b), dtype=float)
        if w > 0:
            lo = (h > a - w) & (h < a + w)
            hi = (h > b - w) & (h < b + w)
            out[lo] = a + (h[lo] - a + w) ** 2 / (4 * w)
            out[hi] = b - (b + w - h[hi]) ** 2 / (4 * w)
        return out


def fractional_shift(model: MagnetoelasticModel, h):
    """Fractional velocity change in ppm at field ``h`` relative to ``h_ref``."""
    out = model.slope * (model._clamp(h) - model._clamp(model.h_ref))
    return float(out) if np.ndim(out) == 0 else out


def field_sweep(model: MagnetoelasticModel, fields) -> list[float]:
    return [float(x) for x in np.atleast_1d(fractional_shift(model, np.asarray(fields, dtype=float)))]
