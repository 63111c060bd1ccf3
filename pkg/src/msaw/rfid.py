"""
Pulse-position identification codes carried by extra echoes.

A code is a set of occupied time slots after the two sensing echoes. Each
occupied slot k adds an uncoated-path echo arriving at t0 + k*pitch; the
reader recovers the set by thresholding the time envelope slot by slot.
Codes print as hex of the occupancy bitmap, slot 0 being the least
significant bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .device import (
    BARE,
    DeviceGeometry,
    EchoSpec,
    EnvironmentState,
    Segment,
    SensorPhysics,
    echo_delay,
    echo_time_width,
)
from .pipeline import TimeResponse

ID_ECHO_BASE = 100
SENSING_ECHOES = (1, 2)


class CodeError(ValueError):
    pass


class NoTagError(ValueError):
    """No slot rises above the decision threshold."""


@dataclass(frozen=True)
class SlotTemplate:
    slot_count: int
    slot_pitch: float  # s
    t0: float  # s, center of slot 0
    guard: float  # s

    def __post_init__(self):
        if self.slot_count < 1:
            raise CodeError("slot_count must be >= 1")
        if not (self.slot_pitch > 0 and self.t0 > 0 and self.guard >= 0):
            raise CodeError("pitch and t0 must be positive, guard non-negative")
        if not self.slot_pitch > 2 * self.guard:
            raise CodeError("guard leaves no room inside the slot")

    def center(self, k: int) -> float:
        return self.t0 + k * self.slot_pitch

    @property
    def half_window(self) -> float:
        return self.slot_pitch / 2 - self.guard

    @property
    def end(self) -> float:
        return self.center(self.slot_count - 1) + self.slot_pitch / 2


@dataclass(frozen=True)
class TagCode:
    template: SlotTemplate
    occupied: frozenset[int]

    def __post_init__(self):
        occ = frozenset(int(k) for k in self.occupied)
        object.__setattr__(self, "occupied", occ)
        if not occ:
            raise CodeError("a tag code needs at least one occupied slot")
        bad = [k for k in occ if not 0 <= k < self.template.slot_count]
        if bad:
            raise CodeError(f"slot indices {sorted(bad)} outside 0..{self.template.slot_count - 1}")

    @property
    def bitmap(self) -> int:
        return sum(1 << k for k in self.occupied)

    @property
    def hex(self) -> str:
        return format(self.bitmap, "x")

    @classmethod
    def from_bitmap(cls, template: SlotTemplate, bitmap: int) -> "TagCode":
        return cls(template, frozenset(k for k in range(template.slot_count) if bitmap >> k & 1))


def default_template(geometry: DeviceGeometry, physics: SensorPhysics,
                     slot_count: int = 8) -> SlotTemplate:
    """Slots sized from the echo width 2N/f: guard = width/2, pitch = 2*width.

    Slot 0 is placed just clear of the path-2 sensing echo.
    """
    width = echo_time_width(geometry, physics.v1_nominal / geometry.wavelength)
    guard, pitch = width / 2, 2 * width
    env = EnvironmentState()
    last_sensing = max(echo_delay(geometry, physics, geometry.echo(i), env) for i in SENSING_ECHOES)
    t0 = last_sensing + width / 2 + pitch / 2 + guard
    return SlotTemplate(slot_count, pitch, t0, guard)


def encode(code: TagCode, geometry: DeviceGeometry, physics: SensorPhysics,
           amplitude_db: float = -24.0) -> DeviceGeometry:
    """Device whose echoes are the two sensing echoes plus one echo per occupied slot.

    Slot delays are converted to uncoated path lengths at the nominal
    velocity. The round-trip and cascaded echoes (3, 4) are dropped.
    """
    tpl = code.template
    env = EnvironmentState()
    width = echo_time_width(geometry, physics.v1_nominal / geometry.wavelength)
    sensing = [geometry.echo(i) for i in SENSING_ECHOES]
    for echo in sensing:
        tau = echo_delay(geometry, physics, echo, env)
        for k in range(tpl.slot_count):
            if abs(tau - tpl.center(k)) < tpl.slot_pitch / 2 + width / 2:
                raise CodeError(
                    f"slot {k} collides with sensing echo {echo.id} at {tau * 1e9:.1f} ns"
                )
    ids = [
        EchoSpec(
            ID_ECHO_BASE + k,
            (Segment(tpl.center(k) * physics.v1_nominal / geometry.wavelength, BARE),),
            amplitude_db,
        )
        for k in sorted(code.occupied)
    ]
    return replace(geometry, echoes=tuple(sensing) + tuple(ids))


def slot_levels(tr: TimeResponse, template: SlotTemplate) -> np.ndarray:
    """Envelope maximum inside each slot's decision window."""
    if template.end > tr.t_start + tr.duration:
        raise CodeError("slot template extends beyond the time record")
    t, env = tr.times, tr.envelope
    out = np.empty(template.slot_count)
    for k in range(template.slot_count):
        c = template.center(k)
        sel = np.abs(t - c) <= template.half_window
        out[k] = env[sel].max() if sel.any() else 0.0
    return out


def decode(tr: TimeResponse, template: SlotTemplate, threshold_db: float = -12.0) -> TagCode:
    """Slots whose level is within ``threshold_db`` of the strongest slot."""
    levels = slot_levels(tr, template)
    top = levels.max()
    if not top > 0:
        raise NoTagError("no tag detected")
    limit = top * 10 ** (threshold_db / 20)
    return TagCode(template, frozenset(int(k) for k in np.flatnonzero(levels >= limit)))


def all_codes(template: SlotTemplate) -> Iterable[TagCode]:
    for bitmap in range(1, 1 << template.slot_count):
        yield TagCode.from_bitmap(template, bitmap)
