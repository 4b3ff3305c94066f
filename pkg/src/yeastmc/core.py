"""Shared domain types: concentrations, stimulus schedules, trajectories.

Internally every species is carried in nM and every time in minutes; the
channel is the one exception and works in SI (see :mod:`yeastmc.channel`).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class ConfigurationError(ValueError):
    """Invalid configuration value (unknown unit, malformed schedule, ...)."""


class DataError(ValueError):
    """Input data is missing a required field or is otherwise unusable."""


_TO_NM = {"nM": 1.0, "µM": 1e3, "uM": 1e3, "M": 1e9}


@dataclass(frozen=True)
class Concentration:
    value: float
    unit: str = "nM"

    def __post_init__(self):
        if self.unit not in _TO_NM:
            raise ConfigurationError(f"unknown concentration unit {self.unit!r}")
        if not math.isfinite(self.value) or self.value < 0:
            raise ValueError(f"concentration must be finite and >= 0, got {self.value}")

    @property
    def nM(self) -> float:
        return self.value * _TO_NM[self.unit]


def convert(c: Concentration, target_unit: str) -> Concentration:
    """Express ``c`` in ``target_unit`` (one of nM, µM/uM, M)."""
    if target_unit not in _TO_NM:
        raise ConfigurationError(f"unknown concentration unit {target_unit!r}")
    src, dst = _TO_NM[c.unit], _TO_NM[target_unit]
    if src == dst:
        return Concentration(c.value, target_unit)
    if src > dst:
        return Concentration(c.value * (src / dst), target_unit)
    return Concentration(c.value / (dst / src), target_unit)


def molar_to_nM(x):
    """Channel (M) to receiver (nM) bridge; works on scalars and arrays."""
    return np.asarray(x, dtype=float) * _TO_NM["M"]


def nM_to_molar(x):
    return np.asarray(x, dtype=float) / _TO_NM["M"]


@dataclass(frozen=True)
class StimulusProfile:
    """Piecewise-constant input schedule.

    ``segments`` holds ``(t_start, t_end, level)`` triples in minutes.
    Segments are left-closed and right-open; outside all segments the
    level is zero.
    """

    segments: tuple[tuple[float, float, Concentration], ...] = ()

    def __post_init__(self):
        segs = tuple(
            (float(a), float(b), lvl if isinstance(lvl, Concentration) else Concentration(float(lvl)))
            for a, b, lvl in self.segments
        )
        segs = tuple(sorted(segs, key=lambda s: s[0]))
        for a, b, _ in segs:
            if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
                raise ConfigurationError(f"segment needs t_start < t_end, got ({a}, {b})")
        for (a0, b0, _), (a1, b1, _) in zip(segs, segs[1:]):
            if a1 < b0:
                raise ConfigurationError(f"segments overlap: ({a0}, {b0}) and ({a1}, {b1})")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "_starts", np.array([s[0] for s in segs]))
        object.__setattr__(self, "_ends", np.array([s[1] for s in segs]))
        object.__setattr__(self, "_levels", np.array([s[2].nM for s in segs]))

    @classmethod
    def from_pulses(cls, starts: Iterable[float], width: float, level: Concentration) -> "StimulusProfile":
        return cls(tuple((t, t + width, level) for t in starts))

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({t for a, b, _ in self.segments for t in (a, b)}))

    def level_nM(self, t: float) -> float:
        """Level at ``t`` in nM; the hot path used inside derivative functions."""
        i = np.searchsorted(self._starts, t, side="right") - 1
        if i >= 0 and t < self._ends[i]:
            return float(self._levels[i])
        return 0.0

    def scaled(self, factor: float) -> "StimulusProfile":
        return StimulusProfile(tuple((a, b, Concentration(l.nM * factor)) for a, b, l in self.segments))

    def end(self) -> float:
        return self.segments[-1][1] if self.segments else 0.0


def evaluate_stimulus(p: StimulusProfile, t: float) -> Concentration:
    if t < 0:
        raise ValueError("stimulus is defined for t >= 0")
    return Concentration(p.level_nM(t))


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed concentration series (rows are times, columns species)."""

    species_names: tuple[str, ...]
    times: np.ndarray
    values: np.ndarray
    diagnostics: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        names = tuple(self.species_names)
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if times.ndim != 1 or values.shape != (times.size, len(names)):
            raise ValueError(
                f"shape mismatch: {times.size} times, {len(names)} names, values {values.shape}"
            )
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("trajectory values must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "species_names", names)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.times.size

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.species_names.index(name)]
        except ValueError:
            raise DataError(f"species {name!r} not in trajectory") from None

    def interpolate(self, t) -> np.ndarray:
        """Linear interpolation of all species at ``t`` (scalar or array).

        Only defined inside ``[times[0], times[-1]]``.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < self.times[0]) or np.any(t > self.times[-1]):
            raise ValueError("interpolation outside trajectory time range")
        flat = np.atleast_1d(t)
        j = np.clip(np.searchsorted(self.times, flat, side="right") - 1, 0, max(self.times.size - 2, 0))
        if self.times.size == 1:
            out = np.repeat(self.values[:1], flat.size, axis=0)
        else:
            t0, t1 = self.times[j], self.times[j + 1]
            w = ((flat - t0) / (t1 - t0))[:, None]
            out = self.values[j] * (1 - w) + self.values[j + 1] * w
            exact = flat == t1
            out[exact] = self.values[j[exact] + 1]
            exact = flat == t0
            out[exact] = self.values[j[exact]]
        return out[0] if t.ndim == 0 else out

    def resample(self, dt: float) -> "Trajectory":
        """Uniform grid from the first to the last time (endpoint included)."""
        n = int(math.floor((self.times[-1] - self.times[0]) / dt + 1e-9))
        grid = self.times[0] + dt * np.arange(n + 1)
        if grid[-1] < self.times[-1] - 1e-9 * max(1.0, abs(self.times[-1])):
            grid = np.append(grid, self.times[-1])
        return Trajectory(self.species_names, grid, self.interpolate(grid))

    def select(self, names: Sequence[str]) -> "Trajectory":
        idx = [self.species_names.index(n) for n in names]
        return Trajectory(tuple(names), self.times, self.values[:, idx])

    def window(self, t0: float, t1: float) -> "Trajectory":
        m = (self.times >= t0) & (self.times <= t1)
        return Trajectory(self.species_names, self.times[m], self.values[m])

    def to_csv(self, path=None) -> str:
        """Write ``time_min,<species...>``; floats use shortest round-trip repr."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("time_min",) + self.species_names)
        for t, row in zip(self.times.tolist(), self.values.tolist()):
            w.writerow([repr(t)] + [repr(x) for x in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="ascii")
        return text

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="", encoding="ascii") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        if not header or header[0] != "time_min":
            raise DataError(f"{path}: first column must be time_min")
        data = np.array([[float(x) for x in r] for r in body], dtype=float).reshape(len(body), len(header))
        return cls(tuple(header[1:]), data[:, 0], data[:, 1:])


@dataclass(frozen=True)
class EventReport:
    event_times: tuple[float, ...]
    event_count: int
    rate_per_hour: float
    window_hours: float

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.event_times, self.event_times[1:])):
            raise ValueError("event times must be strictly increasing")
        if self.event_count != len(self.event_times):
            raise ValueError("event_count does not match event_times")
