"""Output-pulse detection on fold-change traces."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import find_peaks

from .core import DataError, EventReport, Trajectory


def detect_events(traj: Trajectory, species: str, prominence_fraction: float = 0.2,
                  min_separation: float = 30.0, dt: float | None = None) -> EventReport:
    """Count distinct output pulses in one species.

    The series is resampled on a uniform grid and local maxima are kept when
    their prominence is at least ``prominence_fraction`` times the global
    range and they lie ``min_separation`` minutes apart. A flat series has no
    events.

    Args:
        traj: trajectory in minutes.
        species: column to analyse.
        prominence_fraction: relative prominence threshold.
        min_separation: minimum spacing of peaks (minutes).
        dt: resampling step; defaults to min_separation / 300.

    Returns:
        EventReport with rate = count / span in hours.
    """
    span = traj.times[-1] - traj.times[0]
    if span < min_separation:
        raise DataError(f"trajectory spans {span} min, shorter than min_separation={min_separation}")
    step = dt if dt is not None else min_separation / 300.0
    grid = traj.resample(step)
    y = grid.column(species)
    rng = float(y.max() - y.min())
    hours = span / 60.0
    if rng <= 1e-12 * max(1.0, float(np.abs(y).max())):
        return EventReport((), 0, 0.0, hours)
    distance = max(1, int(math.ceil(min_separation / step - 1e-9)))
    idx, _ = find_peaks(y, prominence=prominence_fraction * rng, distance=distance)
    times = tuple(float(grid.times[i]) for i in idx)
    return EventReport(times, len(times), len(times) / hours, hours)


def per_pulse_peaks(traj: Trajectory, species: str, starts, horizon: float | None = None) -> list[float]:
    """Maximum of ``species`` inside each window ``[start_i, start_{i+1})``."""
    edges = list(starts) + [traj.times[-1] if horizon is None else horizon]
    y = traj.column(species)
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (traj.times >= a) & (traj.times < b) if b < edges[-1] else (traj.times >= a) & (traj.times <= b)
        if not m.any():
            raise DataError(f"no samples in window [{a}, {b})")
        out.append(float(y[m].max()))
    return out
