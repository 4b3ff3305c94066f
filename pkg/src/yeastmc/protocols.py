"""Induction schedules used in the validation experiments."""

from __future__ import annotations

from .core import Concentration, StimulusProfile


def three_pulse_protocol(amplitude: Concentration, width: float = 1.0, gap: float = 120.0,
                         n: int = 3, start: float = 0.0) -> StimulusProfile:
    """``n`` pulses of ``width`` minutes separated by ``gap`` minutes of repression.

    Pulse ``i`` covers ``[start + i*(width+gap), start + i*(width+gap) + width)``.
    """
    if not isinstance(amplitude, Concentration):
        amplitude = Concentration(float(amplitude))
    if not amplitude.value > 0:
        raise ValueError("amplitude must be > 0")
    if n < 1 or width <= 0 or gap < 0:
        raise ValueError("need n >= 1, width > 0, gap >= 0")
    period = width + gap
    return StimulusProfile.from_pulses([start + i * period for i in range(n)], width, amplitude)


def single_pulse_protocol(amplitude: Concentration, width: float = 1.0, start: float = 0.0) -> StimulusProfile:
    return three_pulse_protocol(amplitude, width, 0.0, 1, start)


def protocol_horizon(width: float = 1.0, gap: float = 120.0, n: int = 3) -> float:
    """Length of ``n`` pulse-plus-repression periods (363 min by default)."""
    return n * (width + gap)
