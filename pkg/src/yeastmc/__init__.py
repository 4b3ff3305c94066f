"""Deterministic simulator of a yeast pheromone communication link.

Modules:
    core: units, stimulus schedules, trajectories.
    transmitter: galactose-gated alpha-factor production.
    channel, montecarlo: diffusion-degradation channel and its particle oracle.
    receiver: pheromone-response network to Fus1 output.
    integrator: adaptive Dormand-Prince solver with breakpoint restarts.
    config, experiment, events, reference, outputs, cli: experiment harness.
"""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Concentration, ConfigurationError, DataError, EventReport, StimulusProfile, Trajectory,
    convert, evaluate_stimulus,
)
from .integrator import (  # noqa: E402
    OdeProblem, SolverSettings, StepBudgetError, StiffnessError, fixed_step_reference, integrate,
)
from .protocols import single_pulse_protocol, three_pulse_protocol  # noqa: E402

__all__ = [
    "Concentration", "ConfigurationError", "DataError", "EventReport", "StimulusProfile",
    "Trajectory", "convert", "evaluate_stimulus", "OdeProblem", "SolverSettings",
    "StepBudgetError", "StiffnessError", "fixed_step_reference", "integrate",
    "single_pulse_protocol", "three_pulse_protocol",
]
