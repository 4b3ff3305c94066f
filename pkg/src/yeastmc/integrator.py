"""Adaptive Dormand-Prince 5(4) integration with breakpoint restarts.

Stimulus edges are discontinuities of the right-hand side. The integrator
splits the time span at every breakpoint, re-evaluates the derivative at
each segment start, and never lets a stage time reach the next
breakpoint, so no step straddles an input edge.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import Trajectory

log = logging.getLogger(__name__)

# Dormand & Prince (1980) tableau, 5th-order propagation
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
# b5 - b4
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# Hairer's continuous extension coefficients
_D = (
    -12715105075 / 11282082432, 0.0, 87487479700 / 32700410799,
    -10690763975 / 1880347072, 701980252875 / 199316789632,
    -1453857185 / 822651844, 69997945 / 29380423,
)


class IntegrationError(RuntimeError):
    """Non-finite derivative or state during integration."""


class StiffnessError(IntegrationError):
    def __init__(self, t: float, h: float):
        super().__init__(f"step size {h:.3g} fell below h_min at t={t:.9g}; problem is too stiff "
                         "for the explicit pair (tighten breakpoints or lower h_min)")
        self.t = t
        self.h = h


class StepBudgetError(IntegrationError):
    def __init__(self, t: float, max_steps: int):
        super().__init__(f"max_steps={max_steps} exceeded at t={t:.9g}")
        self.t = t


@dataclass(frozen=True)
class SolverSettings:
    rtol: float = 1e-6
    atol: float = 1e-9
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    max_steps: int = 2_000_000
    projection_floor: float | None = None  # defaults to -atol
    non_negative: bool = True  # project components below the floor to zero

    def __post_init__(self):
        if not 0 < self.rtol < 1:
            raise ValueError("rtol must lie in (0, 1)")
        if self.atol <= 0:
            raise ValueError("atol must be > 0")
        if not self.h_min <= self.h_init <= self.h_max:
            raise ValueError("need h_min <= h_init <= h_max")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")

    @property
    def floor(self) -> float:
        if not self.non_negative:
            return -math.inf
        return -self.atol if self.projection_floor is None else self.projection_floor


@dataclass(frozen=True)
class OdeProblem:
    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    t_span: tuple[float, float]
    breakpoints: Sequence[float] = ()
    names: Sequence[str] | None = None

    def __post_init__(self):
        t0, t1 = self.t_span
        if not t1 > t0:
            raise ValueError("t_span must be increasing")
        bps = sorted(float(b) for b in self.breakpoints)
        object.__setattr__(self, "breakpoints", tuple(b for b in bps if t0 < b < t1))

    def segments(self) -> list[tuple[float, float]]:
        edges = [float(self.t_span[0]), *self.breakpoints, float(self.t_span[1])]
        return list(zip(edges[:-1], edges[1:]))

    def species_names(self) -> tuple[str, ...]:
        if self.names is not None:
            return tuple(self.names)
        return tuple(f"y{i}" for i in range(np.size(self.y0)))


@dataclass
class SolverDiagnostics:
    steps: int = 0
    rejected: int = 0
    evaluations: int = 0
    clamped_steps: int = 0
    clamped_components: int = 0
    restarts: int = 0
    min_h: float = math.inf
    warnings: list[str] = field(default_factory=list)

    @property
    def clamp_fraction(self) -> float:
        return self.clamped_steps / self.steps if self.steps else 0.0

    def as_row(self) -> dict:
        return {
            "steps": self.steps, "rejected": self.rejected, "evaluations": self.evaluations,
            "clamped_steps": self.clamped_steps, "clamped_components": self.clamped_components,
            "restarts": self.restarts, "min_h": self.min_h,
        }

    def to_csv(self, path) -> None:
        row = self.as_row()
        with open(path, "w", newline="", encoding="ascii") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(row.keys())
            w.writerow(repr(v) if isinstance(v, float) else v for v in row.values())


def _check(dy, t):
    if not np.all(np.isfinite(dy)):
        raise IntegrationError(f"non-finite derivative at t={t:.9g}")
    return dy


def integrate(prob: OdeProblem, s: SolverSettings = SolverSettings(), t_eval=None) -> Trajectory:
    """Integrate ``prob`` and return a trajectory.

    Without ``t_eval`` the trajectory holds every accepted step plus both
    sides of each breakpoint (the right-hand value is kept). With
    ``t_eval`` the 4th-order continuous extension is sampled at those
    times instead. Solver statistics are attached as ``.diagnostics``.
    """
    diag = SolverDiagnostics()
    f = prob.rhs
    y = np.array(prob.y0, dtype=float)
    if y.ndim != 1:
        raise ValueError("y0 must be a vector")
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if np.any(np.diff(t_eval) <= 0):
            raise ValueError("t_eval must be strictly increasing")
        if t_eval.size and (t_eval[0] < prob.t_span[0] or t_eval[-1] > prob.t_span[1]):
            raise ValueError("t_eval outside t_span")
    ts, ys = [float(prob.t_span[0])], [y.copy()]
    eval_out = np.empty((0 if t_eval is None else t_eval.size, y.size))
    k_eval = 0
    if t_eval is not None:
        while k_eval < t_eval.size and t_eval[k_eval] <= prob.t_span[0]:
            eval_out[k_eval] = y
            k_eval += 1

    h = s.h_init
    floor = s.floor
    A, B, E, C, D = _A, _B, _E, _C, _D
    for seg_i, (a, b) in enumerate(prob.segments()):
        b_stage = np.nextafter(b, a)  # stage times stay inside [a, b)
        t = a
        k1 = _check(f(t, y), t)
        diag.evaluations += 1
        if seg_i:
            diag.restarts += 1
        h = min(max(h, s.h_min), s.h_max, b - a)
        while t < b:
            if diag.steps + diag.rejected >= s.max_steps:
                raise StepBudgetError(t, s.max_steps)
            last = False
            h_trial = h
            if t + h >= b or (b - (t + h)) < 1e-12 * max(1.0, abs(b)):
                h = b - t
                last = True
            K = [k1]
            for i in range(1, 7):
                yi = y.copy()
                for j, aij in enumerate(A[i]):
                    if aij:
                        yi += (h * aij) * K[j]
                ti = min(t + C[i] * h, b_stage)
                if i == 6:
                    y_new = yi
                K.append(_check(f(ti, yi), ti))
            diag.evaluations += 6
            err_vec = h * sum(e * k for e, k in zip(E, K) if e)
            scale = s.atol + s.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
            if not math.isfinite(err):
                raise IntegrationError(f"non-finite error estimate at t={t:.9g}")
            if err <= 1.0:
                t_new = b if last else t + h
                if t_eval is not None and k_eval < t_eval.size and t_eval[k_eval] <= t_new:
                    ydiff = y_new - y
                    bspl = h * K[0] - ydiff
                    r4 = ydiff - h * K[6] - bspl
                    r5 = h * sum(d * k for d, k in zip(D, K) if d)
                    while k_eval < t_eval.size and t_eval[k_eval] <= t_new:
                        th = (t_eval[k_eval] - t) / h
                        th1 = 1.0 - th
                        ye = y + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)))
                        # interpolant can overshoot below zero between clamped steps
                        eval_out[k_eval] = np.where(ye < floor, 0.0, ye)
                        k_eval += 1
                low = y_new < floor
                if low.any():
                    y_new = np.where(low, 0.0, y_new)
                    diag.clamped_steps += 1
                    diag.clamped_components += int(low.sum())
                    K[6] = _check(f(min(t_new, b_stage), y_new), t_new)
                    diag.evaluations += 1
                t, y, k1 = t_new, y_new, K[6]
                diag.steps += 1
                diag.min_h = min(diag.min_h, h)
                ts.append(t)
                ys.append(y.copy())
                fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h = min(max(h_trial, h * fac) if last else h * fac, s.h_max)
            else:
                diag.rejected += 1
                h *= max(0.1, 0.9 * err ** -0.2)
                if h < s.h_min:
                    raise StiffnessError(t, h)

    if diag.steps and diag.clamp_fraction > 1e-3:
        msg = (f"non-negativity clamp triggered on {diag.clamped_steps}/{diag.steps} steps "
               f"({100 * diag.clamp_fraction:.3f}%)")
        diag.warnings.append(msg)
        log.warning(msg)
    names = prob.species_names()
    if t_eval is not None:
        if k_eval < t_eval.size:
            eval_out[k_eval:] = y
        if s.non_negative:
            eval_out = np.where(eval_out < 0, 0.0, eval_out)
        return Trajectory(names, t_eval, eval_out, diagnostics=diag)
    times = np.array(ts)
    vals = np.array(ys)
    # breakpoint ends coincide with the next segment start; keep one row per time
    keep = np.append(np.diff(times) > 0, True)
    return Trajectory(names, times[keep], vals[keep], diagnostics=diag)


def fixed_step_reference(prob: OdeProblem, h: float) -> Trajectory:
    """Classical RK4 with a fixed step aligned to every breakpoint (test oracle)."""
    if h <= 0:
        raise ValueError("h must be > 0")
    f = prob.rhs
    y = np.array(prob.y0, dtype=float)
    ts, ys = [float(prob.t_span[0])], [y.copy()]
    for a, b in prob.segments():
        n = max(1, int(math.ceil((b - a) / h - 1e-9)))
        hh = (b - a) / n
        b_stage = np.nextafter(b, a)
        for i in range(n):
            t = a + i * hh
            k1 = _check(f(t, y), t)
            k2 = _check(f(t + hh / 2, y + hh / 2 * k1), t)
            k3 = _check(f(t + hh / 2, y + hh / 2 * k2), t)
            t_end = min(t + hh, b_stage)
            k4 = _check(f(t_end, y + hh * k3), t)
            y = y + hh / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            ts.append(b if i == n - 1 else a + (i + 1) * hh)
            ys.append(y.copy())
    times = np.array(ts)
    vals = np.array(ys)
    keep = np.append(np.diff(times) > 0, True)
    return Trajectory(prob.species_names(), times[keep], vals[keep])
