"""Reference curves and simulation-versus-reference comparison.

Reference CSV format::

    # provenance: free text, one or more comment lines
    time_min,fold_change,stderr
    0,1.0,0.1
    ...
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DataError, Trajectory


@dataclass(frozen=True)
class ReferenceCurve:
    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        s = np.asarray(self.stderr, dtype=float)
        if not (t.shape == v.shape == s.shape) or t.ndim != 1 or t.size < 2:
            raise DataError("reference needs at least two rows of time, value, stderr")
        if np.any(np.diff(t) <= 0):
            raise DataError("reference times must be increasing")
        if np.any(v < 0) or np.any(s < 0):
            raise DataError("reference values and errors must be >= 0")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "stderr", s)

    @classmethod
    def from_csv(cls, path) -> "ReferenceCurve":
        text = Path(path).read_text(encoding="utf-8")
        notes = [ln[1:].strip() for ln in text.splitlines() if ln.startswith("#")]
        body = "\n".join(ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#"))
        rows = list(csv.DictReader(io.StringIO(body)))
        need = {"time_min", "fold_change"}
        if not rows or not need <= set(rows[0]):
            raise DataError(f"{path}: needs columns time_min, fold_change[, stderr]")
        t = [float(r["time_min"]) for r in rows]
        v = [float(r["fold_change"]) for r in rows]
        s = [float(r.get("stderr") or 0.0) for r in rows]
        return cls(np.array(t), np.array(v), np.array(s), " ".join(notes))

    def to_csv(self, path=None) -> str:
        lines = [f"# {ln}" for ln in self.provenance.splitlines() if ln] + ["time_min,fold_change,stderr"]
        lines += [f"{t!r},{v!r},{s!r}" for t, v, s in
                  zip(self.times.tolist(), self.values.tolist(), self.stderr.tolist())]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


@dataclass(frozen=True)
class ComparisonReport:
    species: str
    peak_time_sim: float
    peak_time_ref: float
    peak_time_error: float       # |sim - ref|, minutes
    nrmse: float                 # RMSE of unit-peak curves
    amplitude_ratio: float       # sim peak / ref peak, informational only
    overlap: tuple[float, float]
    peak_time_tol: float
    nrmse_tol: float

    @property
    def checks(self) -> dict[str, bool]:
        return {"peak_time": self.peak_time_error <= self.peak_time_tol,
                "shape_nrmse": self.nrmse <= self.nrmse_tol}

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def as_row(self) -> dict:
        return {"species": self.species, "peak_time_sim_min": self.peak_time_sim,
                "peak_time_ref_min": self.peak_time_ref, "peak_time_error_min": self.peak_time_error,
                "nrmse": self.nrmse, "amplitude_ratio": self.amplitude_ratio,
                "overlap_start_min": self.overlap[0], "overlap_end_min": self.overlap[1],
                "peak_time_pass": self.checks["peak_time"], "shape_pass": self.checks["shape_nrmse"]}


def compare_reference(traj: Trajectory, species: str, ref: ReferenceCurve,
                      peak_time_tol: float = 15.0, nrmse_tol: float = 0.25) -> ComparisonReport:
    """Compare a simulated fold-change column with a reference curve.

    Both curves are restricted to their common time range and scaled to unit
    peak. The simulation is interpolated onto the reference times; its peak
    time is taken on its own grid inside the overlap. Amplitudes are reported
    but never affect pass/fail.
    """
    lo = max(traj.times[0], ref.times[0])
    hi = min(traj.times[-1], ref.times[-1])
    if not hi > lo:
        raise DataError("simulation and reference do not overlap in time")
    rm = (ref.times >= lo) & (ref.times <= hi)
    if rm.sum() < 2:
        raise DataError("fewer than two reference points inside the overlap")
    rt, rv = ref.times[rm], ref.values[rm]
    sm = (traj.times >= lo) & (traj.times <= hi)
    st, sv = traj.times[sm], traj.column(species)[sm]
    s_on_r = traj.interpolate(rt)[:, traj.species_names.index(species)]
    s_peak, r_peak = float(sv.max()), float(rv.max())
    if s_peak <= 0 or r_peak <= 0:
        raise DataError("curves must have a positive peak")
    err = s_on_r / s_peak - rv / r_peak
    tps, tpr = float(st[np.argmax(sv)]), float(rt[np.argmax(rv)])
    return ComparisonReport(species, tps, tpr, abs(tps - tpr), float(np.sqrt(np.mean(err * err))),
                            s_peak / r_peak, (float(lo), float(hi)), peak_time_tol, nrmse_tol)
