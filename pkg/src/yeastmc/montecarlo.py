"""Brownian-particle Monte Carlo for the diffusion channel.

Each particle carries an equal share of the released mass, takes Gaussian
steps with per-axis variance 2*D*dt, and is removed with probability
1 - exp(-k*dt) per step (times exp(-k_re*B(x)*dt) when a Bar1 field is
given). Concentration inside a spherical probe is the surviving mass in
the ball divided by its volume.

Particles are split into fixed-size chunks and chunk ``i`` always draws
from child ``i`` of ``SeedSequence(seed)``, so results do not depend on
how many worker processes are used.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .channel import ChannelDomainError, ChannelParams, EmissionSchedule

CHUNK = 10_000


@dataclass(frozen=True)
class Probe:
    center: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ChannelDomainError("probe radius must be > 0")

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * math.pi * self.radius ** 3


@dataclass(frozen=True)
class UniformBar1:
    """Spatially uniform Bar1 concentration (M)."""

    level: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.full(x.shape[0], self.level)


@dataclass(frozen=True)
class GaussianBar1:
    """Bar1 cloud ``peak * exp(-|x - center|^2 / (2 width^2))`` (M)."""

    peak: float
    center: tuple[float, float, float]
    width: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        d = x - np.asarray(self.center)
        return self.peak * np.exp(-np.sum(d * d, axis=1) / (2.0 * self.width ** 2))


@dataclass(frozen=True)
class McResult:
    times: np.ndarray        # s
    estimate: np.ndarray     # M
    stderr: np.ndarray       # M
    counts: np.ndarray       # particles in probe
    n_alive: np.ndarray
    n_particles: int
    mass_per_particle: float

    def to_csv(self, path=None) -> str:
        rows = ["time_s,estimate_nM,stderr_nM,n_alive"]
        for t, c, s, a in zip(self.times.tolist(), (self.estimate * 1e9).tolist(),
                              (self.stderr * 1e9).tolist(), self.n_alive.tolist()):
            rows.append(f"{t!r},{c!r},{s!r},{a}")
        text = "\n".join(rows) + "\n"
        if path is not None:
            with open(path, "w", encoding="ascii", newline="") as fh:
                fh.write(text)
        return text


def _release_times(e: EmissionSchedule, n: int, rng: np.random.Generator) -> np.ndarray:
    """Sample birth times with density proportional to the emission."""
    masses = [m for _, m in e.impulses]
    cont = float(np.trapezoid(e.rates, e.times)) if e.times.size else 0.0
    weights = np.array(masses + [cont])
    total = weights.sum()
    if total <= 0:
        raise ValueError("emission schedule releases no mass")
    which = rng.choice(weights.size, size=n, p=weights / total)
    out = np.empty(n)
    for j, (a, _) in enumerate(e.impulses):
        out[which == j] = a
    m = which == len(masses)
    if m.any():
        # inverse CDF of the piecewise-linear rate
        seg = 0.5 * (e.rates[1:] + e.rates[:-1]) * np.diff(e.times)
        cdf = np.concatenate([[0.0], np.cumsum(seg)])
        out[m] = np.interp(rng.random(m.sum()) * cdf[-1], cdf, e.times)
    return out


def _run_chunk(args):
    (n, seed, D, k, sample_times, dt, source, release, probe, bar1, k_re) = args
    rng = np.random.default_rng(seed)
    birth = np.zeros(n) if release is None else _release_times(release, n, rng)
    pos = np.tile(np.asarray(source, dtype=float), (n, 1))
    alive = np.ones(n, dtype=bool)
    c2 = np.asarray(probe.center, dtype=float)
    r2 = probe.radius ** 2
    sigma = math.sqrt(2.0 * D * dt)
    surv = math.exp(-k * dt)
    counts = np.zeros(len(sample_times), dtype=np.int64)
    alive_out = np.zeros(len(sample_times), dtype=np.int64)
    # fixed dt grid from t = 0 to the last sample time
    n_steps = int(round(sample_times[-1] / dt))
    sample_idx = np.round(np.asarray(sample_times) / dt).astype(int)
    j = 0
    for step in range(n_steps + 1):
        now = step * dt
        born = birth <= now + 1e-12 * dt
        while j < len(sample_idx) and sample_idx[j] == step:
            live = alive & born
            d = pos[live] - c2
            counts[j] = int(np.count_nonzero(np.einsum("ij,ij->i", d, d) <= r2))
            alive_out[j] = int(live.sum())
            j += 1
        if step == n_steps:
            break
        live = alive & born
        idx = np.flatnonzero(live)
        if idx.size == 0:
            continue
        pos[idx] += rng.normal(0.0, sigma, size=(idx.size, 3))
        p_keep = np.full(idx.size, surv)
        if bar1 is not None and k_re:
            p_keep *= np.exp(-k_re * bar1(pos[idx]) * dt)
        dead = rng.random(idx.size) >= p_keep
        alive[idx[dead]] = False
    return counts, alive_out


def mc_simulate(n_particles: int, p: ChannelParams, source, dt: float, T: float, probe: Probe,
                sample_times: Sequence[float] | None = None, mass: float | None = None,
                source_point=(0.0, 0.0, 0.0), seed: int = 0, workers: int = 1,
                bar1=None) -> McResult:
    """Monte Carlo estimate of the concentration in a spherical probe.

    Args:
        n_particles: number of simulated particles (>= 1000).
        p: channel constants; ``p.k_re`` is used with ``bar1``.
        source: ``"impulse"`` for a release of ``mass`` at t = 0, or an
            ``EmissionSchedule`` whose mass is spread over particles.
        dt: time step (s); sample times must lie on the dt grid.
        T: horizon (s); used for the default sample grid.
        probe: observation ball.
        sample_times: times (s) at which the probe is read.
        mass: impulse mass in M*m^3 (impulse source only).
        source_point: release location (m).
        seed: master seed.
        workers: process count; results are identical for any value.
        bar1: optional callable giving Bar1 concentration (M) at positions.

    Returns:
        McResult with estimates and binomial standard errors in M.
    """
    if n_particles < 1000:
        raise ValueError("n_particles must be >= 1000")
    if not dt > 0 or not T > 0:
        raise ValueError("dt and T must be > 0")
    if p.k_alpha * dt >= 0.1:
        raise ValueError("dt too large: need k_alpha*dt < 0.1")
    if sample_times is None:
        sample_times = dt * np.arange(1, int(round(T / dt)) + 1)
    sample_times = np.asarray(sample_times, dtype=float)
    if np.any(np.diff(sample_times) <= 0) or sample_times[0] < 0:
        raise ValueError("sample_times must be increasing and >= 0")
    if isinstance(source, EmissionSchedule):
        release, total = source, source.total_mass()
        if source.start < 0:
            raise ValueError("emission must start at t >= 0")
        if abs(source.start / dt - round(source.start / dt)) > 1e-9:
            raise ValueError("emission start must lie on the dt grid")
    elif source == "impulse":
        if mass is None:
            raise ValueError("impulse source needs a mass")
        release, total = None, float(mass)
    else:
        raise ValueError("source must be 'impulse' or an EmissionSchedule")
    off = sample_times / dt - np.round(sample_times / dt)
    if np.any(np.abs(off) > 1e-6):
        raise ValueError("sample_times must be multiples of dt")

    sizes = [CHUNK] * (n_particles // CHUNK)
    if n_particles % CHUNK:
        sizes.append(n_particles % CHUNK)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(n, s, p.D_alpha, p.k_alpha, sample_times, dt, tuple(source_point), release, probe,
             bar1, p.k_re or 0.0) for n, s in zip(sizes, seeds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    counts = np.sum([c for c, _ in parts], axis=0)
    alive = np.sum([a for _, a in parts], axis=0)
    w = total / n_particles
    V = probe.volume
    est = counts * w / V
    # binomial: each of N particles is in the probe with probability counts/N
    se = w / V * np.sqrt(counts * (1.0 - counts / n_particles))
    return McResult(sample_times, est, se, counts, alive, n_particles, w)


def ball_average(center_distance: float, radius: float, t: float, p: ChannelParams,
                 alpha0: float = 1.0) -> float:
    """Exact mean of the impulse response over a ball (M).

    Without degradation the particle position is Gaussian with per-axis
    variance 2Dt, so the probability of lying in the ball is a noncentral
    chi-square CDF with 3 degrees of freedom.
    """
    if p.literal_exponent:
        raise ValueError("ball average is only defined for the mass-conserving kernel")
    s2 = 2.0 * p.D_alpha * t
    prob = stats.ncx2.cdf(radius ** 2 / s2, 3, center_distance ** 2 / s2)
    return alpha0 * math.exp(-p.k_alpha * t) * prob / (4.0 / 3.0 * math.pi * radius ** 3)


def write_csv(result: McResult, path) -> None:
    result.to_csv(path)


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}
