"""Free-space diffusion channel with first-order degradation.

Works in SI units: metres, seconds, and molar concentration (M). An
impulse of mass ``alpha0`` is given in M*m^3 (1 M*m^3 = 1000 mol), so the
kernel below returns concentration in M. :func:`mol_to_Mm3` and
:func:`molecules_to_Mm3` convert from more familiar amounts.

The Green's function of dc/dt = D lap(c) - k c is

    c(r, t) = alpha0 / (4 pi D t)^(3/2) * exp(-(r^2 / (4 D t) + k t)).

``ChannelParams.literal_exponent`` switches the spatial term to
r^2 / (4 pi D t), a form that does not conserve mass and is kept only for
side-by-side comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import constants, integrate, optimize

from .core import DataError


class ChannelDomainError(ValueError):
    """Evaluation outside the kernel's domain (t <= 0, r < 0, zero probe...)."""


class NoInteriorMaximum(ValueError):
    """The response decays monotonically in t, so no peak time exists."""


@dataclass(frozen=True)
class ChannelParams:
    D_alpha: float                 # m^2/s
    k_alpha: float = 0.0           # 1/s
    D_B: float | None = None       # m^2/s, Bar1 (Monte Carlo only)
    k_B: float | None = None       # 1/s
    k_re: float | None = None      # 1/(M s)
    literal_exponent: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.D_alpha) and self.D_alpha > 0):
            raise ValueError("D_alpha must be > 0")
        if not (math.isfinite(self.k_alpha) and self.k_alpha >= 0):
            raise ValueError("k_alpha must be >= 0")
        for name in ("D_B", "k_B", "k_re"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be >= 0")


def mol_to_Mm3(mol):
    """Amount in mol expressed as M*m^3 (the channel's mass unit)."""
    return np.asarray(mol, dtype=float) / 1000.0


def molecules_to_Mm3(n):
    return mol_to_Mm3(np.asarray(n, dtype=float) / constants.Avogadro)


def impulse_response(r, t, p: ChannelParams, alpha0: float = 1.0):
    """Concentration (M) at distance ``r`` (m) and time ``t`` (s) after an impulse.

    Args:
        r: distance from the release point, scalar or array, >= 0.
        t: time since release, scalar or array, > 0.
        p: channel constants.
        alpha0: released mass in M*m^3.

    Returns:
        Concentration in M, broadcast over ``r`` and ``t``.
    """
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ChannelDomainError("impulse response needs t > 0")
    if np.any(r < 0):
        raise ChannelDomainError("distance must be >= 0")
    D = p.D_alpha
    spread = 4.0 * math.pi * D * t if p.literal_exponent else 4.0 * D * t
    out = alpha0 * (4.0 * math.pi * D * t) ** -1.5 * np.exp(-(r * r / spread + p.k_alpha * t))
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class ImpulseResponse:
    """Kernel bound to a mass, channel and release point S'."""

    alpha0: float
    params: ChannelParams
    source: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.alpha0 >= 0:
            raise ValueError("alpha0 must be >= 0")

    def __call__(self, point, t):
        d = np.asarray(point, dtype=float) - np.asarray(self.source, dtype=float)
        return impulse_response(np.sqrt(np.sum(d * d, axis=-1)), t, self.params, self.alpha0)

    def at_distance(self, r, t):
        return impulse_response(r, t, self.params, self.alpha0)


def mass_integral(t: float, p: ChannelParams, alpha0: float = 1.0) -> float:
    """Spatial integral of the impulse response at time ``t`` by quadrature.

    Integrates 4 pi r^2 c(r, t) over r in the scaled variable
    s = r / sqrt(4 D t), so the integrand has unit width at every t.
    """
    if t <= 0:
        raise ChannelDomainError("t must be > 0")
    D = p.D_alpha
    L = math.sqrt(4.0 * D * t)
    if p.literal_exponent:
        L *= math.sqrt(math.pi)
    # spreading is fine on [0, 40] in s: exp(-1600) underflows
    val, _ = integrate.quad(lambda s: 4.0 * math.pi * (s * L) ** 2
                            * float(impulse_response(s * L, t, p, alpha0)) * L,
                            0.0, 40.0, epsabs=0.0, epsrel=1e-13, limit=200, points=(1.0, 3.0))
    return val


@dataclass(frozen=True)
class EmissionSchedule:
    """Release history at the transmitter.

    ``times`` (s) and ``rates`` (M*m^3/s) sample a continuous release that is
    linear between samples and zero outside ``[times[0], times[-1]]``.
    ``impulses`` holds ``(time, mass)`` pairs for instantaneous releases.
    """

    times: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rates: np.ndarray = field(default_factory=lambda: np.zeros(0))
    impulses: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        q = np.asarray(self.rates, dtype=float)
        if t.shape != q.shape or t.ndim != 1:
            raise ValueError("times and rates must be 1-D and the same length")
        if t.size == 1:
            raise ValueError("a continuous schedule needs at least two samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("emission times must be strictly increasing")
        if np.any(q < 0) or not np.all(np.isfinite(q)):
            raise ValueError("emission rates must be finite and >= 0")
        imp = tuple(sorted((float(a), float(m)) for a, m in self.impulses))
        if any(m < 0 for _, m in imp):
            raise ValueError("impulse masses must be >= 0")
        t.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "rates", q)
        object.__setattr__(self, "impulses", imp)

    @classmethod
    def impulse(cls, t0: float, mass: float) -> "EmissionSchedule":
        return cls(impulses=((t0, mass),))

    @property
    def is_empty(self) -> bool:
        return self.times.size == 0 and not self.impulses

    @property
    def start(self) -> float:
        starts = [a for a, _ in self.impulses]
        if self.times.size:
            starts.append(float(self.times[0]))
        return min(starts) if starts else 0.0

    def rate(self, t):
        if self.times.size == 0:
            return np.zeros_like(np.asarray(t, dtype=float))
        return np.interp(t, self.times, self.rates, left=0.0, right=0.0)

    def total_mass(self) -> float:
        cont = float(np.trapezoid(self.rates, self.times)) if self.times.size else 0.0
        return cont + sum(m for _, m in self.impulses)

    def scaled(self, factor: float) -> "EmissionSchedule":
        return EmissionSchedule(self.times, self.rates * factor,
                                tuple((a, m * factor) for a, m in self.impulses))


def _continuous_part(e: EmissionSchedule, r: float, t: float, p: ChannelParams,
                     rel_tol: float, n0: int, n_max: int) -> float:
    t0 = float(e.times[0])
    u_hi = t - t0
    if u_hi <= 0:
        return 0.0
    if r == 0.0:
        raise ChannelDomainError("continuous emission observed at r = 0 diverges")
    # below r^2/(200 D) the kernel is smaller than exp(-50) of its scale
    u_lo = min(r * r / (200.0 * p.D_alpha), u_hi / 2.0)
    prev = None
    n = n0
    while True:
        u = np.geomspace(u_lo, u_hi, n)
        f = e.rate(t - u) * impulse_response(r, u, p, 1.0)
        val = float(np.trapezoid(f, u))
        if prev is not None and abs(val - prev) <= rel_tol * max(abs(val), 1e-300):
            return val
        if n >= n_max:
            return val
        prev = val
        n = 2 * n - 1


def response_from_emission(e: EmissionSchedule, r: float, t, p: ChannelParams,
                           rel_tol: float = 1e-3, n0: int = 257, n_max: int = 1 << 18):
    """Concentration (M) at distance ``r`` from an emitting source.

    Impulses contribute exactly. The continuous release is convolved with
    the kernel by the trapezoid rule on a geometric grid in the lag
    u = t - tau, doubling the node count until successive results agree to
    ``rel_tol``. Times before the first release give 0.

    Args:
        e: emission history.
        r: observation distance (m).
        t: observation time(s) in s.
        p: channel constants.
        rel_tol: refinement stopping threshold.
    """
    if r < 0:
        raise ChannelDomainError("distance must be >= 0")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(ts.size)
    if not e.is_empty:
        for i, ti in enumerate(ts):
            acc = 0.0
            for a, m in e.impulses:
                if ti > a and m > 0:
                    acc += m * float(impulse_response(r, ti - a, p, 1.0))
            if e.times.size:
                acc += _continuous_part(e, r, ti, p, rel_tol, n0, n_max)
            out[i] = acc
    return out[0] if np.ndim(t) == 0 else out


def constant_emission_response(q: float, r: float, t, p: ChannelParams):
    """Closed form for a constant release rate ``q`` switched on at t = 0.

    c = q / (8 pi D r) * [exp(-r a) erfc(r/sqrt(4Dt) - sqrt(kt))
                          + exp(r a) erfc(r/sqrt(4Dt) + sqrt(kt))],  a = sqrt(k/D).
    Used as an independent check of the convolution quadrature.
    """
    from scipy.special import erfc
    t = np.asarray(t, dtype=float)
    D, k = p.D_alpha, p.k_alpha
    a = math.sqrt(k / D)
    x = r / np.sqrt(4.0 * D * t)
    y = np.sqrt(k * t)
    return q / (8.0 * math.pi * D * r) * (np.exp(-r * a) * erfc(x - y) + np.exp(r * a) * erfc(x + y))


@dataclass(frozen=True)
class SampledField:
    """Values on a regular 3-D grid: ``values[i, j, k]`` sits at
    ``origin + (i, j, k) * spacing``. Units are M (concentration)."""

    values: np.ndarray
    origin: tuple[float, float, float]
    spacing: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3:
            raise DataError("sampled field must be 3-D")
        if not np.all(np.isfinite(v)):
            raise DataError("sampled field contains non-finite values")
        if np.any(v < 0):
            raise DataError("sampled field must be non-negative")
        if not self.spacing > 0:
            raise DataError("spacing must be > 0")
        object.__setattr__(self, "values", v)

    def points(self) -> np.ndarray:
        idx = np.indices(self.values.shape).reshape(3, -1).T
        return np.asarray(self.origin, dtype=float) + idx * self.spacing

    def total_mass(self) -> float:
        return float(self.values.sum() * self.spacing ** 3)


def response_from_initial_distribution(phi: SampledField, point: Sequence[float], t: float,
                                       p: ChannelParams) -> float:
    """Concentration (M) at ``point`` and time ``t`` from an initial field.

    Each voxel is treated as a point mass ``phi * spacing^3`` at its centre
    and the contributions are summed directly.
    """
    if t <= 0:
        raise ChannelDomainError("t must be > 0")
    mask = phi.values.reshape(-1) > 0
    pts = phi.points()[mask]
    mass = phi.values.reshape(-1)[mask] * phi.spacing ** 3
    d = pts - np.asarray(point, dtype=float)
    r = np.sqrt(np.sum(d * d, axis=1))
    return float(np.sum(mass * impulse_response(r, t, p, 1.0)))


def peak_time(r: float, p: ChannelParams) -> float:
    """Time (s) at which the impulse response at distance ``r`` is largest.

    Found by bounded maximisation of the log-kernel.
    """
    if r < 0:
        raise ChannelDomainError("distance must be >= 0")
    if r == 0:
        raise NoInteriorMaximum("at r = 0 the response decays monotonically from t = 0")
    D = p.D_alpha
    w = 4.0 * D * (math.pi if p.literal_exponent else 1.0)
    t_free = r * r / (1.5 * w)   # peak without degradation

    def neg_log(t):
        return 1.5 * math.log(t) + r * r / (w * t) + p.k_alpha * t

    res = optimize.minimize_scalar(neg_log, bounds=(t_free * 1e-6, t_free * 1.01),
                                   method="bounded", options={"xatol": t_free * 1e-12})
    return float(res.x)


def peak_time_closed_form(r: float, p: ChannelParams) -> float:
    """Stationary point of the log-kernel, for checking :func:`peak_time`."""
    w = 4.0 * p.D_alpha * (math.pi if p.literal_exponent else 1.0)
    if p.k_alpha == 0:
        return r * r / (1.5 * w)
    k = p.k_alpha
    return (-1.5 + math.sqrt(2.25 + 4.0 * k * r * r / w)) / (2.0 * k)
