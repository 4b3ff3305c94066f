"""Pheromone-response receiver: alpha-factor input to Fus1 output.

The state is the 39-species MATa cell model (receptor/G-protein cycle,
Ste5 scaffold cascade, Bar1 and Sst2 feedback, the Ste12/Tec1/Dig
transcription-factor network, FUS1 mRNA and Fus1 protein). All
concentrations are nM and time is minutes.

Rate labels follow the printed rate list (``v1`` ... ``v59``). Where the
printed ODEs and the printed rate list disagree, the ODE side is wired by
meaning; the table below is the complete mapping that differs from the
literal labels::

    Bar1        -= v34 ([Ste12][Bar1]k36)          += v35 ([Bar1a]k37)
    Bar1active  += v34 - v35 - v36 ([Bar1a]k38)
    Sst2active  += v37 (Hill of Fus3PP, k46)       -= v38 ([Sst2a]k47)
    Gbg         no v42/v43 terms (those labels belong to the TF network)

The transcription-factor network is written so that every complex
formation consumes its constituents (v40 and v42 carry the consuming sign),
Fus3PP-driven loss of Tec1 from TS/TSD1 is counted once, and SD1
degradation feeds Ste12*.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields, replace
from typing import Callable

import numpy as np

SPECIES = (
    "alpha", "Ste2", "Ste2active", "Sst2active", "Gabg", "GaGTP", "GaGDP",
    "Gbg", "Ste5", "Ste11", "Ste7", "Fus3", "Ste20", "A", "B", "C", "D",
    "E", "F", "G", "H", "I", "L", "K", "Fus3PP", "Bar1", "Bar1active",
    "Fus1_mRNA", "Ste12", "Tec1", "SD1", "SD2", "SD1D2", "S2", "TS", "TSD1",
    "Ste12star", "Tec1star", "Fus1",
)
INDEX = {name: i for i, name in enumerate(SPECIES)}
N_SPECIES = len(SPECIES)

RATE_NAMES = (
    tuple(f"v{i}" for i in range(1, 60))
    + tuple(f"F{i}" for i in range(1, 10))
    + ("P1", "P2", "P3", "uDig1", "uDig2")
)


class StateConsistencyError(ValueError):
    """Bound Dig exceeds its total pool."""


class RxInputMode(enum.Enum):
    """How the channel concentration enters the alpha equation."""

    PRESCRIBED = "prescribed"
    FORCED = "forced"


@dataclass(frozen=True)
class RxParams:
    # receptor and G-protein cycle (1/min, 1/(nM min))
    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    k7: float
    k8: float
    k9: float
    # scaffold cascade
    k10: float
    k11: float
    k12: float
    k13: float
    k14: float
    k15: float
    k16: float
    k17: float
    k18: float
    k19: float
    k20: float
    k21: float
    k22: float
    k23: float
    k24: float
    k25: float
    k26: float
    k27: float
    k28: float
    k29: float
    k30: float
    k31: float
    k32: float
    k33: float
    # Bar1 and Sst2 feedback
    k36: float
    k37: float
    k38: float
    k46: float
    k47: float
    sst2_hill_k: float
    # transcription-factor network
    k_s12: float
    k_fb1: float
    d_s12: float
    k_tec1: float
    k_fb2: float
    d_tec1: float
    J1: float
    J2: float
    k_c: float
    d_s: float
    kr_sd1: float
    kr_sd2: float
    kr_sd1d2: float
    kr_ts: float
    kr_tsd1: float
    k_alpha_rel: float
    d_sd1: float
    d_sd2: float
    d_s2: float
    d_ts: float
    d_tsd1: float
    Km_sat: float
    KD_sat: float
    k_p1: float
    k_p2: float
    k_p3: float
    KD1: float
    KD2: float
    KD3: float
    TDig1: float
    TDig2: float
    # FUS1 output
    d_mRNA: float
    k_trans: float
    k_d: float
    # pre-stimulation amounts (nM)
    Ste2_total: float
    Gabg_total: float
    Ste5_total: float
    Ste11_total: float
    Ste7_total: float
    Fus3_total: float
    Ste20_total: float
    Bar1_total: float
    Ste12_init: float
    Tec1_init: float
    # phenomenological knob on active-receptor loss (k4)
    desensitization_scale: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not np.isfinite(value) or value < 0:
                raise ValueError(f"receiver parameter {f.name} must be finite and >= 0, got {value}")

    def with_overrides(self, **overrides) -> "RxParams":
        return replace(self, **overrides)


def initial_guess(p: RxParams) -> np.ndarray:
    """Unbound pools before equilibration; basal_state relaxes from here."""
    y = np.zeros(N_SPECIES)
    y[INDEX["Ste2"]] = p.Ste2_total
    y[INDEX["Gabg"]] = p.Gabg_total
    y[INDEX["Ste5"]] = p.Ste5_total
    y[INDEX["Ste11"]] = p.Ste11_total
    y[INDEX["Ste7"]] = p.Ste7_total
    y[INDEX["Fus3"]] = p.Fus3_total
    y[INDEX["Ste20"]] = p.Ste20_total
    y[INDEX["Bar1"]] = p.Bar1_total
    y[INDEX["Ste12"]] = p.Ste12_init
    y[INDEX["Tec1"]] = p.Tec1_init
    return y


def rx_rates(y, p: RxParams, alpha: float | None = None, check: bool = True) -> dict[str, float]:
    """Evaluate every rate law, flux and occupancy for one state.

    ``alpha`` overrides the alpha-factor level (prescribed input); by default
    the state's own alpha component is used.
    """
    r = _rates(y, p, y[0] if alpha is None else alpha)
    out = dict(zip(RATE_NAMES, r))
    if check:
        if out["uDig1"] > p.TDig1 * (1 + 1e-9) + 1e-9 or out["uDig2"] > p.TDig2 * (1 + 1e-9) + 1e-9:
            raise StateConsistencyError(
                f"bound Dig exceeds pool: uDig1={out['uDig1']:.6g}/{p.TDig1}, "
                f"uDig2={out['uDig2']:.6g}/{p.TDig2}"
            )
    return out


def _rates(y, p: RxParams, alpha):
    (_, Ste2, Ste2a, Sst2a, Gabg, GaGTP, GaGDP, Gbg, Ste5, Ste11, Ste7, Fus3,
     Ste20, A, B, C, D, E, F, G, H, I, L, K, PP, Bar1, Bar1a, mRNA, Ste12,
     Tec1, SD1, SD2, SD1D2, S2, TS, TSD1, S12s, T1s, Fus1) = y

    v = [0.0] * 60
    v[1] = alpha * Bar1a * p.k1
    v[2] = Ste2 * alpha * p.k2
    v[3] = Ste2a * p.k3
    v[4] = Ste2a * p.k4 * p.desensitization_scale
    v[5] = Ste2 * p.k5
    v[6] = Ste2a * Gabg * p.k6
    v[7] = GaGTP * p.k7
    v[8] = GaGTP * Sst2a * p.k8
    v[9] = GaGDP * Gbg * p.k9
    v[10] = Gbg * C * p.k10
    v[11] = D * p.k11
    v[12] = Ste5 * Ste11 * p.k12
    v[13] = A * p.k13
    v[14] = Ste7 * Fus3 * p.k14
    v[15] = B * p.k15
    v[16] = A * B * p.k16
    v[17] = C * p.k17
    v[18] = D * Ste20 * p.k18
    v[19] = E * p.k19
    v[20] = E * p.k20
    v[21] = E * p.k21
    v[22] = F * p.k22
    v[23] = F * p.k23
    v[24] = G * p.k24
    v[25] = G * p.k25
    v[26] = H * p.k26
    v[27] = H * p.k27
    v[28] = I * p.k28
    v[29] = L * Fus3 * p.k29
    v[30] = K * p.k30
    v[31] = K * p.k31
    v[32] = L * p.k32
    v[33] = PP * p.k33
    v[34] = Ste12 * Bar1 * p.k36
    v[35] = Bar1a * p.k37
    v[36] = Bar1a * p.k38
    v[37] = PP * PP / (p.sst2_hill_k ** 2 + PP * PP) * p.k46
    v[38] = Sst2a * p.k47

    uDig1 = SD1 + SD1D2 + TSD1
    uDig2 = SD2 + SD1D2
    fDig1 = p.TDig1 - uDig1
    fDig2 = p.TDig2 - uDig2
    ka = p.k_alpha_rel * PP
    F1 = p.k_c * Ste12 * fDig2 - (ka + p.kr_sd2) * SD2
    F2 = p.k_c * Ste12 * Ste12 - p.d_s * S2
    F3 = p.k_c * Ste12 * fDig1 - (ka + p.kr_sd1) * SD1
    F4 = p.k_c * SD1 * fDig2 - (ka + p.kr_sd1d2) * SD1D2
    F5 = p.k_c * Ste12 * Tec1 - (p.J2 * PP + p.kr_ts) * TS
    F6 = p.k_c * TS * fDig1 - (ka + p.kr_tsd1) * TSD1
    F7 = p.k_c * SD2 * fDig1 - (ka + p.kr_sd1d2) * SD1D2
    F8 = p.Km_sat / (S12s + T1s + p.KD_sat)
    F9 = p.k_p1 * PP / (PP + p.k_p2) + p.k_p3

    P3 = S2 / (S2 + Ste12 + SD1 + p.KD3)
    P2 = TS / (TS + TSD1 + p.KD2)
    P1 = S2 / (S2 + Ste12 + SD1 + p.KD1)

    v[39] = p.k_s12 + p.k_fb1 * P1
    v[40] = p.d_s12 * F9 * Ste12 + F1 + 2 * F2 + F3 + F5
    v[41] = p.k_tec1 + p.k_fb2 * P2
    v[42] = (p.d_tec1 + p.J1 * PP) * Tec1 + F5 + p.J2 * PP * TS
    v[43] = F3 + p.J2 * PP * TSD1
    v[44] = F4 + p.d_sd1 * F9 * SD1
    v[45] = F1
    v[46] = F7 + p.d_sd2 * F9 * SD2
    v[47] = F4 + F7
    v[48] = F2
    v[49] = p.d_s2 * F9 * S2
    v[50] = F5
    v[51] = F6 + p.d_ts * F9 * TS
    v[52] = F6
    v[53] = (p.d_tsd1 * F9 + p.J2 * PP) * TSD1
    v[54] = (2 * p.d_s2 * S2 + p.d_sd2 * SD2 + p.d_sd1 * SD1 + p.d_tsd1 * TSD1
             + p.d_s12 * Ste12 + p.d_ts * TS) * F9
    v[55] = F8 * S12s
    v[56] = ((p.d_tec1 + p.J1 * PP) * Tec1 + (p.d_ts * F9 + p.J2 * PP) * TS
             + (p.d_tsd1 * F9 + p.J2 * PP) * TSD1)
    v[57] = F8 * T1s
    v[58] = p.k_trans * mRNA
    v[59] = p.k_d * Fus1
    return v[1:] + [F1, F2, F3, F4, F5, F6, F7, F8, F9, P1, P2, P3, uDig1, uDig2]


def _derivative(y, p: RxParams, alpha, alpha_inflow):
    r = _rates(y, p, alpha)
    v = [0.0] + r[:59]
    P3 = r[70]
    scaffold = v[17] + v[21] + v[23] + v[25] + v[27]
    return np.array([
        alpha_inflow - v[1],                                  # alpha
        -v[2] + v[3] - v[5],                                  # Ste2
        v[2] - v[3] - v[4],                                   # Ste2active
        v[37] - v[38],                                        # Sst2active
        -v[6] + v[9],                                         # Gabg
        v[6] - v[7] - v[8],                                   # GaGTP
        v[7] + v[8] - v[9],                                   # GaGDP
        v[6] - v[9] - v[10] + v[11] + v[21] + v[23] + v[25] + v[27] + v[32],  # Gbg
        -v[12] + v[13] + scaffold + v[32],                    # Ste5
        -v[12] + v[13] + scaffold + v[32],                    # Ste11
        -v[14] + v[15] + scaffold + v[32],                    # Ste7
        -v[14] + v[15] + scaffold - v[29] + v[30] + v[33],    # Fus3
        -v[18] + v[19] + v[21] + v[23] + v[25] + v[27] + v[32],  # Ste20
        v[12] - v[13] - v[16],                                # A
        v[14] - v[15] - v[16],                                # B
        -v[10] + v[11] + v[16] - v[17],                       # C
        v[10] - v[11] - v[18] + v[19],                        # D
        v[18] - v[19] - v[20] - v[21],                        # E
        v[20] - v[22] - v[23],                                # F
        v[22] - v[24] - v[25],                                # G
        v[24] - v[26] - v[27],                                # H
        v[26] - v[28] + v[31],                                # I
        v[28] - v[29] + v[30] - v[32],                        # L
        v[29] - v[30] - v[31],                                # K
        v[28] - v[33],                                        # Fus3PP
        -v[34] + v[35],                                       # Bar1
        v[34] - v[35] - v[36],                                # Bar1active
        P3 - p.d_mRNA * y[27],                                # Fus1_mRNA
        v[39] - v[40],                                        # Ste12
        v[41] - v[42],                                        # Tec1
        v[43] - v[44],                                        # SD1
        v[45] - v[46],                                        # SD2
        v[47],                                                # SD1D2
        v[48] - v[49],                                        # S2
        v[50] - v[51],                                        # TS
        v[52] - v[53],                                        # TSD1
        v[54] - v[55],                                        # Ste12star
        v[56] - v[57],                                        # Tec1star
        v[58] - v[59],                                        # Fus1
    ])


def rx_derivatives(y, t: float, p: RxParams, mode: RxInputMode = RxInputMode.PRESCRIBED,
                   u: Callable[[float], float] | None = None) -> np.ndarray:
    """Right-hand side of the receiver system at time ``t`` (minutes).

    In PRESCRIBED mode ``u(t)`` is the alpha-factor level at the cell (nM)
    and the alpha component is held (derivative 0). In FORCED mode ``u(t)``
    is an inflow rate (nM/min) and d[alpha]/dt = u(t) - v1.
    """
    level = 0.0 if u is None else float(u(t))
    if mode is RxInputMode.PRESCRIBED:
        dy = _derivative(y, p, level, 0.0)
        dy[0] = 0.0
        return dy
    return _derivative(y, p, y[0], level)


def make_rhs(p: RxParams, mode: RxInputMode = RxInputMode.PRESCRIBED,
             u: Callable[[float], float] | None = None) -> Callable[[float, np.ndarray], np.ndarray]:
    """Bind parameters and input into an ``f(t, y)`` callable for the integrator."""
    if u is None:
        u = _zero
    if mode is RxInputMode.PRESCRIBED:
        def rhs(t, y):
            dy = _derivative(y, p, float(u(t)), 0.0)
            dy[0] = 0.0
            return dy
    else:
        def rhs(t, y):
            return _derivative(y, p, y[0], float(u(t)))
    return rhs


def _zero(t):
    return 0.0


def galpha_total(y) -> np.ndarray:
    """Gabg + GaGTP + GaGDP along the last axis."""
    y = np.asarray(y)
    return y[..., INDEX["Gabg"]] + y[..., INDEX["GaGTP"]] + y[..., INDEX["GaGDP"]]


class CalibrationError(RuntimeError):
    """The parameter set has no reachable resting state."""


class NormalizationError(ValueError):
    """Fold change requested against a zero or negative baseline."""


def load_rx_params(path=None, preset: str | None = None, overrides=None) -> RxParams:
    """Read receiver constants from a parameter file (packaged defaults if ``path`` is None).

    Args:
        path: YAML parameter file.
        preset: strain preset name, e.g. ``"bar1_plus"`` or ``"bar1_delta"``.
        overrides: mapping of individual constants applied last.
    """
    from .params import load_params
    return load_params(RxParams, path, preset, overrides, default_name="receiver_default.yaml")[0]


def relative_residual(y, p: RxParams, atol: float = 1e-9) -> float:
    """max |dy/dt| / (|y| + atol) with no stimulus."""
    dy = _derivative(np.asarray(y, dtype=float), p, 0.0, 0.0)
    dy[0] = 0.0
    return float(np.max(np.abs(dy) / (np.abs(y) + atol)))


def basal_state(p: RxParams, tol: float = 1e-8, atol: float = 1e-9, horizon: float = 1e6) -> np.ndarray:
    """Pre-stimulation steady state with alpha held at zero.

    The unstimulated system is integrated with a BDF method in chunks of
    growing length until the relative residual drops below ``tol``. Negative
    round-off is clipped at the end.

    Args:
        p: receiver constants.
        tol: convergence threshold on ``relative_residual``.
        atol: absolute floor in the residual denominator.
        horizon: total simulated minutes allowed before giving up.

    Returns:
        State vector ordered as ``SPECIES``.
    """
    from scipy.integrate import solve_ivp

    rhs = make_rhs(p)
    y = initial_guess(p)
    t, chunk = 0.0, 1000.0
    res = relative_residual(y, p, atol)
    while res >= tol:
        if t >= horizon:
            raise CalibrationError(
                f"receiver did not reach a resting state within {horizon:g} min "
                f"(residual {res:.3g}, need < {tol:g})")
        sol = solve_ivp(rhs, (t, t + chunk), y, method="BDF", rtol=1e-12, atol=1e-14,
                        jac=lambda t_, y_: _jacobian(y_, p))
        if not sol.success:
            raise CalibrationError(f"basal relaxation failed: {sol.message}")
        y = np.maximum(sol.y[:, -1], 0.0)
        t += chunk
        chunk *= 4
        res = relative_residual(y, p, atol)
    return y


def _jacobian(y, p: RxParams, eps: float = 1e-7) -> np.ndarray:
    # forward differences are plenty for the BDF Newton iteration
    f0 = _derivative(y, p, 0.0, 0.0)
    J = np.empty((y.size, y.size))
    for j in range(y.size):
        step = eps * max(1.0, abs(y[j]))
        yj = y.copy()
        yj[j] += step
        J[:, j] = (_derivative(yj, p, 0.0, 0.0) - f0) / step
    J[0, :] = 0.0
    return J


def fold_change(traj, species: str, baseline: float) -> np.ndarray:
    """Pointwise ``value / baseline`` for one species of a trajectory."""
    if not baseline > 0:
        raise NormalizationError(f"baseline for {species} must be > 0, got {baseline}")
    return traj.column(species) / baseline


def simulate(p: RxParams, stimulus, t_end: float, settings=None, y0=None,
             mode: RxInputMode = RxInputMode.PRESCRIBED, u=None, breakpoints=None, t_eval=None):
    """Run the receiver from its basal state under a stimulus.

    Args:
        p: receiver constants.
        stimulus: ``StimulusProfile`` giving the alpha level in nM
            (PRESCRIBED) or the inflow rate in nM/min (FORCED). Ignored
            when ``u`` is given.
        t_end: horizon in minutes.
        settings: ``SolverSettings``; defaults apply when None.
        y0: initial state; ``basal_state(p)`` when None.
        u: optional callable overriding the stimulus.
        breakpoints: discontinuity times; taken from the stimulus when None.
        t_eval: optional output grid.

    Returns:
        Trajectory over all 39 species. In PRESCRIBED mode the alpha column
        holds the prescribed level.
    """
    from .core import Trajectory
    from .integrator import OdeProblem, SolverSettings, integrate

    if y0 is None:
        y0 = basal_state(p)
    if u is None:
        u = stimulus.level_nM
    if breakpoints is None:
        breakpoints = stimulus.breakpoints if stimulus is not None else ()
    y0 = np.array(y0, dtype=float)
    if mode is RxInputMode.PRESCRIBED:
        y0[0] = 0.0
    prob = OdeProblem(make_rhs(p, mode, u), y0, (0.0, float(t_end)), breakpoints, SPECIES)
    traj = integrate(prob, settings or SolverSettings(), t_eval=t_eval)
    if mode is RxInputMode.PRESCRIBED:
        vals = np.array(traj.values)
        vals[:, 0] = [u(t) for t in traj.times]
        traj = Trajectory(traj.species_names, traj.times, vals, diagnostics=traj.diagnostics)
    return traj
