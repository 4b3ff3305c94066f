"""Galactose-gated alpha-factor transmitter (MATalpha cell).

GAL-pathway gene network (GAL3, GAL80, GAL2, GAL1 mRNAs and proteins,
intracellular galactose) with phosphorylated galactose eliminated by a
quasi-steady-state argument, plus the engineered MFalpha1 transcript,
alpha-factor protein and exportable peptide. Concentrations are nM and
time is minutes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .core import Concentration, DataError, StimulusProfile, Trajectory

TX_SPECIES = ("M3", "M80", "M2", "M1", "G3", "G80", "G2", "G1", "Gi",
              "MFalpha1", "alpha_p", "alpha_pep")
TX_INDEX = {n: i for i, n in enumerate(TX_SPECIES)}


class DomainError(ValueError):
    """Negative concentration passed to a rate law."""


@dataclass(frozen=True)
class TxParams:
    # transport
    r_max: float          # 1/min
    K: float              # nM
    # phosphorylation
    kappa_GK: float       # 1/min
    K_IU: float           # nM
    K_IC: float           # nM
    K_m: float            # nM
    delta: float          # 1/min
    mu_alpha: float       # 1/min
    # glucose effects
    y_b: float
    y_c: float            # nM
    x_c: float            # nM
    n_x: float
    mu_glc: float         # 1/min
    K_mu: float           # nM
    # transcription (nM/min), translation (1/min), decay (1/min)
    k_tr3: float
    k_tr80: float
    k_tr2: float
    k_tr1: float
    k_tl3: float
    k_tl80: float
    k_tl2: float
    k_tl1: float
    gM3: float
    gM80: float
    gM2: float
    gM1: float
    gG3: float
    gG80: float
    gG2: float
    gG1: float
    # galactose-driven activation of Gal3p and Gal1p
    kC3: float            # 1/min
    kC1: float            # 1/min
    K_S: float            # nM
    # dimerization / UAS binding dissociation constants (nM)
    KD1: float
    KD3: float
    KD80: float
    KB1: float
    KB3: float
    KB80: float
    # alpha-factor chain (1/min)
    k_deg: float
    k_tr_alpha: float
    k_degP: float
    k_pep_alpha: float
    k_degPep: float
    k_export: float
    # UAS site counts per promoter
    n_M3: int = 1
    n_M80: int = 1
    n_M2: int = 2
    n_M1: int = 4
    n_MF: int = 3
    # translation substrate: "mrna" (default) or "literal" (protein itself)
    translation: str = "mrna"

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "translation":
                if v not in ("mrna", "literal"):
                    raise ValueError("translation must be 'mrna' or 'literal'")
            elif f.name.startswith("n_") and f.name != "n_x":
                if int(v) != v or v < 1:
                    raise ValueError(f"{f.name} must be an integer >= 1")
                object.__setattr__(self, f.name, int(v))
            elif not math.isfinite(v) or v < 0:
                raise ValueError(f"transmitter parameter {f.name} must be finite and >= 0, got {v}")
        if self.n_x < 1:
            raise ValueError("n_x must be >= 1")

    def with_overrides(self, **kw) -> "TxParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class TxState:
    M3: float = 0.0
    M80: float = 0.0
    M2: float = 0.0
    M1: float = 0.0
    G3: float = 0.0
    G80: float = 0.0
    G2: float = 0.0
    G1: float = 0.0
    Gi: float = 0.0
    MFalpha1: float = 0.0
    alpha_p: float = 0.0
    alpha_pep: float = 0.0

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in TX_SPECIES])

    @classmethod
    def from_array(cls, y) -> "TxState":
        return cls(*map(float, y))


@dataclass(frozen=True)
class TxInputs:
    """Extracellular galactose ``Ge`` and glucose ``R`` schedules."""

    Ge: StimulusProfile = StimulusProfile()
    R: StimulusProfile = StimulusProfile()

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.Ge.breakpoints) | set(self.R.breakpoints)))


def load_tx_params(path=None, preset: str | None = None, overrides=None) -> TxParams:
    from .params import load_params
    return load_params(TxParams, path, preset, overrides, default_name="transmitter_default.yaml")[0]


def _nonneg(**kw):
    for k, v in kw.items():
        if not v >= 0:
            raise DomainError(f"{k} must be >= 0, got {v}")


def transport_rate(G2: float, Ge: float, Gi: float, p: TxParams) -> float:
    """Net carrier-facilitated galactose import (nM/min); negative means export."""
    _nonneg(G2=G2, Ge=Ge, Gi=Gi)
    return p.r_max * G2 * (Ge / (p.K + Ge) - Gi / (p.K + Gi))


def phospho_sigma(Gi: float, p: TxParams) -> float:
    """Maximal Gal1p phosphorylation rate at intracellular galactose ``Gi``."""
    _nonneg(Gi=Gi)
    return p.kappa_GK * p.K_IU * p.K_IC / (p.K_IU * p.K_m + p.K_IC * Gi)


def phospho_kp(Gi: float, p: TxParams) -> float:
    """Half-maximal Gal1p level for phosphorylation (nM)."""
    _nonneg(Gi=Gi)
    return (p.K_m + Gi) * p.K_IU * p.K_IC / (p.K_IU * p.K_m + p.K_IC * Gi)


def phospho_flux(G1: float, Gi: float, p: TxParams) -> float:
    """Galactose consumed by phosphorylation with Gp at quasi-steady state.

    Solving sigma*G1*Gi/(kp + Gp) = delta*Gp for Gp and multiplying by delta
    gives 2*sigma*G1*Gi / (kp + sqrt(kp^2 + 4*sigma*Gi*G1/delta)).
    """
    s = phospho_sigma(Gi, p)
    kp = phospho_kp(Gi, p)
    num = 2.0 * s * G1 * Gi
    if num == 0.0:
        return 0.0
    return num / (kp + math.sqrt(kp * kp + 4.0 * s * Gi * G1 / p.delta))


def glucose_transport_factor(R: float, p: TxParams) -> float:
    """y(R); not clamped to [0, 1]."""
    return (1.0 - p.y_b) + p.y_b / (p.y_c + R)


def glucose_repression_factor(R: float, p: TxParams) -> float:
    """x(R) in (0, 1]."""
    return 1.0 / ((R / p.x_c) ** p.n_x + 1.0)


def dilution(R: float, p: TxParams) -> float:
    """mu(R) = mu_alpha + mu_glc * R / (R + K_mu)."""
    if p.mu_glc == 0.0:
        return p.mu_alpha
    return p.mu_alpha + p.mu_glc * R / (R + p.K_mu)


def binding_constants(p: TxParams) -> tuple[float, float, float]:
    """Effective activator and repressor constants (K1, K3, K80) in nM."""
    need = {"KD1": p.KD1, "KD3": p.KD3, "KD80": p.KD80, "KB1": p.KB1, "KB3": p.KB3,
            "KB80": p.KB80, "kC1": p.kC1, "kC3": p.kC3}
    bad = [k for k, v in need.items() if not v > 0]
    if bad:
        from .core import ConfigurationError
        raise ConfigurationError(f"binding constants need positive {bad}")
    K1 = math.sqrt(p.KD1 * p.KB3 * p.KB1) * (p.gG1 + p.mu_alpha) / p.kC1
    K3 = math.sqrt(p.KD3 * p.KB3 * p.KB3) * (p.gG3 + p.mu_alpha) / p.kC3
    K80 = math.sqrt(p.KD80 * p.KB80)
    return K1, K3, K80


def promoter_vacancy(n: int, G80: float, G3: float, G1: float, Gi: float, p: TxParams,
                     K: tuple[float, float, float] | None = None) -> float:
    """``1 / Omega``, the complement of the promoter activity, in (0, 1].

    Computed in log space so it stays positive when Omega exceeds the
    double range; ``1 - R_n`` itself rounds to 0 once Omega > 2**53.
    ``G80 == 0`` is the repressor-free limit and returns 0.
    """
    _nonneg(G80=G80, G3=G3, G1=G1, Gi=Gi)
    if n < 1:
        raise ValueError("n must be >= 1")
    if G80 == 0.0:
        return 0.0
    K1, K3, K80 = binding_constants(p) if K is None else K
    g = Gi / (p.K_S + Gi)
    # log Omega = log(1 + sum over factors of b^2 + b^4 + ... + b^(2n))
    logs = [0.0]
    for base in (K80 / G80, G3 * g / K3, G1 * g / K1):
        if base > 0.0:
            lb2 = 2.0 * math.log(base)
            logs.extend(k * lb2 for k in range(1, n + 1))
    top = max(logs)
    log_omega = top + math.log(sum(math.exp(v - top) for v in logs))
    return math.exp(-log_omega)


def fractional_transcription(n: int, G80: float, G3: float, G1: float, Gi: float, p: TxParams,
                             K: tuple[float, float, float] | None = None) -> float:
    """Promoter activity R_n = 1 - 1/Omega for ``n`` binding sites.

    ``G80 == 0`` returns the repressor-free limit 1.
    """
    return 1.0 - promoter_vacancy(n, G80, G3, G1, Gi, p, K)


def _rhs(y, Ge, R, p: TxParams, K):
    M3, M80, M2, M1, G3, G80, G2, G1, Gi, MF, ap, pep = y
    x = glucose_repression_factor(R, p)
    mu = dilution(R, p)
    R1 = fractional_transcription(p.n_M3, G80, G3, G1, Gi, p, K)
    R80 = R1 if p.n_M80 == p.n_M3 else fractional_transcription(p.n_M80, G80, G3, G1, Gi, p, K)
    R2 = fractional_transcription(p.n_M2, G80, G3, G1, Gi, p, K)
    R4 = fractional_transcription(p.n_M1, G80, G3, G1, Gi, p, K)
    R3 = fractional_transcription(p.n_MF, G80, G3, 0.0, Gi, p, K)
    act = Gi / (p.K_S + Gi)
    if p.translation == "mrna":
        s3, s80, s2, s1 = M3, M80, M2, M1
    else:
        s3, s80, s2, s1 = G3, G80, G2, G1
    dGi = (glucose_transport_factor(R, p) * transport_rate(G2, Ge, Gi, p)
           - phospho_flux(G1, Gi, p)
           - Gi * (p.kC3 * act + p.kC1 * act)
           - mu * Gi)
    return np.array([
        p.k_tr3 * x * R1 - (p.gM3 + mu) * M3,
        p.k_tr80 * x * R80 - (p.gM80 + mu) * M80,
        p.k_tr2 * x * R2 - (p.gM2 + mu) * M2,
        p.k_tr1 * x * R4 - (p.gM1 + mu) * M1,
        p.k_tl3 * s3 - (p.gG3 + mu + p.kC3 * act) * G3,
        p.k_tl80 * s80 - (p.gG80 + mu) * G80,
        p.k_tl2 * s2 - (p.gG2 + mu) * G2,
        p.k_tl1 * s1 - (p.gG1 + mu + p.kC1 * act) * G1,
        dGi,
        p.k_tr1 * x * R3 - p.k_deg * MF,
        p.k_tr_alpha * MF - p.k_degP * ap,
        p.k_pep_alpha * ap - p.k_degPep * pep,
    ])


def tx_derivatives(s, t: float, inputs: TxInputs, p: TxParams) -> np.ndarray:
    """Right-hand side of the transmitter system.

    Args:
        s: ``TxState`` or a vector ordered as ``TX_SPECIES``.
        t: time in minutes.
        inputs: galactose and glucose schedules.
        p: transmitter constants.

    Returns:
        Derivative vector ordered as ``TX_SPECIES`` (nM/min).
    """
    y = s.to_array() if isinstance(s, TxState) else np.asarray(s, dtype=float)
    if not np.all(np.isfinite(y)):
        from .integrator import IntegrationError
        raise IntegrationError(f"non-finite transmitter state at t={t}")
    if np.any(y < 0):
        raise DomainError(f"negative transmitter state at t={t}")
    return _rhs(y, inputs.Ge.level_nM(t), inputs.R.level_nM(t), p, binding_constants(p))


def make_rhs(inputs: TxInputs, p: TxParams):
    """``f(t, y)`` for the integrator; tiny negative excursions are read as zero."""
    K = binding_constants(p)
    ge, rr = inputs.Ge.level_nM, inputs.R.level_nM

    def rhs(t, y):
        return _rhs(np.maximum(y, 0.0), ge(t), rr(t), p, K)
    return rhs


def simulate(p: TxParams, inputs: TxInputs, t_end: float, y0=None, settings=None, t_eval=None) -> Trajectory:
    """Integrate the transmitter from ``y0`` (all zeros by default)."""
    from .integrator import OdeProblem, SolverSettings, integrate
    y0 = np.zeros(len(TX_SPECIES)) if y0 is None else (
        y0.to_array() if isinstance(y0, TxState) else np.asarray(y0, dtype=float))
    prob = OdeProblem(make_rhs(inputs, p), y0, (0.0, float(t_end)), inputs.breakpoints, TX_SPECIES)
    return integrate(prob, settings or SolverSettings(), t_eval=t_eval)


def pre_equilibrate(p: TxParams, galactose_nM: float = 0.0, duration: float = 3000.0,
                    settings=None) -> np.ndarray:
    """State after holding a constant galactose level for ``duration`` minutes.

    Starts from a small uniform seed (1e-3 nM) rather than zero, since the
    repressor-free promoter at G80 = 0 is fully active.
    """
    ge = StimulusProfile(((0.0, duration + 1.0, Concentration(galactose_nM)),)) if galactose_nM > 0 \
        else StimulusProfile()
    seed = np.full(len(TX_SPECIES), 1e-3)
    return simulate(p, TxInputs(Ge=ge), duration, y0=seed, settings=settings).values[-1].copy()


def secretion_series(traj: Trajectory, p: TxParams) -> Trajectory:
    """Per-cell alpha-factor export rate ``k_export * alpha_pep`` (nM/min).

    Returned as a one-column trajectory named ``secretion`` on the input grid.
    """
    if "alpha_pep" not in traj.species_names:
        raise DataError("trajectory has no alpha_pep column")
    rate = p.k_export * traj.column("alpha_pep")
    return Trajectory(("secretion",), traj.times, rate[:, None])
