"""Two-photon Raman single-qubit gate: rotation, fidelity and error mechanisms.

Every ``p_*`` function returns an error probability for one gate.  The
pulse-area term is defined for a pi/2 pulse and all others for a pi pulse;
``total_raman_epg`` adds them as they are, treating each mechanism as an
independent probability.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import constants as C
from .errors import ValidityWarning

# |Omega_R| = RABI_COEFF * I / |Delta_1| for the Cs D1 Raman pair (W^-1 m^2 s^-2).
RABI_COEFF = 8.3e12
# Differential light shift of the qubit states per unit Rabi frequency is
# STARK_RATIO / Delta_1, fitted over 50 GHz < Delta_1/2pi < 5000 GHz.
STARK_RATIO = 6e10
STARK_RANGE_HZ = (50e9, 5000e9)
DOPPLER_PREFACTOR = (8 - 4 * math.pi + math.pi ** 2) / 24
# Shot-noise coefficient at detector efficiency 0.5 (m^2 s^-1).
SHOT_COEFF = 2.6e-6
SHOT_ETA_REF = 0.5
# Raman transition frequency used for the photon energy in the shot-noise bound.
OMEGA_RAMAN = 2 * math.pi * 3.5e14

LAMBDA_R = 894e-9
TAU_D1 = 34.9e-9


@dataclass(frozen=True)
class RamanGateConfig:
    Omega_R: complex  # rad/s
    Delta_1: float  # rad/s
    w0: float  # m
    t: float  # s
    Delta_2: float | None = None
    Delta: float = 0.0
    lambda_R: float = LAMBDA_R
    P_R: float = 10e-3  # W, total over both beams
    eta: float = SHOT_ETA_REF
    tau: float = TAU_D1

    def __post_init__(self):
        if self.w0 <= 0 or self.t <= 0 or self.tau <= 0:
            raise ValueError("w0, t and tau must be positive")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if self.Delta_1 == 0:
            raise ValueError("Delta_1 must be nonzero")
        if self.Delta_2 is None:
            object.__setattr__(self, "Delta_2", self.Delta_1)

    @property
    def Omega_prime(self) -> float:
        return math.hypot(abs(self.Omega_R), self.Delta)

    @classmethod
    def from_power(cls, P_R, w0, Delta_1, **kw) -> "RamanGateConfig":
        """Pi-pulse config with Omega_R set by the peak intensity 2 P_R / (pi w0^2)."""
        Omega_R = rabi_from_intensity(2 * P_R / (math.pi * w0 ** 2), Delta_1)
        return cls(Omega_R=Omega_R, Delta_1=Delta_1, w0=w0, t=math.pi / Omega_R, P_R=P_R, **kw)


@dataclass(frozen=True)
class MotionalState:
    n_x: int = 0
    n_y: int = 0

    def __post_init__(self):
        if self.n_x < 0 or self.n_y < 0:
            raise ValueError("vibrational quantum numbers must be non-negative")

    @property
    def quadratic_sum(self) -> int:
        return (self.n_x ** 2 + self.n_x + 1) + (self.n_y ** 2 + self.n_y + 1)

    @property
    def linear_sum(self) -> int:
        return self.n_x + self.n_y + 1


GROUND = MotionalState(0, 0)


@dataclass
class Breakdown:
    """Per-mechanism error probabilities and their sum."""

    rows: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return float(sum(self.rows.values()))

    def dominant(self) -> str:
        return max(self.rows, key=self.rows.get)

    def as_dict(self) -> dict:
        return {"rows": dict(self.rows), "total": self.total}


def rotation_matrix(Omega_R, Delta, t) -> np.ndarray:
    """2x2 rotation produced by a Raman pulse with two-photon detuning Delta."""
    Om = complex(Omega_R)
    Wp = math.hypot(abs(Om), Delta)
    ph = np.exp(0.5j * Delta * t)
    if Wp == 0:
        return np.eye(2, dtype=complex)
    c, s = math.cos(0.5 * Wp * t), math.sin(0.5 * Wp * t)
    return np.array([
        [ph * (c - 1j * Delta / Wp * s), 1j * ph * Om.conjugate() / Wp * s],
        [1j / ph * Om / Wp * s, (c + 1j * Delta / Wp * s) / ph],
    ])


def averaged_pi_fidelity(theta, phi):
    """State-averaged overlap of R(theta, phi) with a pi pulse about x."""
    return 0.5 + (np.cos(2 * phi) - 2 * np.cos(theta) * np.cos(phi) ** 2) / 6


def rabi_from_intensity(I, Delta_1) -> float:
    Om = RABI_COEFF * I / abs(Delta_1)
    if np.any(Om > 0.1 * abs(Delta_1)):
        warnings.warn("Raman Rabi frequency is not small compared with Delta_1", ValidityWarning,
                      stacklevel=2)
    return Om


def _motion_scale(lattice, w0, mass):
    # hbar^2 a^2 / (m U_L w0^4)
    return C.hbar ** 2 * lattice.a ** 2 / (mass * lattice.U_L * w0 ** 4)


def _omega_tau(lattice, mass):
    return (math.pi / lattice.a) * math.sqrt(2 * lattice.U_L / mass)


def p_neighbor(cfg: RamanGateConfig, lattice) -> float:
    """Unwanted rotation summed over the four in-line neighbours."""
    a, w0, lam = lattice.a, cfg.w0, cfg.lambda_R
    return (2 * math.pi ** 2 / 3) * (1 + a ** 2 * lam ** 2 / (math.pi ** 2 * w0 ** 4)) ** -2 \
        * math.exp(-4 * a ** 2 / w0 ** 2)


def p_spontaneous(cfg: RamanGateConfig) -> float:
    return math.pi / (2 * abs(cfg.Delta_1) * cfg.tau)


def stark_phase_variance(cfg, lattice, motional=GROUND, mass=C.m_Cs) -> float:
    f_hz = abs(cfg.Delta_1) / (2 * math.pi)
    if not STARK_RANGE_HZ[0] <= f_hz <= STARK_RANGE_HZ[1]:
        warnings.warn(f"Delta_1/2pi = {f_hz:.3g} Hz is outside the fitted light-shift range; "
                      "extrapolating", ValidityWarning, stacklevel=3)
    return (_motion_scale(lattice, cfg.w0, mass) / math.pi ** 2
            * (STARK_RATIO / cfg.Delta_1) ** 2 * motional.quadratic_sum)


def p_ac_stark(cfg, lattice, motional=GROUND, mass=C.m_Cs) -> float:
    return 2 / 3 * stark_phase_variance(cfg, lattice, motional, mass)


def p_pulse_area(cfg, lattice, motional=GROUND, mass=C.m_Cs) -> float:
    """Pulse-area spread from motion across the beam profile (pi/2 gate)."""
    var = _motion_scale(lattice, cfg.w0, mass) / math.pi ** 2 * (math.pi / 2) ** 2 \
        * motional.quadratic_sum
    return var / 6


def doppler_variance(cfg, lattice, motional=GROUND, mass=C.m_Cs) -> float:
    k = 2 * math.pi / cfg.lambda_R
    return k ** 2 * C.hbar * _omega_tau(lattice, mass) / mass * motional.linear_sum


def p_doppler(cfg, lattice, motional=GROUND, mass=C.m_Cs) -> float:
    return DOPPLER_PREFACTOR * doppler_variance(cfg, lattice, motional, mass) / abs(cfg.Omega_R) ** 2


def p_polarization(cfg, lattice, motional=GROUND, mass=C.m_Cs) -> float:
    """Leakage into the four m_F = +-1 states driven by the beam's longitudinal field."""
    return (motional.linear_sum * C.hbar * cfg.lambda_R ** 2 * lattice.a
            / (math.pi * cfg.w0 ** 4 * math.sqrt(2 * mass * lattice.U_L)))


def p_shot_noise(cfg: RamanGateConfig) -> float:
    """Shot-noise floor with Omega_R tied to the beam intensity (scales as 1/eta)."""
    return SHOT_COEFF * (SHOT_ETA_REF / cfg.eta) / (abs(cfg.Delta_1) * cfg.w0 ** 2)


def p_shot_noise_from_power(cfg: RamanGateConfig, omega_R: float = OMEGA_RAMAN) -> float:
    """Shot-noise floor from the photon budget of one pi pulse: pi^2 (dI/I)^2 / 6."""
    t_pi = math.pi / abs(cfg.Omega_R)
    rel_sq = 4 * C.hbar * omega_R / (cfg.eta * cfg.P_R * t_pi)
    return math.pi ** 2 * rel_sq / 6


MECHANISMS = ("neighbor", "spontaneous", "ac_stark", "pulse_area", "doppler",
              "polarization", "shot_noise")

LABELS = {
    "neighbor": "Neighbor atom errors",
    "spontaneous": "Spontaneous emission",
    "ac_stark": "AC Stark shifts",
    "pulse_area": "Atomic motion-reduced pulse area",
    "doppler": "Detuning Doppler shift",
    "polarization": "Polarization effects",
    "shot_noise": "Laser intensity noise",
}


def total_raman_epg(cfg, lattice, motional=GROUND, mass=C.m_Cs) -> Breakdown:
    return Breakdown({
        "neighbor": p_neighbor(cfg, lattice),
        "spontaneous": p_spontaneous(cfg),
        "ac_stark": p_ac_stark(cfg, lattice, motional, mass),
        "pulse_area": p_pulse_area(cfg, lattice, motional, mass),
        "doppler": p_doppler(cfg, lattice, motional, mass),
        "polarization": p_polarization(cfg, lattice, motional, mass),
        "shot_noise": p_shot_noise(cfg),
    })
