"""Microwave single-qubit gate with a focused AC-Stark addressing beam.

The target atom's auxiliary levels |2> = |F=3,m_F=1> and |3> = |F=4,m_F=1>
are shifted by +-Delta_ac at the magic wavelength, so three global microwave
tones (0<->2, 2<->3, 3<->1) are resonant only at the beam focus.

Delta_ac is an angular rate in s^-1.  A value quoted as "0.2 MHz" enters as
2e5 s^-1; multiplying by 2 pi instead inflates every Delta_ac^2 term by ~40x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import constants as C
from .raman_gate import Breakdown

# Gamma/hbar = SCATTER_COEFF * Delta_ac for Cs at the 880 nm magic wavelength.
SCATTER_COEFF = 3.4e-6
MAGIC_ALPHA = 2.5e-38  # |alpha| of the m_F = 1 states at 880 nm, C^2 m^2 J^-1


@dataclass(frozen=True)
class MicrowaveGateConfig:
    Delta_ac: float  # s^-1
    w0: float  # m
    T_1: float  # s
    Omega_1: float  # |2><->|3> coupling, rad/s
    Omega_2: float  # |0><->|2> and |1><->|3> coupling, rad/s
    lambda_M: float = 880e-9
    delta_T: float = 1e-10
    delta_x: float = 0.0

    def __post_init__(self):
        if self.w0 <= 0 or self.T_1 <= 0:
            raise ValueError("w0 and T_1 must be positive")
        if self.delta_T < 0:
            raise ValueError("delta_T must be non-negative")

    @classmethod
    def recommended(cls, Delta_ac=2e5, w0=1.2e-6, T_1=76e-6, Omega_1=41341.0, **kw):
        """Config with the outer couplings at sqrt(3)/2 of the central one."""
        return cls(Delta_ac=Delta_ac, w0=w0, T_1=T_1, Omega_1=Omega_1,
                   Omega_2=math.sqrt(3) / 2 * Omega_1, **kw)

    @property
    def z_R(self) -> float:
        return math.pi * self.w0 ** 2 / self.lambda_M


def table_config(delta_x=0.01e-6) -> MicrowaveGateConfig:
    """Reference gate: a = 5 um lattice, 0.2 MHz shift, 1.2 um waist, 76 us."""
    return MicrowaveGateConfig.recommended(delta_x=delta_x)


@dataclass(frozen=True)
class GaussianBeam:
    w0: float
    wavelength: float
    I0: float = 1.0

    def __post_init__(self):
        if self.w0 <= 0 or self.wavelength <= 0:
            raise ValueError("w0 and wavelength must be positive")

    @property
    def z_R(self) -> float:
        return math.pi * self.w0 ** 2 / self.wavelength

    def width(self, z):
        return self.w0 * np.sqrt(1 + (np.asarray(z) / self.z_R) ** 2)


def beam_intensity(beam: GaussianBeam, r, z=0.0):
    """I(r, z)/I0 for a TEM00 beam; equals 1 at the focus."""
    w2 = beam.width(z) ** 2
    return beam.w0 ** 2 / w2 * np.exp(-2 * np.asarray(r) ** 2 / w2)


def rabi_transition(Omega, Delta, t):
    """Two-level Rabi formula: transfer probability after time t."""
    W = np.hypot(Omega, Delta)
    return np.where(W > 0, (Omega / np.where(W > 0, W, 1)) ** 2 * np.sin(W * t / 2) ** 2, 0.0)


def p_off_resonant_atom(cfg: MicrowaveGateConfig, leg_time: bool = False) -> float:
    """Per-atom off-resonant transfer caused by the timing jitter delta_T.

    ``leg_time=True`` uses one third of the gate time instead of T_1.
    """
    T = cfg.T_1 / 3 if leg_time else cfg.T_1
    return (math.pi * cfg.delta_T / (2 * T)) ** 2


def p_off_resonant_rabi(cfg: MicrowaveGateConfig, T_leg: float | None = None, sign: int = 1) -> float:
    """Full Rabi-formula form at the tuned detuning sqrt(3) Omega_1."""
    T_leg = math.pi / cfg.Omega_1 if T_leg is None else T_leg
    return float(rabi_transition(cfg.Omega_1, math.sqrt(3) * cfg.Omega_1,
                                 T_leg + sign * cfg.delta_T))


def p_off_resonant(cfg: MicrowaveGateConfig, ctx, leg_time: bool = False) -> float:
    """Lattice-aggregated EPG, (N/n_A) times the per-atom probability."""
    return ctx.N / ctx.n_A * p_off_resonant_atom(cfg, leg_time)


class AxialError(NamedTuple):
    error: float  # capped at 1
    raw: float
    order_unity: bool


def axial_addressing_error(cfg: MicrowaveGateConfig, z: float) -> AxialError:
    """Error for an atom a distance z along the beam axis in a row-addressing scheme."""
    raw = 9 * math.pi ** 2 / 16 * (z / cfg.z_R) ** 8
    return AxialError(min(raw, 1.0), raw, raw >= 0.1)


def _omega_tau(lattice, mass):
    return (math.pi / lattice.a) * math.sqrt(2 * lattice.U_L / mass)


def p_heating(cfg: MicrowaveGateConfig, lattice, mass=C.m_Cs) -> float:
    """Excitation to the first even vibrational state from the beam's harmonic term."""
    return (C.hbar ** 2 * cfg.Delta_ac ** 2 * mass * lattice.a ** 6
            / (64 * math.pi ** 4 * cfg.T_1 ** 2 * lattice.U_L ** 3 * cfg.w0 ** 4))


def heating_overlap(cfg, lattice, mass=C.m_Cs) -> float:
    w = _omega_tau(lattice, mass)
    return math.sqrt(2) / 2 * C.hbar * cfg.Delta_ac / (mass * w ** 2 * cfg.w0 ** 2)


def p_heating_rabi(cfg, lattice, mass=C.m_Cs) -> float:
    """Unsimplified Rabi form with Omega_1 = pi / T_1."""
    Om = math.pi / cfg.T_1
    xi = heating_overlap(cfg, lattice, mass)
    return float(rabi_transition(Om * xi, 2 * _omega_tau(lattice, mass), cfg.T_1))


def p_scatter(cfg: MicrowaveGateConfig, coeff: float = SCATTER_COEFF) -> float:
    return coeff * cfg.Delta_ac * cfg.T_1


def scatter_coefficient(atom, wavelength=880e-9, alpha=MAGIC_ALPHA, window=None) -> float:
    """Gamma/(hbar Delta_ac) from the Raman cross section of |F=3, m_F=1> under sigma+ light.

    Pass ``alpha=None`` to use the computed polarizability instead of 2.5e-38.
    """
    from . import response
    s = atom.sublevel(atom.ground.label, 3, 1)
    w = C.wavelength_to_omega(wavelength)
    sigma = response.raman_cross_section(atom, s, w, 1, window)
    if alpha is None:
        alpha = response.polarizability(atom, s, w, 1, window)
    return wavelength * C.epsilon_0 * sigma / (math.pi * abs(alpha))


def p_position_detuning(cfg: MicrowaveGateConfig) -> float:
    return (4 / math.pi ** 2 * cfg.Delta_ac ** 2 * cfg.T_1 ** 2
            * cfg.delta_x ** 4 / cfg.w0 ** 4)


def _position_heating_leg(cfg, lattice, dx, mass):
    return (math.sqrt(2) / math.pi ** 3 * C.hbar * cfg.Delta_ac ** 2 * dx ** 2
            * lattice.a ** 5 * mass ** 1.5
            / (cfg.T_1 ** 2 * lattice.U_L ** 2.5 * cfg.w0 ** 4))


def p_position_heating(cfg: MicrowaveGateConfig, lattice, legs: str = "full_gate",
                       mass=C.m_Cs) -> float:
    """Vibrational excitation from a displaced addressing beam.

    ``single``: one 0<->2 or 3<->1 leg.  ``full_gate``: both outer legs plus
    the 2<->3 leg, where the opposite shifts double the effective offset.
    """
    single = _position_heating_leg(cfg, lattice, cfg.delta_x, mass)
    if legs == "single":
        return single
    if legs != "full_gate":
        raise ValueError("legs must be 'single' or 'full_gate'")
    return 2 * single + _position_heating_leg(cfg, lattice, 2 * cfg.delta_x, mass)


MECHANISMS = ("off_resonant", "heating", "scatter", "position_heating", "position_detuning")

LABELS = {
    "off_resonant": "Off-resonant transitions",
    "heating": "Addressing beam-induced heating",
    "scatter": "Raman scattering (addressing beam)",
    "position_heating": "Addressing beam position",
    "position_detuning": "Addressing beam position detuning",
}


def total_microwave_epg(cfg, lattice, ctx, simulated: dict | None = None,
                        mass=C.m_Cs) -> Breakdown:
    """Gate-mechanism rows; ``simulated`` replaces the heating rows with propagator results."""
    rows = {
        "off_resonant": p_off_resonant(cfg, ctx),
        "heating": p_heating(cfg, lattice, mass),
        "scatter": p_scatter(cfg),
        "position_heating": p_position_heating(cfg, lattice, "full_gate", mass),
        "position_detuning": p_position_detuning(cfg),
    }
    for k, v in (simulated or {}).items():
        if k not in rows:
            raise KeyError(f"unknown mechanism {k!r}")
        rows[k] = float(v)
    return Breakdown(rows)
