"""Optical lattice model: potential, trapping, lattice-light scattering, power.

Depths are energies in J; use :func:`optlattice.constants.uK_to_J` at the
boundary when working in temperature units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import constants as C
from . import response
from .errors import ZeroPolarizability

BLUE = "blue"
RED = "red"

# Storage-loss background: 25 s storage times have been demonstrated.
DEFAULT_LOSS_RATE = 1.0 / 25.0


@dataclass(frozen=True)
class LatticeConfig:
    a: float  # lattice constant, m
    U_L: float  # depth, J
    lambda_L: float = 800e-9
    detuning_side: str = BLUE
    sites_per_axis: int = 100
    dimensions: int = 3

    def __post_init__(self):
        if self.a <= 0 or self.U_L <= 0:
            raise ValueError("lattice constant and depth must be positive")
        if self.sites_per_axis < 1:
            raise ValueError("sites_per_axis must be >= 1")
        if self.detuning_side not in (BLUE, RED):
            raise ValueError(f"detuning_side must be 'blue' or 'red', got {self.detuning_side!r}")
        if self.dimensions not in (2, 3):
            raise ValueError("dimensions must be 2 or 3")

    @property
    def omega_L(self) -> float:
        return C.wavelength_to_omega(self.lambda_L)

    @property
    def n_sites(self) -> int:
        return self.sites_per_axis ** self.dimensions


@dataclass(frozen=True)
class StorageContext:
    N: float
    n_A: float
    T_1: float

    def __post_init__(self):
        if not 1 <= self.n_A <= self.N:
            raise ValueError("need 1 <= n_A <= N")
        if self.T_1 <= 0:
            raise ValueError("T_1 must be positive")


def lattice_potential(cfg: LatticeConfig, x):
    return 0.5 * cfg.U_L * _cos(2 * math.pi * x / cfg.a)


def _cos(x):
    try:
        return math.cos(x)
    except TypeError:
        import numpy as np
        return np.cos(x)


def trap_frequency(cfg: LatticeConfig, mass: float) -> float:
    """Harmonic frequency at the bottom of a lattice well (rad/s)."""
    return (math.pi / cfg.a) * math.sqrt(2 * cfg.U_L / mass)


def depth_from_field(E0_sq: float, alpha: float) -> float:
    if alpha == 0:
        raise ZeroPolarizability("polarizability is zero")
    return 0.25 * E0_sq * abs(alpha)


def field_from_depth(U_L: float, alpha: float) -> float:
    if alpha == 0:
        raise ZeroPolarizability("polarizability is zero")
    return 4 * U_L / abs(alpha)


def blue_field_ratio(cfg: LatticeConfig, mass: float) -> float:
    """E^2-bar / E0^2 for a ground-state atom at an intensity node (one lattice axis)."""
    return C.hbar * math.pi ** 2 / (2 * cfg.a ** 2 * mass * trap_frequency(cfg, mass))


def mean_square_field(cfg: LatticeConfig, E0_sq: float, mass: float) -> float:
    if cfg.detuning_side == RED:
        return E0_sq
    return blue_field_ratio(cfg, mass) * E0_sq


def storage_scatter_rate(cfg: LatticeConfig, atom, qubit_state, eps_in=1, window=None) -> float:
    """Raman scattering rate of lattice light for one standing-wave axis (1/s).

    This is the closed-form blue/red expression in terms of the depth, the
    Raman cross section and the polarizability at the lattice wavelength.
    See :func:`lattice_scatter_rate` for the per-atom total in a multi-axis lattice.
    """
    w = cfg.omega_L
    sigma = response.raman_cross_section(atom, qubit_state, w, eps_in, window)
    alpha = abs(response.polarizability(atom, qubit_state, w, eps_in, window))
    if alpha == 0:
        raise ZeroPolarizability("polarizability is zero at the lattice wavelength")
    m = atom.mass
    if cfg.detuning_side == BLUE:
        return (math.pi * C.c * C.epsilon_0 / (cfg.a * w)) * math.sqrt(cfg.U_L / (2 * m)) * sigma / alpha
    return (2 * C.c * C.epsilon_0 / (C.hbar * w)) * cfg.U_L * sigma / alpha


def lattice_scatter_rate(cfg: LatticeConfig, atom, qubit_state, eps_in=1, window=None) -> float:
    """Per-atom lattice-light Raman rate summed over the cfg.dimensions standing-wave axes."""
    return cfg.dimensions * storage_scatter_rate(cfg, atom, qubit_state, eps_in, window)


def storage_epg(rate: float, ctx: StorageContext) -> float:
    return rate * ctx.T_1 * ctx.N / ctx.n_A


# Anchor: three 10 W beam sets give 100^3 sites at a = 10 um, U_L = 500 uK, 851.7 nm.
ANCHOR_POWER = 10.0
ANCHOR = dict(a=10e-6, U_L_uK=500.0, lambda_L=851.7e-9, sites_per_axis=100)


def _power_scale(cfg, alpha):
    return cfg.a ** 2 * cfg.sites_per_axis ** 2 * cfg.U_L / abs(alpha)


def lattice_power_required(cfg: LatticeConfig, atom, qubit_state, eps_in=1, margin: float = 1.0,
                           window=None) -> float:
    """Laser power per beam set (W), calibrated to the 10 W / 100^3-site anchor.

    Scales as a^2 * sites_per_axis^2 * U_L / |alpha(lambda_L)|: the beam must
    cover the lattice cross-section and its intensity sets the depth.
    ``margin`` multiplies the result (geometric overhead beyond the anchor).
    """
    alpha = response.polarizability(atom, qubit_state, cfg.omega_L, eps_in, window)
    if alpha == 0:
        raise ZeroPolarizability("polarizability is zero at the lattice wavelength")
    anchor_cfg = LatticeConfig(ANCHOR["a"], C.uK_to_J(ANCHOR["U_L_uK"]), ANCHOR["lambda_L"],
                               BLUE, ANCHOR["sites_per_axis"], 3)
    alpha_anchor = response.polarizability(atom, qubit_state, anchor_cfg.omega_L, eps_in, window)
    return margin * ANCHOR_POWER * _power_scale(cfg, alpha) / _power_scale(anchor_cfg, alpha_anchor)


def max_sites_per_axis(cfg: LatticeConfig, atom, qubit_state, P_max: float, eps_in=1) -> float:
    """Largest (real-valued) sites_per_axis reachable with P_max per beam set."""
    p1 = lattice_power_required(
        LatticeConfig(cfg.a, cfg.U_L, cfg.lambda_L, cfg.detuning_side, 1, cfg.dimensions),
        atom, qubit_state, eps_in)
    return math.sqrt(P_max / p1)
