"""Physical constants (CODATA 2018, SI) used throughout the package."""

import math

hbar = 1.054571817e-34  # J s
h = 2 * math.pi * hbar
c = 299792458.0  # m/s
epsilon_0 = 8.8541878128e-12  # F/m
k_B = 1.380649e-23  # J/K
e = 1.602176634e-19  # C
a_0 = 5.29177210903e-11  # m
alpha_fs = 7.2973525693e-3

TABLE = {
    "hbar": (hbar, "J s"),
    "c": (c, "m s^-1"),
    "epsilon_0": (epsilon_0, "F m^-1"),
    "k_B": (k_B, "J K^-1"),
    "e": (e, "C"),
    "a_0": (a_0, "m"),
    "alpha_fs": (alpha_fs, ""),
}


def uK_to_J(T_uK):
    return T_uK * 1e-6 * k_B


def J_to_uK(U):
    return U / k_B * 1e6


def wavelength_to_omega(lam):
    return 2 * math.pi * c / lam


def omega_to_wavelength(omega):
    return 2 * math.pi * c / omega

# 133Cs mass, kept here so closed-form error models need no data file.
m_Cs = 2.20694650e-25  # kg
