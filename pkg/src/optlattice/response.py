"""Kramers-Heisenberg scattering cross sections and dynamic polarizability.

Ground-manifold sublevels couple to the hyperfine-resolved excited
sublevels of every transition line in the AtomSpec (the D1 and D2 lines for
the bundled alkali files).  Polarizations are spherical indices q in
{-1, 0, +1}; eps_{+1} drives sigma+ transitions.

Denominators are real, so every routine refuses frequencies closer than
``window`` to a resonance instead of returning a divergent number.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import constants as C
from .angular import hyperfine_dipole_element
from .atomic_data import AtomSpec, Sublevel, sublevels
from .errors import NoSignChange, ResonanceProximity

DEFAULT_WINDOW_LINEWIDTHS = 100.0


@dataclass(frozen=True)
class Polarization:
    q: int

    def __post_init__(self):
        if self.q not in (-1, 0, 1):
            raise ValueError(f"spherical polarization index must be -1, 0 or +1, got {self.q}")


def _q(eps) -> int:
    q = eps.q if isinstance(eps, Polarization) else int(eps)
    Polarization(q)
    return q


@dataclass(frozen=True)
class ResponsePoint:
    omega: float
    sigma_raman: float
    sigma_rayleigh: float
    alpha: float

    @property
    def wavelength(self) -> float:
        return C.omega_to_wavelength(self.omega)


class _Tables:
    """Dipole elements <g| x.eps_q^* |e> for all ground g and excited e."""

    def __init__(self, atom: AtomSpec):
        self.ground = sublevels(atom, atom.ground)
        self.excited = []
        linewidth = []
        for line in atom.lines:
            if line.lower != atom.ground:
                continue
            for s in sublevels(atom, line.upper):
                self.excited.append((s, line))
                linewidth.append(1.0 / line.lifetime)
        self.index = {(s.F, s.m_F): k for k, s in enumerate(self.ground)}
        self.e_energy = np.array([s.absolute_energy for s, _ in self.excited])
        self.g_energy = np.array([s.absolute_energy for s in self.ground])
        self.linewidth = np.array(linewidth)
        ng, ne = len(self.ground), len(self.excited)
        self.D = {}
        for q in (-1, 0, 1):
            M = np.zeros((ng, ne))
            for gi, g in enumerate(self.ground):
                for ei, (e, line) in enumerate(self.excited):
                    M[gi, ei] = hyperfine_dipole_element(
                        g, e, q, line.reduced_element, atom.nuclear_spin)
            self.D[q] = M

    def row(self, s: Sublevel) -> int:
        try:
            return self.index[(s.F, s.m_F)]
        except KeyError:
            raise ValueError(f"{s} is not a ground-manifold sublevel") from None


@lru_cache(maxsize=8)
def _tables(atom: AtomSpec) -> _Tables:
    return _Tables(atom)


def _check_window(t: _Tables, a_row: int, omega: float, window):
    w_ia = t.e_energy - t.g_energy[a_row]
    widths = t.linewidth * DEFAULT_WINDOW_LINEWIDTHS if window is None else window
    bad = np.abs(w_ia - omega) < widths
    if np.any(bad):
        k = int(np.argmax(bad))
        width = widths[k] if np.ndim(widths) else widths
        raise ResonanceProximity(omega, w_ia[k], float(width))
    return w_ia


def scattering_amplitude(atom: AtomSpec, a: Sublevel, b: Sublevel, omega: float, eps_in,
                         window=None) -> np.ndarray:
    """Spherical components V.eps_{q'}^* (q' = -1, 0, +1) of the Kramers-Heisenberg vector sum (m^2 s)."""
    q = _q(eps_in)
    t = _tables(atom)
    ra, rb = t.row(a), t.row(b)
    w_ia = _check_window(t, ra, omega, window)
    omega_out = omega - (b.absolute_energy - a.absolute_energy)
    res = 1.0 / (w_ia - omega)
    anti = 1.0 / (w_ia + omega_out)
    sign_q = -1.0 if q % 2 else 1.0
    out = np.zeros(3)
    for k, qp in enumerate((-1, 0, 1)):
        sign_qp = -1.0 if qp % 2 else 1.0
        resonant = t.D[q][ra] * t.D[qp][rb] * res
        antiresonant = sign_q * sign_qp * t.D[-q][rb] * t.D[-qp][ra] * anti
        out[k] = np.sum(resonant + antiresonant)
    return out


def cross_section(atom: AtomSpec, a: Sublevel, b: Sublevel, omega: float, eps_in,
                  window=None) -> float:
    """sigma_ab in m^2 for incoming photon frequency ``omega`` (rad/s)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    V = scattering_amplitude(atom, a, b, omega, eps_in, window)
    omega_out = omega - (b.absolute_energy - a.absolute_energy)
    pref = (8 * math.pi / 3) * C.alpha_fs ** 2 * omega * omega_out ** 3 / C.c ** 2
    return float(pref * np.dot(V, V))


def raman_breakdown(atom: AtomSpec, a: Sublevel, omega: float, eps_in, window=None) -> dict:
    """sigma_ab for every ground-manifold final state b != a (keyed by Sublevel)."""
    t = _tables(atom)
    return {b: cross_section(atom, a, b, omega, eps_in, window)
            for b in t.ground if (b.F, b.m_F) != (a.F, a.m_F)}


def raman_cross_section(atom: AtomSpec, a: Sublevel, omega: float, eps_in, window=None) -> float:
    return float(sum(raman_breakdown(atom, a, omega, eps_in, window).values()))


def rayleigh_cross_section(atom: AtomSpec, a: Sublevel, omega: float, eps_in, window=None) -> float:
    return cross_section(atom, a, a, omega, eps_in, window)


def raman_partition(atom: AtomSpec, a: Sublevel, omega: float, eps_in, qubit_states,
                    window=None) -> dict:
    """Split the Raman cross section into bit-flip (final state is another qubit state) and leakage."""
    keys = {(s.F, s.m_F) for s in qubit_states}
    flip = leak = 0.0
    for b, sig in raman_breakdown(atom, a, omega, eps_in, window).items():
        if (b.F, b.m_F) in keys:
            flip += sig
        else:
            leak += sig
    total = flip + leak
    return {"bit_flip": flip, "leakage": leak,
            "bit_flip_fraction": flip / total if total else float("nan")}


def polarizability(atom: AtomSpec, a: Sublevel, omega: float, eps_in, window=None) -> float:
    """Dynamic polarizability of sublevel ``a`` in C^2 m^2 J^-1."""
    q = _q(eps_in)
    t = _tables(atom)
    ra = t.row(a)
    w_ia = _check_window(t, ra, omega, window)
    s = np.sum(t.D[q][ra] ** 2 / (w_ia - omega) + t.D[-q][ra] ** 2 / (w_ia + omega))
    return float(C.e ** 2 / C.hbar * s)


def response_point(atom, a, omega, eps_in, window=None) -> ResponsePoint:
    return ResponsePoint(omega,
                         raman_cross_section(atom, a, omega, eps_in, window),
                         rayleigh_cross_section(atom, a, omega, eps_in, window),
                         polarizability(atom, a, omega, eps_in, window))


def find_magic_wavelength(atom: AtomSpec, s_plus: Sublevel, s_minus: Sublevel, eps_in,
                          bracket, tol_nm: float = 1e-4, window=None) -> float:
    """Wavelength (m) inside ``bracket`` (m) where the two polarizabilities cancel."""
    def f(lam):
        w = C.wavelength_to_omega(lam)
        return (polarizability(atom, s_plus, w, eps_in, window)
                + polarizability(atom, s_minus, w, eps_in, window))

    lo, hi = sorted(bracket)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoSignChange(
            f"alpha sum has the same sign at {lo*1e9:.4f} nm and {hi*1e9:.4f} nm")
    while (hi - lo) > tol_nm * 1e-9:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def response_sweep(atom: AtomSpec, a: Sublevel, eps_in, lambda_min: float, lambda_max: float,
                   n_points: int, window=None) -> list:
    """ResponsePoints on a uniform wavelength grid; points inside resonance windows are dropped."""
    if n_points < 1:
        raise ValueError("n_points must be >= 1")
    lams = [lambda_min] if n_points == 1 else np.linspace(lambda_min, lambda_max, n_points)
    out = []
    for lam in lams:
        try:
            out.append(response_point(atom, a, C.wavelength_to_omega(float(lam)), eps_in, window))
        except ResonanceProximity:
            continue
    return out


SWEEP_HEADER = ("lambda_nm", "sigma_raman_m2", "sigma_rayleigh_m2", "alpha_SI")


def write_sweep_csv(points, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for p in sorted(points, key=lambda p: p.wavelength):
        w.writerow([f"{p.wavelength * 1e9:.6f}", f"{p.sigma_raman:.9e}",
                    f"{p.sigma_rayleigh:.9e}", f"{p.alpha:.9e}"])
