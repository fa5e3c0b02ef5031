import math
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from optlattice import constants as C
from optlattice import response as R
from optlattice.atomic_data import sublevels
from optlattice.errors import NoSignChange, ResonanceProximity
from oracles import NaiveAtom


@pytest.fixture(scope="module")
def naive(cs):
    return NaiveAtom(cs)


def _lines_nm(cs):
    return [C.omega_to_wavelength(l.upper.energy - l.lower.energy) * 1e9 for l in cs.lines]


def _samples(cs, n, seed):
    rng = random.Random(seed)
    ground = sublevels(cs, cs.ground)
    lines = _lines_nm(cs)
    out = []
    while len(out) < n:
        lam = rng.uniform(500.0, 1500.0)
        if min(abs(lam - l) for l in lines) < 0.05:
            continue
        out.append((rng.choice(ground), C.wavelength_to_omega(lam * 1e-9), rng.choice((-1, 0, 1))))
    return out


def test_oracle_equivalence_100_samples(cs, naive):
    for a, w, q in _samples(cs, 100, 2024):
        ia = naive.index(a.F.value, a.m_F.value)
        ref_raman = sum(naive.cross_section(ia, ib, w, q) for ib in range(len(naive.ground)) if ib != ia)
        assert R.raman_cross_section(cs, a, w, q) == pytest.approx(ref_raman, rel=1e-10)
        assert R.rayleigh_cross_section(cs, a, w, q) == pytest.approx(naive.cross_section(ia, ia, w, q),
                                                                      rel=1e-10)
        assert R.polarizability(cs, a, w, q) == pytest.approx(naive.polarizability(ia, w, q), rel=1e-10)


def test_oracle_equivalence_single_channels(cs, naive):
    # individual channels can be suppressed by cancellation, so compare against
    # the scale of the uncancelled Rayleigh amplitude for the same state
    ground = sublevels(cs, cs.ground)
    for a, w, q in _samples(cs, 20, 99):
        ia = naive.index(a.F.value, a.m_F.value)
        scale = naive.cross_section(ia, ia, w, q) + R.raman_cross_section(cs, a, w, q)
        for b in ground:
            ib = naive.index(b.F.value, b.m_F.value)
            assert abs(R.cross_section(cs, a, b, w, q) - naive.cross_section(ia, ib, w, q)) <= 1e-12 * scale


def test_rayleigh_matches_classical_far_red(cs, clock_state):
    # far below resonance the Rayleigh cross section is (8pi/3) (omega^2 alpha / (4 pi eps0 c^2))^2
    w = C.wavelength_to_omega(10e-6)
    alpha = R.polarizability(cs, clock_state, w, 0)
    classical = 8 * math.pi / 3 * (w ** 2 * alpha / (4 * math.pi * C.epsilon_0 * C.c ** 2)) ** 2
    assert R.rayleigh_cross_section(cs, clock_state, w, 0) == pytest.approx(classical, rel=1e-3)


@given(lam=st.floats(600e-9, 1200e-9), q=st.sampled_from((-1, 0, 1)), idx=st.integers(0, 15))
def test_cross_sections_non_negative(cs, lam, q, idx):
    a = sublevels(cs, cs.ground)[idx]
    try:
        p = R.response_point(cs, a, C.wavelength_to_omega(lam), q)
    except ResonanceProximity:
        return
    assert p.sigma_raman >= 0 and p.sigma_rayleigh >= 0
    assert np.isfinite(p.alpha) and isinstance(p.alpha, float)


def test_polarizability_sign_flips_across_each_line(cs, clock_state):
    for line in cs.lines:
        w0 = line.upper.energy - line.lower.energy
        # hyperfine structure spans ~10 GHz; step well outside it
        off = 2 * math.pi * 100e9
        below = R.polarizability(cs, clock_state, w0 - off, 0)
        above = R.polarizability(cs, clock_state, w0 + off, 0)
        assert below > 0 > above


def test_resonance_window_raises(cs, clock_state):
    f3 = cs.sublevel("6S1/2", 3, 0)
    e = sublevels(cs, cs.level("6P3/2"))[0]
    w = e.absolute_energy - f3.absolute_energy
    with pytest.raises(ResonanceProximity):
        R.polarizability(cs, clock_state, w + 1e6, 0)
    # a narrower custom window admits the same frequency
    R.polarizability(cs, clock_state, w + 1e6, 0, window=1e3)


def test_bad_polarization(cs, clock_state):
    with pytest.raises(ValueError):
        R.polarizability(cs, clock_state, 2e15, 2)


def test_sweep_monotone_and_gaps(cs, clock_state, tmp_path):
    pts = R.response_sweep(cs, clock_state, 1, 840e-9, 900e-9, 601)
    lams = [p.wavelength for p in pts]
    assert all(np.diff(lams) > 0)
    full = R.response_sweep(cs, clock_state, 1, 840e-9, 900e-9, 601, window=2 * math.pi * 1e12)
    # a 1 THz window removes a band around each of the two D lines
    assert len(pts) == 601
    assert 601 - len(full) > 2


def test_magic_wavelength_and_opposite_signs(cs):
    sp = cs.sublevel("6S1/2", 3, 1)
    sm = cs.sublevel("6S1/2", 4, 1)
    lam = R.find_magic_wavelength(cs, sp, sm, 1, (870e-9, 890e-9))
    assert lam == pytest.approx(880e-9, abs=2e-9)
    w = C.wavelength_to_omega(lam)
    a1, a2 = R.polarizability(cs, sp, w, 1), R.polarizability(cs, sm, w, 1)
    assert np.sign(a1) == -np.sign(a2)
    assert abs(a1) == pytest.approx(2.5e-38, rel=0.2)


def test_magic_wavelength_needs_bracket(cs):
    sp = cs.sublevel("6S1/2", 3, 1)
    sm = cs.sublevel("6S1/2", 4, 1)
    with pytest.raises(NoSignChange):
        R.find_magic_wavelength(cs, sp, sm, 1, (700e-9, 720e-9))


def test_bit_flip_fraction_roughly_half(cs, clock_state):
    qubits = [cs.sublevel("6S1/2", 3, 0), cs.sublevel("6S1/2", 4, 0)]
    part = R.raman_partition(cs, clock_state, C.wavelength_to_omega(800e-9), 1, qubits)
    assert 0.3 < part["bit_flip_fraction"] < 0.7


def test_sweep_csv_header(cs, clock_state):
    import io
    buf = io.StringIO()
    R.write_sweep_csv(R.response_sweep(cs, clock_state, 1, 800e-9, 810e-9, 3), buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(R.SWEEP_HEADER)
    assert len(lines) == 4
