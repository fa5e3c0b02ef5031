"""Acceptance criteria 1-8, each at its stated tolerance and runtime.

Every criterion prints one PASS/FAIL line in the terminal summary.
"""

import cmath
import json
import math
import random
import time

import numpy as np
import pytest

import test_propagator as tp
from optlattice import budget as B
from optlattice import cli
from optlattice import constants as C
from optlattice import microwave_gate as mw
from optlattice import propagator as P
from optlattice import raman_gate as rg
from optlattice import response as R
from optlattice.angular import wigner_3j, wigner_6j
from optlattice.atomic_data import sublevels
from optlattice.lattice import LatticeConfig
from oracles import NaiveAtom, dense_propagate, racah_3j, racah_6j

RESULTS = {}


@pytest.fixture(scope="module", autouse=True)
def report(request):
    yield
    tr = request.config.pluginmanager.get_plugin("terminalreporter")
    if tr is None:
        return
    tr.write_line("")
    tr.write_line("acceptance criteria:")
    for k in sorted(RESULTS):
        ok, detail = RESULTS[k]
        tr.write_line(f"  criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


class Check:
    """Collects named conditions and records one verdict for the criterion."""

    def __init__(self, number, budget_s):
        self.number, self.budget_s = number, budget_s
        self.failures, self.notes = [], []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def that(self, cond, label):
        self.notes.append(label)
        if not cond:
            self.failures.append(label)

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        if exc_type is None:
            self.that(elapsed < self.budget_s, f"runtime {elapsed:.2f} s < {self.budget_s:g} s")
        else:
            self.failures.append(f"{exc_type.__name__}: {exc}")
        shown = self.failures or self.notes
        RESULTS[self.number] = (not self.failures, "; ".join(shown))
        if exc_type is None:
            assert not self.failures, "; ".join(self.failures)
        return False


def within(x, ref, rel):
    return abs(x - ref) <= rel * abs(ref)


def _run(command, *overrides):
    cfg = cli.load_config(None, overrides)
    return cli.COMMANDS[command](cfg, 0)


def test_criterion_1_storage_scatter_rate():
    with Check(1, 1.0) as c:
        files = _run("budget", "budget.gate='microwave'")
        rate = json.loads(files["budget_microwave.json"])["storage"]["scatter_rate"]
        c.that(within(rate, 2.2e-4, 0.25), f"rate {rate:.3e} /s vs 2.2e-4 +-25%")


def test_criterion_2_magic_wavelength(cs):
    with Check(2, 1.0) as c:
        sp, sm = cs.sublevel("6S1/2", 3, 1), cs.sublevel("6S1/2", 4, 1)
        lam = R.find_magic_wavelength(cs, sp, sm, 1, (870e-9, 890e-9))
        w = C.wavelength_to_omega(lam)
        a1, a2 = R.polarizability(cs, sp, w, 1), R.polarizability(cs, sm, w, 1)
        c.that(abs(lam - 880e-9) <= 2e-9, f"lambda_M {lam * 1e9:.3f} nm vs 880 +-2")
        c.that(within(abs(a1), 2.5e-38, 0.2), f"|alpha| {abs(a1):.3e} vs 2.5e-38 +-20%")
        c.that(np.sign(a1) == -np.sign(a2), "opposite signs")


def test_criterion_3_table_two_rows():
    with Check(3, 1.0) as c:
        files = _run("budget", "budget.gate='microwave'")
        rows = {r["mechanism"]: r["formula"] for r in json.loads(files["budget_microwave.json"])["rows"]}
        g, lat = mw.table_config(), LatticeConfig(5e-6, C.uK_to_J(200.0))
        single = mw.p_position_heating(g, lat, legs="single")
        for name, got, ref in (("P_mo", rows["off_resonant"], 4.3e-8), ("P_ms", rows["scatter"], 5.2e-5),
                               ("P_mph single", single, 1.3e-6),
                               ("P_mph full", rows["position_heating"], 7.8e-6)):
            c.that(within(got, ref, 0.05), f"{name} {got:.3e} vs {ref:.1e} +-5%")


def test_criterion_4_gate_simulation():
    with Check(4, 600.0) as c:
        lat = LatticeConfig(5e-6, C.uK_to_J(200.0))
        grid = P.default_grid(lat, 512)
        for dx, ref in ((0.0, 1e-6), (0.01e-6, 2e-5)):
            r = P.simulate_gate(P.build_microwave_gate(lat, mw.table_config(), grid, dx))
            c.that(ref / 3 <= r.error <= 3 * ref, f"error {r.error:.2e} at dx={dx * 1e6:g} um vs {ref:.0e} x3")
            c.that(abs(r.norm - 1) < 1e-9, f"norm deficit {abs(r.norm - 1):.1e}")
        worst = 0.0
        for seed in range(10):
            grid32, V, couplings, wf, dt = tp.random_problem(np.random.default_rng(seed))
            got = P.propagate(wf, P.DressedHamiltonian(V, couplings, C.m_Cs), dt, tolerance=1e-12)
            ref_amp, _ = dense_propagate(wf.amplitudes, V, couplings, C.m_Cs, tp.LENGTH, dt)
            worst = max(worst, tp.fidelity_deficit(got, P.MultiLevelWavefunction(ref_amp, grid32)))
        c.that(worst < 1e-9, f"32-point oracle deficit {worst:.1e} < 1e-9")


@pytest.fixture(scope="module")
def default_box_optimum():
    return B.minimize_raman_epg(B.OptimizationBox(), seed=0)


def test_criterion_5_raman_optimum():
    with Check(5, 30.0) as c:
        files = _run("optimize")
        opt = json.loads(files["optimum.json"])
        p, box = opt["params"], B.OptimizationBox()
        c.that(0.5e-5 <= opt["epg"] <= 2e-5, f"EPG {opt['epg']:.3e} vs 1e-5 x2")
        c.that(abs(p["w0"] - 5e-6) <= 0.5e-6, f"w0 {p['w0'] * 1e6:.2f} um vs 5.0 +-0.5")
        pinned = all(math.isclose(p[k], v, rel_tol=1e-6)
                     for k, v in (("a", box.a_max), ("U_L", box.U_L_max), ("Delta_1", box.Delta1_max)))
        c.that(pinned, "a, U_L, Delta_1 on their bounds")
        loose = B.OptimizationBox(P_max=10.0, a_max=1e-3, U_L_max=C.uK_to_J(1e6),
                                  Delta1_max=2 * math.pi * 1e15, w0_range=(0.5e-6, 1e-3))
        low = B.minimize_raman_epg(loose, seed=0).epg
        c.that(low > 0.5e-7, f"10 W loose-box minimum {low:.3e} > 5e-8")


def test_criterion_6_wider_spacing(default_box_optimum):
    with Check(6, 30.0) as c:
        wide = B.minimize_raman_epg(B.OptimizationBox(a_max=20e-6), seed=0)
        ratio = default_box_optimum.epg / wide.epg
        c.that(within(ratio, 3.0, 0.3), f"improvement {ratio:.2f}x vs 3 +-30%")


def test_criterion_7_scaling_report():
    with Check(7, 1.0) as c:
        doc = json.loads(_run("scaling", "scaling.scenarios=['raman_3d', 'microwave_3d']")["scaling.json"])
        r3, m3 = doc["raman_3d"], doc["microwave_3d"]
        c.that(within(r3["scatter_rate"], 0.4, 0.3), f"rate {r3['scatter_rate']:.3f} /s vs 0.4 +-30%")
        for key, ref in (("steps_to_failure", 1e9), ("gates_per_qubit", 1e7)):
            c.that(abs(math.log10(r3[key] / ref)) < 1, f"{key} {r3[key]:.2e} vs ~{ref:.0e}")
        power = m3["power_per_beam_set_W"]
        c.that(within(power, 75.0, 0.3), f"microwave power {power:.1f} W vs 75 +-30%")


def test_criterion_8_property_suites(cs):
    with Check(8, 300.0) as c:
        rng = random.Random(8)
        worst3 = worst6 = 0.0
        for _ in range(300):
            j1, j2 = rng.randint(0, 20), rng.randint(0, 20)
            j3 = rng.randrange(abs(j1 - j2), min(j1 + j2, 20) + 1, 2)
            m1, m2 = rng.randrange(-j1, j1 + 1, 2), rng.randrange(-j2, j2 + 1, 2)
            if abs(m1 + m2) > j3:
                continue
            args = tuple(x / 2 for x in (j1, j2, j3, m1, m2, -m1 - m2))
            ref = racah_3j(*args)
            if ref:
                worst3 = max(worst3, abs(wigner_3j(*args) - ref) / abs(ref))
        n6 = 0
        while n6 < 100:
            a6 = [rng.randint(0, 20) for _ in range(6)]
            ref6 = racah_6j(*(x / 2 for x in a6))
            if ref6:
                worst6 = max(worst6, abs(wigner_6j(*(x / 2 for x in a6)) - ref6) / abs(ref6))
                n6 += 1
        c.that(worst3 < 1e-12 and worst6 < 1e-12, f"3j/6j rel error {max(worst3, worst6):.1e}")

        nprng = np.random.default_rng(8)
        unit = max(np.linalg.norm((U := rg.rotation_matrix(nprng.uniform(0, 1e8) * cmath.exp(1j * nprng.uniform(-3, 3)),
                                                           nprng.uniform(-1e8, 1e8), nprng.uniform(0, 1e-6))).conj().T
                                  @ U - np.eye(2)) for _ in range(200))
        c.that(unit < 1e-12, f"rotation unitarity {unit:.1e}")

        z = nprng.normal(size=(100_000, 2)) + 1j * nprng.normal(size=(100_000, 2))
        psi = z / np.linalg.norm(z, axis=1, keepdims=True)
        theta, phi = 2.5, 0.3
        U = rg.rotation_matrix(1.0, 0.0, math.pi).conj().T @ rg.rotation_matrix(cmath.exp(1j * phi), 0.0, theta)
        mc = np.mean(np.abs(np.einsum("ni,ij,nj->n", psi.conj(), U, psi)) ** 2)
        dev = abs(mc - rg.averaged_pi_fidelity(theta, phi))
        c.that(dev < 1e-3, f"fidelity Monte-Carlo {dev:.1e}")

        naive = NaiveAtom(cs)
        ground = sublevels(cs, cs.ground)
        lines = [l.upper.energy - l.lower.energy for l in cs.lines]
        kh = 0.0
        n = 0
        while n < 100:
            w = C.wavelength_to_omega(rng.uniform(500.0, 1500.0) * 1e-9)
            if min(abs(C.omega_to_wavelength(w) - C.omega_to_wavelength(l)) for l in lines) < 0.05e-9:
                continue
            a, q = rng.choice(ground), rng.choice((-1, 0, 1))
            ia = naive.index(a.F.value, a.m_F.value)
            ref = sum(naive.cross_section(ia, ib, w, q) for ib in range(len(naive.ground)) if ib != ia)
            # a stretched state under matching circular light has no Raman channel at all
            scale = ref or naive.cross_section(ia, ia, w, q)
            kh = max(kh, abs(R.raman_cross_section(cs, a, w, q) - ref) / scale,
                     abs(R.polarizability(cs, a, w, q) - naive.polarizability(ia, w, q))
                     / abs(naive.polarizability(ia, w, q)))
            n += 1
        c.that(kh < 1e-10, f"Kramers-Heisenberg oracle {kh:.1e}")

        lat = LatticeConfig(5e-6, C.uK_to_J(200.0))
        e = [P.simulate_gate(P.build_microwave_gate(lat, mw.table_config(), P.default_grid(lat, n), 0.0)).error
             for n in (256, 512)]
        c.that(abs(e[1] - e[0]) / e[1] < 0.1, f"grid doubling change {abs(e[1] - e[0]) / e[1]:.1%}")

        expo = tp.step_time_exponent()
        c.that(0.9 <= expo <= 1.3, f"step cost exponent {expo:.2f} in [0.9, 1.3]")
