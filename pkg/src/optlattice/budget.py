"""System-level analysis: Raman EPG minimization, error surface, cross-talk, scaling."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from . import constants as C
from . import lattice as lat
from . import raman_gate as rg
from .errors import NonFinite, ValidityWarning

DELTA1_FLOOR = 2 * math.pi * 50e9


@dataclass(frozen=True)
class OptimizationBox:
    P_max: float = 10e-3  # W
    a_max: float = 10e-6  # m
    U_L_max: float = C.uK_to_J(500.0)  # J
    Delta1_max: float = 2 * math.pi * 5e12  # rad/s
    w0_range: tuple = (0.5e-6, 50e-6)
    a_min: float = 1e-6
    U_L_min: float = C.uK_to_J(10.0)
    Delta1_min: float = DELTA1_FLOOR

    def __post_init__(self):
        vals = (self.P_max, self.a_max, self.U_L_max, self.Delta1_max, *self.w0_range,
                self.a_min, self.U_L_min, self.Delta1_min)
        if any(not v > 0 for v in vals):
            raise ValueError("all box bounds must be positive")
        if not (self.a_min < self.a_max and self.U_L_min < self.U_L_max
                and self.Delta1_min < self.Delta1_max and self.w0_range[0] < self.w0_range[1]):
            raise ValueError("box bounds must be ordered (min < max)")

    def log_bounds(self) -> np.ndarray:
        # order: a, w0, Delta_1, U_L
        return np.log([[self.a_min, self.a_max], list(self.w0_range),
                       [self.Delta1_min, self.Delta1_max], [self.U_L_min, self.U_L_max]])


PARAM_NAMES = ("a", "w0", "Delta_1", "U_L")


def raman_point(a, w0, Delta_1, U_L, P_R, motional=rg.GROUND):
    """Total Raman EPG breakdown with Omega_R fixed by the beam power."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        cfg = rg.RamanGateConfig.from_power(P_R, w0, Delta_1)
        return cfg, rg.total_raman_epg(cfg, lat.LatticeConfig(a, U_L), motional)


@dataclass
class Optimum:
    params: dict
    epg: float
    breakdown: dict
    certified: bool
    starts: int
    seed: int

    def as_dict(self) -> dict:
        return asdict(self)


def _to_box(y, lb):
    # sin transform keeps every simplex vertex inside the box and reaches the bounds exactly
    return lb[:, 0] + (lb[:, 1] - lb[:, 0]) * (1 + np.sin(y)) / 2


def _from_box(logx, lb):
    s = 2 * (logx - lb[:, 0]) / (lb[:, 1] - lb[:, 0]) - 1
    return np.arcsin(np.clip(s, -1, 1))


def _objective(logx, P_R):
    a, w0, d1, U = np.exp(logx)
    total = raman_point(a, w0, d1, U, P_R)[1].total
    if not math.isfinite(total) or total <= 0:
        raise NonFinite(f"EPG is not finite at a={a:.3e}, w0={w0:.3e}, Delta_1={d1:.3e}, U_L={U:.3e}")
    return math.log(total)


def certify(logx, lb, P_R, step=0.02, tol=0.005) -> bool:
    """True if no +-2% coordinate move (clipped to the box) improves the EPG by more than 0.5%."""
    base = math.exp(_objective(logx, P_R))
    for k in range(len(logx)):
        for sgn in (-1, 1):
            trial = logx.copy()
            trial[k] = np.clip(trial[k] + sgn * math.log1p(step), lb[k, 0], lb[k, 1])
            if math.exp(_objective(trial, P_R)) < base * (1 - tol):
                return False
    return True


def minimize_raman_epg(box: OptimizationBox, seed: int = 0, n_starts: int = 16) -> Optimum:
    """Multi-start Nelder-Mead in log-parameter space at P_R = P_max."""
    lb = box.log_bounds()
    P_R = box.P_max
    starts = qmc.LatinHypercube(d=4, seed=seed).random(n_starts)
    results = []
    for u in starts:
        logx0 = lb[:, 0] + u * (lb[:, 1] - lb[:, 0])
        y0 = _from_box(logx0, lb)
        res = minimize(lambda y: _objective(_to_box(y, lb), P_R), y0, method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 4000, "maxfev": 8000})
        logx = _to_box(res.x, lb)
        results.append((float(res.fun), tuple(np.round(logx, 12)), logx))
    results.sort(key=lambda r: (r[0], r[1]))
    _, _, best = results[0]
    a, w0, d1, U = np.exp(best)
    cfg, bd = raman_point(a, w0, d1, U, P_R)
    params = {"a": float(a), "w0": float(w0), "Delta_1": float(d1), "U_L": float(U),
              "Omega_R": float(cfg.Omega_R)}
    return Optimum(params, bd.total, dict(bd.rows), certify(best, lb, P_R), n_starts, seed)


def epg_surface(a_grid, w0_grid, U_L, Delta_1, P_R) -> np.ndarray:
    """EPG[i, j] at a_grid[i], w0_grid[j]."""
    out = np.empty((len(a_grid), len(w0_grid)))
    for i, a in enumerate(a_grid):
        for j, w0 in enumerate(w0_grid):
            out[i, j] = raman_point(a, w0, Delta_1, U_L, P_R)[1].total
    return out


def write_surface_csv(a_grid, w0_grid, surface, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["a_m", "w0_m", "epg"])
    for i, a in enumerate(a_grid):
        for j, w0 in enumerate(w0_grid):
            w.writerow([f"{a:.9e}", f"{w0:.9e}", f"{surface[i, j]:.9e}"])


@dataclass(frozen=True)
class CrossTalkModel:
    falloff_exponent: int = 6
    threshold: float = 1e-6

    def __post_init__(self):
        if self.falloff_exponent not in (6, 12):
            raise ValueError("falloff_exponent must be 6 or 12")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")


def crosstalk_density(model: CrossTalkModel, reference_epg_at_1_site: float = 1.0) -> dict:
    """Closest allowed spacing between simultaneous two-qubit gates in a 3D lattice.

    ``atoms_per_gate`` is the volume R^3 of the exclusion cube with R taken
    at the exact threshold crossing; ``min_separation_sites`` rounds R up.
    """
    ratio = reference_epg_at_1_site / model.threshold
    if ratio <= 1:
        return {"min_separation_sites": 1, "atoms_per_gate": 1, "separation_exact": 1.0}
    r = ratio ** (1 / model.falloff_exponent)
    return {"min_separation_sites": int(math.ceil(r - 1e-9)),
            "atoms_per_gate": int(round(r ** 3)), "separation_exact": r}


N_A_MODELS = ("constant", "per_row", "per_plane", "all")


@dataclass(frozen=True)
class ScalingScenario:
    lattice: lat.LatticeConfig
    gate_kind: str = "raman"
    n_A_model: str = "per_plane"
    n_A_constant: float = 100.0

    def __post_init__(self):
        if self.gate_kind not in ("raman", "microwave"):
            raise ValueError("gate_kind must be 'raman' or 'microwave'")
        if self.n_A_model not in N_A_MODELS:
            raise ValueError(f"n_A_model must be one of {N_A_MODELS}")

    @property
    def dimensions(self) -> int:
        return self.lattice.dimensions

    @property
    def sites_per_axis(self) -> int:
        return self.lattice.sites_per_axis

    def n_A(self) -> float:
        N = self.lattice.n_sites
        d = self.dimensions
        return {"constant": min(self.n_A_constant, N), "per_row": N ** (1 / d),
                "per_plane": N ** ((d - 1) / d) if d == 3 else N, "all": N}[self.n_A_model]


@dataclass
class ScalingReport:
    qubits: int
    power_per_beam_set_W: float
    power_flag: str
    n_A: float
    scatter_rate_per_axis: float
    scatter_rate: float
    storage_epg: float
    gate_epg: float
    gate_time: float
    steps_to_failure: float
    gates_per_qubit: float
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        rows = [
            ("qubits", f"{self.qubits:d}"),
            ("power per beam set (W)", f"{self.power_per_beam_set_W:.3g}  [calibrated to 10 W / 100^3 anchor]"),
            ("power flag", self.power_flag),
            ("addressable qubits n_A", f"{self.n_A:.4g}"),
            ("lattice scatter rate per axis (1/s)", f"{self.scatter_rate_per_axis:.3e}"),
            ("lattice scatter rate per atom (1/s)", f"{self.scatter_rate:.3e}"),
            ("storage EPG", f"{self.storage_epg:.3e}"),
            ("gate EPG", f"{self.gate_epg:.3e}"),
            ("gate time (s)", f"{self.gate_time:.3e}"),
            ("lifetime (time-steps)", f"{self.steps_to_failure:.3e}"),
            ("gates per qubit", f"{self.gates_per_qubit:.3e}"),
        ]
        width = max(len(k) for k, _ in rows)
        lines = [f"{k:<{width}}  {v}" for k, v in rows]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) + "\n"


def scaling_report(scenario: ScalingScenario, gate_epg: float, gate_time: float, atom,
                   qubit_state=None, power_flag_W: float = 500.0) -> ScalingReport:
    """Combine storage scattering, laser power and addressability for one scenario.

    The per-atom scatter rate sums the single-axis rate over the lattice's
    standing-wave axes; the storage EPG and lifetime use that total.
    """
    if gate_time <= 0:
        raise ValueError("gate_time must be positive")
    cfg = scenario.lattice
    s = qubit_state or atom.sublevel(atom.ground.label, 3, 0)
    per_axis = lat.storage_scatter_rate(cfg, atom, s)
    rate = lat.lattice_scatter_rate(cfg, atom, s)
    N = cfg.n_sites
    n_A = scenario.n_A()
    power = lat.lattice_power_required(cfg, atom, s)
    storage = lat.storage_epg(rate, lat.StorageContext(N, n_A, gate_time))
    steps = 1.0 / (rate * gate_time)
    notes = []
    flag = "kilowatt-scale" if power >= power_flag_W else "ok"
    if storage > gate_epg:
        notes.append("storage errors exceed the gate error")
    return ScalingReport(N, power, flag, n_A, per_axis, rate, storage, gate_epg, gate_time,
                         steps, steps * n_A / N, notes)
