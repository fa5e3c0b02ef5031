"""optlattice command-line interface.

Configuration is one TOML file whose keys carry unit suffixes (``a_um``,
``U_L_uK``, ``Delta1_THz`` ...).  ``--set section.key=value`` overrides
single keys.  Every result is computed before any file is written, so a
failing run leaves the output directory untouched.
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import math
import os
import sys
import tempfile
import warnings
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import atomic_data, budget, lattice, microwave_gate as mw, propagator, raman_gate as rg, response
from . import constants as C
from .errors import AtomDataError, OptLatticeError, ValidityWarning

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 2, 3

DEFAULTS = {
    "atom": {"path": ""},
    "lattice": {"a_um": 5.0, "U_L_uK": 200.0, "lambda_L_nm": 800.0, "detuning_side": "blue",
                "sites_per_axis": 100, "dimensions": 3},
    "storage": {"N": 1e6, "n_A": 100.0, "T_1_us": 76.0},
    "sweep": {"lambda_min_nm": 700.0, "lambda_max_nm": 1000.0, "n_points": 301,
              "F": 3, "m_F": 0, "q": 1, "window_GHz": 0.0},
    "budget": {"gate": "raman"},
    "raman": {"a_um": 10.0, "U_L_uK": 500.0, "P_R_mW": 10.0, "w0_um": 5.0, "Delta1_THz": 5.0,
              "lambda_R_nm": 894.0, "eta": 0.5, "tau_ns": 34.9, "n_x": 0, "n_y": 0},
    "microwave": {"Delta_ac_per_s": 2e5, "w0_um": 1.2, "lambda_M_nm": 880.0, "T_1_us": 76.0,
                  "Omega_1_per_s": 41341.0, "delta_T_s": 1e-10, "delta_x_um": 0.01,
                  "sim_heating": -1.0, "sim_position_heating": -1.0},
    "optimize": {"P_max_mW": 10.0, "a_max_um": 10.0, "U_L_max_uK": 500.0, "Delta1_max_THz": 5.0,
                 "w0_min_um": 0.5, "w0_max_um": 50.0, "a_min_um": 1.0, "U_L_min_uK": 10.0,
                 "n_starts": 16},
    "surface": {"a_min_um": 4.0, "a_max_um": 12.0, "n_a": 17, "w0_min_um": 3.0, "w0_max_um": 8.0,
                "n_w0": 21, "U_L_uK": 500.0, "Delta1_THz": 5.0, "P_R_mW": 10.0},
    "simulate": {"n_points": 512, "delta_x_um": 0.0, "variant": "simultaneous",
                 "calibration": "motional", "tolerance": 1e-10, "snapshot_times_us": []},
    "scaling": {"scenarios": ["raman_3d", "raman_2d_large", "raman_2d_small", "microwave_3d"],
                "raman_gate_time_ns": 0.5, "raman_gate_epg": 1e-5, "microwave_gate_epg": 7e-5,
                "power_flag_W": 500.0, "n_A_model": "per_plane", "n_A_constant": 100.0,
                "gate_kind": "raman", "gate_epg": 1e-5, "gate_time_ns": 0.5},
}


class ConfigError(Exception):
    pass


# -- configuration -----------------------------------------------------------

def _parse_value(text: str):
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def _merge(base: dict, over: dict, where: str):
    for key, val in over.items():
        if key not in base:
            raise ConfigError(f"unknown config key {where}{key}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ConfigError(f"{where}{key} must be a table")
            _merge(base[key], val, f"{where}{key}.")
        else:
            ref = base[key]
            if isinstance(ref, float) and isinstance(val, int) and not isinstance(val, bool):
                val = float(val)
            if isinstance(ref, list):
                if not isinstance(val, list):
                    val = [val]
            elif type(val) is not type(ref):
                raise ConfigError(f"{where}{key}: expected {type(ref).__name__}, got {val!r}")
            base[key] = val


def load_config(path=None, overrides=()) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {p} does not exist")
        try:
            doc = tomllib.loads(p.read_text())
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{p}: {exc}") from exc
        _merge(cfg, doc, "")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, text = item.split("=", 1)
        parts = key.strip().split(".")
        if len(parts) != 2:
            raise ConfigError(f"--set key must look like section.key, got {key!r}")
        _merge(cfg, {parts[0]: {parts[1]: _parse_value(text.strip())}}, "")
    atom_path = cfg["atom"]["path"]
    if atom_path and not Path(atom_path).is_file():
        raise ConfigError(f"atom data file {atom_path} does not exist")
    return cfg


def _atom(cfg):
    path = cfg["atom"]["path"]
    if path and not Path(path).is_file():
        raise ConfigError(f"atom data file {path} does not exist")
    return atomic_data.load_atom_spec(path) if path else atomic_data.load_cs133()


def _thz(x):
    return 2 * math.pi * x * 1e12


def _lattice_cfg(sec, **over):
    d = dict(sec, **over)
    return lattice.LatticeConfig(d["a_um"] * 1e-6, C.uK_to_J(d["U_L_uK"]), d["lambda_L_nm"] * 1e-9,
                                 d["detuning_side"], int(d["sites_per_axis"]), int(d["dimensions"]))


def _raman(sec):
    cfg = rg.RamanGateConfig.from_power(sec["P_R_mW"] * 1e-3, sec["w0_um"] * 1e-6,
                                        _thz(sec["Delta1_THz"]), lambda_R=sec["lambda_R_nm"] * 1e-9,
                                        eta=sec["eta"], tau=sec["tau_ns"] * 1e-9)
    lat_cfg = lattice.LatticeConfig(sec["a_um"] * 1e-6, C.uK_to_J(sec["U_L_uK"]))
    return cfg, lat_cfg, rg.MotionalState(int(sec["n_x"]), int(sec["n_y"]))


def _microwave(sec):
    return mw.MicrowaveGateConfig.recommended(
        Delta_ac=sec["Delta_ac_per_s"], w0=sec["w0_um"] * 1e-6, T_1=sec["T_1_us"] * 1e-6,
        Omega_1=sec["Omega_1_per_s"], lambda_M=sec["lambda_M_nm"] * 1e-9,
        delta_T=sec["delta_T_s"], delta_x=sec["delta_x_um"] * 1e-6)


def _storage(sec):
    return lattice.StorageContext(sec["N"], sec["n_A"], sec["T_1_us"] * 1e-6)


# -- rendering -----------------------------------------------------------------

def _table(header, rows) -> str:
    cols = [header] + rows
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    out = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cols]
    out.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- subcommands (each returns {filename: text}) ----------------------------------

def cmd_sweep(cfg, seed):
    atom = _atom(cfg)
    s = cfg["sweep"]
    state = atom.sublevel(atom.ground.label, s["F"], s["m_F"])
    # 0 keeps the default exclusion of 100 natural linewidths around each resonance
    window = 2 * math.pi * s["window_GHz"] * 1e9 if s["window_GHz"] > 0 else None
    pts = response.response_sweep(atom, state, s["q"], s["lambda_min_nm"] * 1e-9,
                                  s["lambda_max_nm"] * 1e-9, int(s["n_points"]), window)
    buf = io.StringIO()
    response.write_sweep_csv(pts, buf)
    return {"sweep.csv": buf.getvalue()}


def _raman_budget(cfg):
    gate, lat_cfg, motion = _raman(cfg["raman"])
    bd = rg.total_raman_epg(gate, lat_cfg, motion)
    rows = [(rg.LABELS[k], f"{v:.3e}", "") for k, v in bd.rows.items()]
    doc = {"gate": "raman", "rows": [{"mechanism": k, "label": rg.LABELS[k], "formula": v}
                                     for k, v in bd.rows.items()],
           "total": bd.total, "Omega_R": float(gate.Omega_R)}
    return rows, bd.total, doc


def _microwave_budget(cfg, atom):
    gate = _microwave(cfg["microwave"])
    lat_cfg = _lattice_cfg(cfg["lattice"])
    ctx = _storage(cfg["storage"])
    sim = {}
    if cfg["microwave"]["sim_heating"] >= 0:
        sim["heating"] = cfg["microwave"]["sim_heating"]
    if cfg["microwave"]["sim_position_heating"] >= 0:
        sim["position_heating"] = cfg["microwave"]["sim_position_heating"]
    formula = mw.total_microwave_epg(gate, lat_cfg, ctx)
    combined = mw.total_microwave_epg(gate, lat_cfg, ctx, sim)
    state = atom.sublevel(atom.ground.label, 3, 0)
    rate = lattice.storage_scatter_rate(lat_cfg, atom, state)
    storage = lattice.storage_epg(rate, ctx)
    rows = [(mw.LABELS[k], f"{v:.3e}", f"{sim[k]:.3e}" if k in sim else "")
            for k, v in formula.rows.items()]
    rows.append(("Lattice light Raman scattering (storage)", f"{storage:.3e}", ""))
    doc = {"gate": "microwave",
           "rows": [{"mechanism": k, "label": mw.LABELS[k], "formula": v,
                     "simulation": sim.get(k)} for k, v in formula.rows.items()],
           "total": combined.total, "total_formula": formula.total,
           "storage": {"scatter_rate": rate, "epg": storage}}
    return rows, combined.total, doc


def cmd_budget(cfg, seed):
    gate = cfg["budget"]["gate"]
    if gate == "raman":
        rows, total, doc = _raman_budget(cfg)
    elif gate == "microwave":
        rows, total, doc = _microwave_budget(cfg, _atom(cfg))
    else:
        raise ConfigError("budget.gate must be 'raman' or 'microwave'")
    text = _table(("Source", "Formula value", "Simulation value"), rows)
    text += f"\nTotal gate EPG: {total:.3e}\n"
    return {f"budget_{gate}.txt": text, f"budget_{gate}.json": _dump(doc)}


def _box(sec):
    return budget.OptimizationBox(
        P_max=sec["P_max_mW"] * 1e-3, a_max=sec["a_max_um"] * 1e-6,
        U_L_max=C.uK_to_J(sec["U_L_max_uK"]), Delta1_max=_thz(sec["Delta1_max_THz"]),
        w0_range=(sec["w0_min_um"] * 1e-6, sec["w0_max_um"] * 1e-6),
        a_min=sec["a_min_um"] * 1e-6, U_L_min=C.uK_to_J(sec["U_L_min_uK"]))


def cmd_optimize(cfg, seed):
    sec = cfg["optimize"]
    opt = budget.minimize_raman_epg(_box(sec), seed=seed, n_starts=int(sec["n_starts"]))
    p = opt.params
    rows = [("a (um)", f"{p['a'] * 1e6:.4f}"), ("w0 (um)", f"{p['w0'] * 1e6:.4f}"),
            ("Delta_1/2pi (THz)", f"{p['Delta_1'] / (2 * math.pi * 1e12):.4f}"),
            ("U_L (uK)", f"{C.J_to_uK(p['U_L']):.3f}"), ("|Omega_R| (rad/s)", f"{p['Omega_R']:.4e}"),
            ("EPG", f"{opt.epg:.4e}"), ("certified", str(opt.certified))]
    rows += [(rg.LABELS[k], f"{v:.3e}") for k, v in opt.breakdown.items()]
    return {"optimum.txt": _table(("Quantity", "Value"), rows), "optimum.json": _dump(opt.as_dict())}


def cmd_surface(cfg, seed):
    s = cfg["surface"]
    a = np.linspace(s["a_min_um"], s["a_max_um"], int(s["n_a"])) * 1e-6
    w0 = np.linspace(s["w0_min_um"], s["w0_max_um"], int(s["n_w0"])) * 1e-6
    if len(a) < 1 or len(w0) < 1:
        raise ConfigError("surface grid must have at least one point per axis")
    surf = budget.epg_surface(a, w0, C.uK_to_J(s["U_L_uK"]), _thz(s["Delta1_THz"]), s["P_R_mW"] * 1e-3)
    buf = io.StringIO()
    budget.write_surface_csv(a, w0, surf, buf)
    return {"surface.csv": buf.getvalue()}


def cmd_simulate(cfg, seed):
    s = cfg["simulate"]
    lat_cfg = _lattice_cfg(cfg["lattice"])
    gate = _microwave(cfg["microwave"])
    grid = propagator.default_grid(lat_cfg, int(s["n_points"]))
    setup = propagator.build_microwave_gate(lat_cfg, gate, grid, s["delta_x_um"] * 1e-6,
                                            s["variant"], s["calibration"])
    times = [float(t) * 1e-6 for t in s["snapshot_times_us"]]
    res = propagator.simulate_gate(setup, s["tolerance"], times)
    doc = dict(res.as_dict(), delta_x_m=s["delta_x_um"] * 1e-6, n_points=grid.n_points,
               duration_s=setup.schedule.duration, snapshot_times_s=[t for t, _ in res.snapshots])
    files = {"gate_result.json": _dump(doc)}
    for k, (t, dens) in enumerate(res.snapshots):
        buf = io.StringIO()
        propagator.write_snapshot_csv(grid, dens, buf)
        files[f"snapshot_{k:02d}.csv"] = buf.getvalue()
    return files


def _scenarios(cfg):
    s = cfg["scaling"]
    raman_t = s["raman_gate_time_ns"] * 1e-9
    presets = {
        "raman_3d": (budget.ScalingScenario(lattice.LatticeConfig(10e-6, C.uK_to_J(500), 851.7e-9,
                                                                  "blue", 100, 3), "raman", "per_plane"),
                     s["raman_gate_epg"], raman_t),
        "raman_2d_large": (budget.ScalingScenario(lattice.LatticeConfig(10e-6, C.uK_to_J(500), 851.7e-9,
                                                                        "blue", 1000, 2), "raman", "all"),
                           s["raman_gate_epg"], raman_t),
        "raman_2d_small": (budget.ScalingScenario(lattice.LatticeConfig(10e-6, C.uK_to_J(500), 851.7e-9,
                                                                        "blue", 100, 2), "raman", "all"),
                           s["raman_gate_epg"], raman_t),
        "microwave_3d": (budget.ScalingScenario(lattice.LatticeConfig(5e-6, C.uK_to_J(200), 800e-9,
                                                                      "blue", 100, 3), "microwave",
                                                "constant", 100.0),
                         s["microwave_gate_epg"], cfg["microwave"]["T_1_us"] * 1e-6),
    }
    out = []
    for name in s["scenarios"]:
        if name == "custom":
            sc = budget.ScalingScenario(_lattice_cfg(cfg["lattice"]), s["gate_kind"], s["n_A_model"],
                                        s["n_A_constant"])
            out.append((name, sc, s["gate_epg"], s["gate_time_ns"] * 1e-9))
        elif name in presets:
            out.append((name,) + presets[name])
        else:
            raise ConfigError(f"unknown scaling scenario {name!r}")
    return out


def cmd_scaling(cfg, seed):
    atom = _atom(cfg)
    flag_W = cfg["scaling"]["power_flag_W"]
    text, doc = [], {}
    for name, sc, epg, t in _scenarios(cfg):
        rep = budget.scaling_report(sc, epg, t, atom, power_flag_W=flag_W)
        text.append(f"[{name}]\n" + rep.to_text())
        doc[name] = rep.as_dict()
    return {"scaling.txt": "\n".join(text), "scaling.json": _dump(doc)}


COMMANDS = {"sweep": cmd_sweep, "budget": cmd_budget, "optimize": cmd_optimize,
            "surface": cmd_surface, "simulate": cmd_simulate, "scaling": cmd_scaling}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="optlattice",
                                description="Error budgets and scaling for addressable optical-lattice qubits.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="TOML run configuration")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("--seed", type=int, default=0, help="optimizer seed (u64)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key, e.g. lattice.a_um=10 (repeatable)")
    return p


def _write_all(out: Path, files: dict):
    """Stage every file under a temporary name, then rename them into place."""
    out.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=out)
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out / name))
    except OSError:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, dest in staged:
        os.replace(tmp, dest)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed % (2 ** 32)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            files = COMMANDS[args.command](cfg, seed)
    except (ConfigError, AtomDataError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OptLatticeError as exc:
        print(f"computation error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(args.out)
    try:
        _write_all(out, files)
    except OSError as exc:
        print(f"error writing {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name in files:
        print(out / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
