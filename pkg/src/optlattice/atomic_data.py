"""Alkali level structure: loading, validation and sublevel enumeration.

Everything is stored in SI units (rad/s, m, kg, s).  Data files may declare
other units; conversion happens once, in the loader.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import constants as C
from .angular import HalfInteger
from .errors import AtomDataError

_FREQ_UNITS = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12}
_LENGTH_UNITS = {"m": 1.0, "nm": 1e-9, "a0·e": C.a_0, "a0*e": C.a_0, "a0e": C.a_0,
                 "ea0": C.a_0}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "μs": 1e-6, "ns": 1e-9}


@dataclass(frozen=True)
class FineLevel:
    label: str
    L: int
    J: HalfInteger
    energy: float  # rad/s above the ground fine level


@dataclass(frozen=True)
class HyperfineShift:
    F: HalfInteger
    shift: float  # rad/s relative to the fine-level centroid


@dataclass(frozen=True)
class TransitionLine:
    lower: FineLevel
    upper: FineLevel
    reduced_element: float  # <J||x||J'> in m
    lifetime: float  # s


@dataclass(frozen=True)
class Sublevel:
    fine: FineLevel
    F: HalfInteger
    m_F: HalfInteger
    absolute_energy: float

    @property
    def J(self) -> HalfInteger:
        return self.fine.J

    def __str__(self):
        return f"{self.fine.label}|F={self.F},mF={self.m_F}>"


@dataclass(frozen=True)
class AtomSpec:
    species: str
    mass: float
    nuclear_spin: HalfInteger
    fine_levels: tuple
    hyperfine: dict = field(hash=False)
    lines: tuple
    provenance: str = ""

    def level(self, label: str) -> FineLevel:
        for lv in self.fine_levels:
            if lv.label == label:
                return lv
        raise KeyError(label)

    @property
    def ground(self) -> FineLevel:
        return min(self.fine_levels, key=lambda lv: lv.energy)

    def line(self, upper_label: str) -> TransitionLine:
        for ln in self.lines:
            if ln.upper.label == upper_label:
                return ln
        raise KeyError(upper_label)

    def sublevel(self, label: str, F, m_F) -> Sublevel:
        F = HalfInteger.of(F)
        m_F = HalfInteger.of(m_F)
        for s in sublevels(self, self.level(label)):
            if s.F == F and s.m_F == m_F:
                return s
        raise KeyError(f"{label} F={F} m_F={m_F}")


def _quantity(obj, units, where):
    if not isinstance(obj, dict) or "value" not in obj or "unit" not in obj:
        raise AtomDataError(f"{where}: expected {{value, unit}}, got {obj!r}")
    unit = obj["unit"]
    if unit not in units:
        raise AtomDataError(f"{where}: unknown unit tag {unit!r}")
    return float(obj["value"]) * units[unit]


def _angular_frequency(obj, where):
    unit = obj.get("unit") if isinstance(obj, dict) else None
    if unit == "rad/s":
        return float(obj["value"])
    if unit == "nm":
        lam = float(obj["value"]) * 1e-9
        return 2 * math.pi * C.c / lam if lam != 0 else 0.0
    return 2 * math.pi * _quantity(obj, _FREQ_UNITS, where)


def _require(doc, key, where):
    if key not in doc:
        raise AtomDataError(f"{where}: missing key {key!r}")
    return doc[key]


def atom_spec_from_dict(doc: dict, source: str = "<dict>") -> AtomSpec:
    """Build and validate an AtomSpec from a parsed data document."""
    species = _require(doc, "species", source)
    mass = float(_require(doc, "mass_kg", source))
    if mass <= 0:
        raise AtomDataError(f"{source}: mass_kg must be positive")
    I = HalfInteger(int(_require(doc, "nuclear_spin_2x", source)))

    levels = []
    for k, lv in enumerate(_require(doc, "levels", source)):
        where = f"{source}: levels[{k}]"
        L = int(_require(lv, "L", where))
        J = HalfInteger(int(_require(lv, "J_2x", where)))
        if not abs(2 * L - 1) <= J.twice_value <= 2 * L + 1:
            raise AtomDataError(f"{where}: J={J} incompatible with L={L} for one valence electron")
        energy = _angular_frequency(_require(lv, "energy", where), where + ".energy")
        levels.append(FineLevel(_require(lv, "label", where), L, J, energy))
    by_label = {lv.label: lv for lv in levels}
    if len(by_label) != len(levels):
        raise AtomDataError(f"{source}: duplicate level labels")
    if not levels:
        raise AtomDataError(f"{source}: no levels")
    ground = min(levels, key=lambda lv: lv.energy)
    if ground.L != 0:
        raise AtomDataError(f"{source}: ground level {ground.label} is not an S level")

    hyperfine = {}
    for label, shifts in _require(doc, "hyperfine", source).items():
        where = f"{source}: hyperfine[{label!r}]"
        if label not in by_label:
            raise AtomDataError(f"{where}: undeclared level")
        J = by_label[label].J
        out = []
        for k, hs in enumerate(shifts):
            F = HalfInteger(int(_require(hs, "F_2x", f"{where}[{k}]")))
            if not abs(I.twice_value - J.twice_value) <= F.twice_value <= I.twice_value + J.twice_value \
                    or (F.twice_value - I.twice_value - J.twice_value) % 2:
                raise AtomDataError(
                    f"{where}[{k}]: F={F} violates |I-J| <= F <= I+J (I={I}, J={J})")
            shift = _require(hs, "shift", f"{where}[{k}]")
            if isinstance(shift, dict) and shift.get("unit") == "nm":
                raise AtomDataError(f"{where}[{k}].shift: wavelength units not allowed for shifts")
            out.append(HyperfineShift(F, _angular_frequency(shift, f"{where}[{k}].shift")))
        fs = [h.F.twice_value for h in out]
        if fs != sorted(fs) or len(set(fs)) != len(fs):
            raise AtomDataError(f"{where}: hyperfine levels must be strictly ordered in F")
        hyperfine[label] = tuple(out)
    for lv in levels:
        if lv.label not in hyperfine:
            raise AtomDataError(f"{source}: level {lv.label} has no hyperfine data")

    lines = []
    for k, ln in enumerate(_require(doc, "lines", source)):
        where = f"{source}: lines[{k}]"
        lo, up = _require(ln, "lower", where), _require(ln, "upper", where)
        if lo not in by_label or up not in by_label:
            raise AtomDataError(f"{where}: references undeclared level")
        red = _quantity(_require(ln, "reduced_element", where), _LENGTH_UNITS, where + ".reduced_element")
        tau = _quantity(_require(ln, "lifetime", where), _TIME_UNITS, where + ".lifetime")
        if red <= 0 or tau <= 0:
            raise AtomDataError(f"{where}: reduced_element and lifetime must be positive")
        lines.append(TransitionLine(by_label[lo], by_label[up], red, tau))
    if not lines:
        raise AtomDataError(f"{source}: no transition lines")

    return AtomSpec(species, mass, I, tuple(levels), hyperfine, tuple(lines),
                    doc.get("provenance", ""))


def load_atom_spec(path) -> AtomSpec:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise AtomDataError(f"{path}: invalid JSON ({exc})") from exc
    return atom_spec_from_dict(doc, str(path))


def bundled_path(name: str = "cs133.json") -> Path:
    return Path(str(resources.files("optlattice") / "data" / name))


def load_cs133() -> AtomSpec:
    return load_atom_spec(bundled_path("cs133.json"))


def atom_spec_to_dict(atom: AtomSpec) -> dict:
    """Serialize to the data-file schema using SI unit tags (exact round trip)."""
    return {
        "species": atom.species,
        "provenance": atom.provenance,
        "mass_kg": atom.mass,
        "nuclear_spin_2x": atom.nuclear_spin.twice_value,
        "levels": [{"label": lv.label, "L": lv.L, "J_2x": lv.J.twice_value,
                    "energy": {"value": lv.energy, "unit": "rad/s"}} for lv in atom.fine_levels],
        "hyperfine": {label: [{"F_2x": h.F.twice_value,
                               "shift": {"value": h.shift, "unit": "rad/s"}}
                              for h in shifts] for label, shifts in atom.hyperfine.items()},
        "lines": [{"lower": ln.lower.label, "upper": ln.upper.label,
                   "reduced_element": {"value": ln.reduced_element, "unit": "m"},
                   "lifetime": {"value": ln.lifetime, "unit": "s"}} for ln in atom.lines],
    }


def sublevels(atom: AtomSpec, fine: FineLevel) -> list:
    out = []
    for hs in atom.hyperfine[fine.label]:
        F2 = hs.F.twice_value
        for m2 in range(-F2, F2 + 1, 2):
            out.append(Sublevel(fine, hs.F, HalfInteger(m2), fine.energy + hs.shift))
    return out


def transition_frequency(a: Sublevel, i: Sublevel) -> float:
    """omega_ia = omega_i - omega_a (rad/s, signed)."""
    return i.absolute_energy - a.absolute_energy


def decay_rate(line: TransitionLine) -> float:
    """Spontaneous decay rate of the upper level implied by the reduced element (1/s)."""
    omega = line.upper.energy - line.lower.energy
    d = C.e * line.reduced_element
    ratio = (line.lower.J.twice_value + 1) / (line.upper.J.twice_value + 1)
    return omega ** 3 * ratio * d ** 2 / (3 * math.pi * C.epsilon_0 * C.hbar * C.c ** 3)
