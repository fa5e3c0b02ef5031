"""Wigner 3j/6j symbols and hyperfine dipole matrix elements.

Angular momenta are carried internally as doubled integers so that the
selection rules are exact.  The alternating Racah sums are evaluated in exact
rational arithmetic and only the final square-root prefactor goes through
logarithms, which keeps full double precision well past j ~ 50.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Real


@dataclass(frozen=True, order=True)
class HalfInteger:
    """An integer or half-integer stored as ``twice_value`` = 2j."""

    twice_value: int

    @classmethod
    def of(cls, value) -> "HalfInteger":
        if isinstance(value, HalfInteger):
            return value
        two = Fraction(value) * 2 if not isinstance(value, float) else Fraction(value * 2)
        if two.denominator != 1:
            raise ValueError(f"{value!r} is not an integer or half-integer")
        return cls(int(two))

    @property
    def value(self) -> float:
        return self.twice_value / 2

    def __float__(self):
        return self.value

    def __neg__(self):
        return HalfInteger(-self.twice_value)

    def __add__(self, other):
        return HalfInteger(self.twice_value + HalfInteger.of(other).twice_value)

    def __sub__(self, other):
        return HalfInteger(self.twice_value - HalfInteger.of(other).twice_value)

    def __str__(self):
        if self.twice_value % 2 == 0:
            return str(self.twice_value // 2)
        return f"{self.twice_value}/2"


def _twice(x) -> int:
    if isinstance(x, HalfInteger):
        return x.twice_value
    if isinstance(x, int):
        return 2 * x
    if isinstance(x, Real):
        t = 2 * x
        if t != round(t):
            raise ValueError(f"{x!r} is not an integer or half-integer")
        return int(round(t))
    raise TypeError(f"cannot interpret {x!r} as an angular momentum")


def _triangle(a: int, b: int, c: int) -> bool:
    # doubled arguments
    return (a + b + c) % 2 == 0 and abs(a - b) <= c <= a + b


def _log_int(n: int) -> float:
    return math.log(n) if n > 0 else -math.inf


def _log_fact(n: int) -> float:
    return math.lgamma(n + 1)


def _signed_exp(log_prefactor: float, s: Fraction) -> float:
    if s == 0:
        return 0.0
    log_s = _log_int(abs(s.numerator)) - _log_int(s.denominator)
    return math.copysign(math.exp(log_prefactor + log_s), s)


def _log_delta(a: int, b: int, c: int) -> float:
    # log of (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!, doubled inputs
    return (_log_fact((a + b - c) // 2) + _log_fact((a - b + c) // 2)
            + _log_fact((-a + b + c) // 2) - _log_fact((a + b + c) // 2 + 1))


@lru_cache(maxsize=None)
def _w3j(j1, j2, j3, m1, m2, m3) -> float:
    if m1 + m2 + m3 != 0:
        return 0.0
    if not _triangle(j1, j2, j3):
        return 0.0
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        if abs(m) > j or (j - m) % 2:
            return 0.0
    if m1 == m2 == m3 == 0 and ((j1 + j2 + j3) // 2) % 2:
        return 0.0

    # integer (undoubled) quantities for the Racah sum
    a = (j3 - j2 + m1) // 2
    b = (j3 - j1 - m2) // 2
    c = (j1 + j2 - j3) // 2
    d = (j1 - m1) // 2
    f = (j2 + m2) // 2
    kmin = max(0, -a, -b)
    kmax = min(c, d, f)
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (math.factorial(k) * math.factorial(a + k) * math.factorial(b + k)
               * math.factorial(c - k) * math.factorial(d - k) * math.factorial(f - k))
        s += Fraction(-1 if k % 2 else 1, den)
    log_pref = 0.5 * (
        _log_delta(j1, j2, j3)
        + _log_fact((j1 + m1) // 2) + _log_fact((j1 - m1) // 2)
        + _log_fact((j2 + m2) // 2) + _log_fact((j2 - m2) // 2)
        + _log_fact((j3 + m3) // 2) + _log_fact((j3 - m3) // 2)
    )
    phase = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    return phase * _signed_exp(log_pref, s)


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol (j1 j2 j3; m1 m2 m3).

    Arguments may be ints, half-integer floats, Fractions or HalfInteger.
    Any failed selection rule gives exactly 0.
    """
    return _w3j(*(_twice(x) for x in (j1, j2, j3, m1, m2, m3)))


@lru_cache(maxsize=None)
def _w6j(j1, j2, j3, j4, j5, j6) -> float:
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if any(not _triangle(*t) for t in triads):
        return 0.0
    a = [sum(t) // 2 for t in triads]
    b = [(j1 + j2 + j4 + j5) // 2, (j2 + j3 + j5 + j6) // 2, (j3 + j1 + j6 + j4) // 2]
    s = Fraction(0)
    for t in range(max(a), min(b) + 1):
        num = math.factorial(t + 1)
        den = 1
        for ai in a:
            den *= math.factorial(t - ai)
        for bi in b:
            den *= math.factorial(bi - t)
        s += Fraction(-num if t % 2 else num, den)
    log_pref = 0.5 * sum(_log_delta(*t) for t in triads)
    return _signed_exp(log_pref, s)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}; 0 if any triad fails the triangle rule."""
    return _w6j(*(_twice(x) for x in (j1, j2, j3, j4, j5, j6)))


def hyperfine_dipole_element(ground, excited, q: int, reduced_element: float,
                             nuclear_spin) -> float:
    """<F m_F| x . eps_q^* |F' m_F'> for a ground/excited hyperfine sublevel pair.

    ``ground`` and ``excited`` are anything with ``J``, ``F`` and ``m_F``
    attributes (e.g. :class:`optlattice.atomic_data.Sublevel`).  The result
    has the units of ``reduced_element`` and is nonzero only for
    m_F' = m_F + q.

    Spherical unit vectors: eps_0 = z, eps_{+-1} = -+(x +- i y)/sqrt(2).
    """
    if q not in (-1, 0, 1):
        raise ValueError(f"q must be -1, 0 or +1, got {q}")
    J, F, mF = (_twice(x) for x in (ground.J, ground.F, ground.m_F))
    Jp, Fp, mFp = (_twice(x) for x in (excited.J, excited.F, excited.m_F))
    I = _twice(nuclear_spin)
    for f, m in ((F, mF), (Fp, mFp)):
        if abs(m) > f or (f - m) % 2:
            raise ValueError(f"invalid sublevel: |m_F| = {abs(m)/2} > F = {f/2}")
    if mFp != mF + 2 * q:
        return 0.0
    three_j = _w3j(F, 2, Fp, mF, 2 * q, -mFp)
    if three_j == 0.0:
        return 0.0
    six_j = _w6j(J, Jp, 2, Fp, F, I)
    phase_exp = (J + I + mF) // 2
    phase = -1.0 if phase_exp % 2 else 1.0
    return (reduced_element * phase * math.sqrt((F + 1) * (Fp + 1) * (J + 1))
            * three_j * six_j)
