"""Exceptions shared across modules."""


class OptLatticeError(Exception):
    pass


class AtomDataError(OptLatticeError, ValueError):
    """Schema, unit or invariant violation in an atomic data file."""


class ResonanceProximity(OptLatticeError):
    """Requested frequency lies inside an excluded window around a resonance."""

    def __init__(self, omega, omega_res, window):
        self.omega = omega
        self.omega_res = omega_res
        self.window = window
        super().__init__(
            f"omega = {omega:.6e} rad/s is within {window:.3e} rad/s of a resonance "
            f"at {omega_res:.6e} rad/s")


class NoSignChange(OptLatticeError):
    pass


class ZeroPolarizability(OptLatticeError, ZeroDivisionError):
    pass


class NonFinite(OptLatticeError, FloatingPointError):
    pass


class ToleranceUnreachable(OptLatticeError):
    pass


class GridUnderresolved(OptLatticeError):
    pass


class GridTooLarge(OptLatticeError):
    pass


class ValidityWarning(UserWarning):
    """An approximation is being used outside its stated range."""
