"""Exception hierarchy shared by every module of the package."""


class NHSTAError(Exception):
    """Base class for all package errors."""


class DegenerateSpectrum(NHSTAError):
    """Eigenvalues coalesce, so the biorthogonal basis cannot be normalized."""


class ExceptionalPoint(NHSTAError):
    """The counterterm denominator vanishes at time ``t``."""

    def __init__(self, t, magnitude, message=None):
        self.t = t
        self.magnitude = magnitude
        if message is None:
            message = f"exceptional point at t={t!r} ns (|C1|={magnitude:.3e})"
        super().__init__(message)


class ExpansionInvalid(NHSTAError):
    """First-order expansion parameter |z(t)| is not below one."""

    def __init__(self, t, z):
        self.t = t
        self.z = z
        super().__init__(f"|z(t)|={abs(z):.3g} >= 1 at t={t!r} ns")


class OutsideConvergenceRadius(NHSTAError):
    """|J| is not inside the convergence disc of the power series in J."""

    def __init__(self, t, abs_j, radius):
        self.t = t
        self.abs_j = abs_j
        self.radius = radius
        super().__init__(f"|J|={abs_j:.4g} >= radius {radius:.4g} at t={t!r} ns")


class DerivativeMismatch(NHSTAError):
    """Analytic derivatives disagree with central finite differences."""


class StepSizeUnderflow(NHSTAError):
    """The adaptive integrator could not keep the step size positive."""


class ZeroVector(NHSTAError):
    """A state vector with zero norm was passed where an overlap is needed."""


class ConfigError(NHSTAError):
    """Base class for configuration failures (CLI exit code 1)."""


class ParseError(ConfigError):
    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(ConfigError):
    """Collects every violation found while validating a configuration."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# raised by sweep validation before any run
ConfigInvalid = ValidationError
