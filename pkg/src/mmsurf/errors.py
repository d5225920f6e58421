"""Exception types shared across the package."""


class MmsurfError(Exception):
    """Base class for all mmsurf errors."""


class ParseError(MmsurfError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(MmsurfError):
    """Input parsed but violates a value constraint (e.g. radius <= 0)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownElementError(MmsurfError, KeyError):
    """Element symbol missing from a radius table."""

    def __init__(self, symbol):
        super().__init__(f"unknown element symbol {symbol!r}")
        self.symbol = symbol


class DomainError(MmsurfError):
    """Operation called outside its mathematical/geometric domain."""


class ShapeError(MmsurfError):
    """Grid/mask/field shape or spec mismatch."""


class ConfigError(MmsurfError):
    """Inconsistent or invalid run configuration."""


class NumericError(MmsurfError):
    """Non-finite or overflowing intermediate in a numeric kernel."""


class StabilityError(MmsurfError):
    """Explicit time step exceeds the stability (CFL) bound."""

    def __init__(self, dt, bound):
        super().__init__(
            f"time step dt={dt:g} exceeds the stability bound {bound:g} "
            f"(dt <= min(h)^2 / (6 max D))"
        )
        self.dt = dt
        self.bound = bound
