"""Exception types shared across the package."""


class WeylkitError(Exception):
    """Base class for all errors raised by weylkit."""


class UnitarityError(WeylkitError):
    """Input matrix is not unitary within the accepted tolerance."""


class UnreachableTargetError(WeylkitError):
    """A calibration solver was asked for an angle outside its reachable set."""


class ConvergenceError(WeylkitError):
    """A bounded iterative routine exhausted its iteration budget."""


class CircuitParseError(WeylkitError):
    """Malformed circuit input; carries a best-effort source location."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", col {column}" if column is not None else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class UnsupportedError(WeylkitError):
    """Requested operation is outside the supported model or format."""
