"""Exception types shared across the package.

Every failure that a caller may want to react to has its own class so the
CLI can map it to an exit code.
"""


class ResitorError(Exception):
    """Base class for all package errors."""


class ModeMismatch(ResitorError, TypeError):
    """Operands carry different scalar modes (exact vs complex)."""


class ValuationError(ResitorError, ZeroDivisionError):
    """A series with vanishing constant term was inverted."""


class DegreeIntegralOnRay(ResitorError, ValueError):
    """A geometric factor 1/(1 - zeta q^a) hit a = 0 with zeta = 1."""


class WindowUnderflow(ResitorError):
    """A requested coefficient lies outside the certified exponent window."""

    def __init__(self, message, variable=None):
        super().__init__(message)
        self.variable = variable


class LeadingTermError(ResitorError, ValueError):
    """No certified leading term with invertible coefficient."""


class BudgetExceeded(WindowUnderflow):
    """Window doubling hit the configured cap."""


class NotStabilized(ResitorError):
    """A lattice sum did not stabilize before the box cap."""


class ThetaBalanceError(ResitorError, ValueError):
    """Theta factors in a ratio do not balance."""


class ConfigError(ResitorError, ValueError):
    """Invalid user input; the message names the offending field."""
