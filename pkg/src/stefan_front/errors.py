"""Exception types shared across the package."""


class StefanFrontError(Exception):
    """Base class for all package errors."""


class ValidationError(StefanFrontError):
    """A sign/zero condition of a reaction term failed on the validation grid."""


class DomainError(StefanFrontError):
    """An argument lies outside the admissible range of an operation."""


class KindError(StefanFrontError):
    """Operation requires a different nonlinearity kind."""


class QuadError(StefanFrontError):
    """Adaptive quadrature hit its refinement limit before reaching tolerance."""


class NoSolution(StefanFrontError):
    """No stationary profile exists for the requested half-length."""


class NoTermination(StefanFrontError):
    """A phase-plane trajectory failed to hit p = 0 before q reached 1."""


class DegenerateError(StefanFrontError):
    """The equilibrium at u = 1 is not a saddle (f'(1) >= 0)."""


class SignError(StefanFrontError):
    """A front attempted to move inward; the scheme is unstable or the data invalid."""


class BlowupError(StefanFrontError):
    """The solution exceeded the blow-up cap."""


class MonotoneViolation(StefanFrontError):
    """Recorded verdicts are not monotone in sigma; numerics too coarse."""


class BudgetExhausted(StefanFrontError):
    """The run budget is too small to even initialize a threshold bracket."""


class NotSpreading(StefanFrontError):
    """Speed estimation requested on a run that did not spread."""


class ParseError(StefanFrontError):
    """A job configuration failed strict-schema validation."""
