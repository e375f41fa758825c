"""
errors.py

Exception hierarchy shared by the numerical modules and the CLI.

Every error carries the process exit code the CLI reports for it:
  2 usage / invalid arguments, 3 I/O, 4 no-solution regime, 5 validation failure.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple


class CapacityError(Exception):
    """Base class for every error raised by this package."""

    exit_code: int = 1


class InvalidPointError(CapacityError, ValueError):
    """An evaluation point or argument lies outside the domain of the formula."""

    exit_code = 2


class TruncationError(CapacityError, ArithmeticError):
    """A series needs more terms than the hard cap allows."""

    def __init__(self, message: str, terms_needed: Optional[int] = None):
        super().__init__(message)
        self.terms_needed = terms_needed


class QuadratureError(CapacityError, ArithmeticError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message: str, estimate: float = float("nan"), abserr: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.abserr = abserr


class SignViolationError(CapacityError, ArithmeticError):
    """The saddle-point integral lost its sign (numerical breakdown)."""

    def __init__(self, message: str, integral: float):
        super().__init__(message)
        self.integral = integral


class NoBracketError(CapacityError):
    """No overlap q solves alpha_of_q(lambda, q) = alpha."""

    exit_code = 4

    def __init__(self, message: str, regime: str, alpha_range: Tuple[float, float]):
        super().__init__(message)
        self.regime = regime
        self.alpha_range = alpha_range


class AmbiguousSaddleError(CapacityError):
    """More than one bracketed root of the saddle-point relation."""

    exit_code = 4

    def __init__(self, message: str, roots: Sequence[float]):
        super().__init__(message)
        self.roots: List[float] = list(roots)


class PoleError(CapacityError, ValueError):
    """Digamma evaluated at a non-positive integer."""

    exit_code = 2

    def __init__(self, message: str, z: complex):
        super().__init__(message)
        self.z = z


class DimensionCapError(CapacityError, ValueError):
    """Dense circuit simulation requested above the supported register size."""

    exit_code = 2


class UnsupportedActivationError(CapacityError, ValueError):
    exit_code = 2


class ValidationFailure(CapacityError):
    """A numerical gate was missed; carries the offending records."""

    exit_code = 5

    def __init__(self, message: str, failures: Optional[list] = None):
        super().__init__(message)
        self.failures = failures or []


class ImaginaryResidueError(CapacityError, ArithmeticError):
    """A quantity that must be real came out with a significant imaginary part."""

    def __init__(self, message: str, residue: float):
        super().__init__(message)
        self.residue = residue
