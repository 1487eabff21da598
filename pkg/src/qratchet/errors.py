"""Exception types shared across the package."""


class QRatchetError(Exception):
    """Base class for all package errors."""


class ValidationError(QRatchetError, ValueError):
    """An input violates a documented precondition."""


class TruncationOverflow(QRatchetError):
    """Population at the Fock cutoff exceeded the hard threshold.

    ``index`` is the encounter (1-based) at which it happened, when known;
    ``records`` carries whatever was completed before the overflow.
    """

    def __init__(self, message, *, tail_mass=None, index=None, records=None):
        super().__init__(message)
        self.tail_mass = tail_mass
        self.index = index
        self.records = list(records) if records is not None else []


class TruncationWarning(UserWarning):
    """Population at the Fock cutoff is above the soft threshold."""


class UnstableCoupling(QRatchetError):
    """The coupled quadratic Hamiltonian has an inverted normal mode."""


class NonPositiveProbability(QRatchetError, ValueError):
    """A log-linear fit was asked to take the log of a non-positive entry."""


class TooFewRecords(QRatchetError, ValueError):
    pass


class IdentityViolation(QRatchetError, ArithmeticError):
    """Two independently computed sides of an exact identity disagree."""
