"""Exception hierarchy shared across the package."""


class LatticeError(Exception):
    """Invalid input or usage (bad matrix shape, wrong ambient, ...)."""


class SingularMatrixError(LatticeError):
    """Inverse of a singular matrix was requested."""


class AmbientMismatchError(LatticeError):
    """Two lattices that must share a quadratic space do not."""


class BudgetExceededError(LatticeError):
    """An enumeration exceeded its configured budget."""


class VerificationFailure(Exception):
    """A mathematical assertion failed.

    This is never a usage error: it means one of the checked theorems
    was falsified at desk scale, which indicates a bug in this package.
    The CLI maps it to exit code 1.
    """
