"""Exception hierarchy shared by the protocol, generators and harness."""


class CribError(Exception):
    """Base class for every error raised by the benchmark engine."""


class InvalidReference(CribError):
    """An action or combination named a ref_id that is not in the session KB."""


class InvalidAction(CribError):
    """Action parameters are malformed or out of range."""


class InvalidCombination(CribError):
    """A combination operator was given invalid parents or parameters."""


class BudgetExceeded(CribError):
    """The session has used up its score() budget."""


class VerificationError(CribError):
    """A stored oracle script or suite failed a consistency check."""


class GenerationError(CribError):
    """A generator could not satisfy its constraints."""
