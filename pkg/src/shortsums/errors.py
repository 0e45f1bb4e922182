"""Exception hierarchy shared by every module."""


class ShortSumsError(Exception):
    """Base class."""


class ContractError(ShortSumsError, ValueError):
    """A precondition of an operation was violated."""


class CapacityError(ShortSumsError):
    """The request exceeds the memory/size budget of the sieve or sampler."""


class SingularityError(ShortSumsError, ArithmeticError):
    """An Euler factor vanished or a weight over/underflowed."""


class WindowError(ShortSumsError):
    """The quadrature window is too short for the requested tolerance."""
