"""Exception types shared across the package."""


class TrunkpoolError(Exception):
    """Base class for all library errors."""


class DomainError(TrunkpoolError, ValueError):
    """An argument lies outside the operation's admissible domain."""


class NumericError(TrunkpoolError, ArithmeticError):
    """A computation failed numerically (underflow, non-finite result)."""


class BracketError(NumericError):
    """A bisection could not bracket its root.

    Raised when a quantity that is provably monotone fails to change sign
    over the search interval; almost always indicates a bug upstream in the
    blocking-probability evaluation rather than in the solver itself.
    """


class ScenarioError(TrunkpoolError, ValueError):
    """A scenario file failed to parse or validate."""
