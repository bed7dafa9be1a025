"""Exception hierarchy shared by all betachart modules.

The CLI maps these onto exit codes: :class:`DataError` (and subclasses) is a
data problem (exit 1), :class:`ConvergenceError` an estimation failure
(exit 2), and :class:`SimulationError` a Monte Carlo failure (exit 3).
"""


class BetaChartError(Exception):
    """Base class for all errors raised by betachart."""


class DomainError(BetaChartError, ValueError):
    """A scalar argument is outside the mathematical domain of a function."""


class DataError(BetaChartError):
    """Input data violates a precondition (ingestion, range, degeneracy)."""


class DesignError(DataError):
    """A design matrix is rank deficient or too small for the model."""


class ConvergenceError(BetaChartError):
    """An iterative procedure failed to converge.

    ``last`` carries the final iterate (parameter vector, iteration count,
    gradient norm) for diagnosis.
    """

    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class SimulationError(BetaChartError):
    """Too many Monte Carlo replications failed to produce a usable fit."""
