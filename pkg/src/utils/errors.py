"""
This module contains the exceptions raised by the equilibrium solvers.

The CLI maps the three top-level families to exit codes: ``ConfigError`` → 2,
``SolverError`` → 3 and ``InvariantViolation`` → 4.
"""


class EquilibriumError(Exception):
    """
    Base class of every error raised by the package.
    """


#######################################################################
## Configuration ######################################################
#######################################################################


class ConfigError(EquilibriumError):
    """
    Invalid scenario file, command-line flag or sweep definition.
    """


#######################################################################
## Solvers ############################################################
#######################################################################


class SolverError(EquilibriumError):
    """
    A solver could not produce the requested object.
    """


class DomainError(SolverError):
    """
    Quantity outside the demand domain.
    """


class ShapeError(SolverError):
    """
    Demand coefficients violate a family constraint.
    """


class BracketError(SolverError):
    """
    No sign change on the search interval.
    """


class ConvergenceError(SolverError):
    """
    Iterative solver stopped before meeting its tolerance.
    """


class ArgError(SolverError):
    """
    Invalid solver argument (e.g. a zero discount coefficient used as divisor).
    """


class ExistenceError(SolverError):
    """
    The requested equilibrium or bound does not exist for these coefficients.
    """


class DegenerateError(SolverError):
    """
    The equation collapses and only the trivial solution remains.
    """


class ComplexRootError(SolverError):
    """
    Negative discriminant: the candidate root is not real.
    """


class ComplexForecastError(ComplexRootError):
    """
    An agent's forecast quadratic has no real root.
    """


class ComplexError(ComplexRootError):
    """
    The mixture aggregate quadratic has no real root.
    """


class QuadratureError(SolverError):
    """
    Quadrature error estimate above the accepted bound.
    """


class HypothesisError(SolverError):
    """
    A check was called outside the hypothesis it verifies.
    """


class NonFiniteError(SolverError):
    """
    A scanned function returned NaN or an infinity.
    """


class UnknownEquationError(SolverError):
    """
    Residual requested for an equation identifier that does not exist.
    """


#######################################################################
## Verification #######################################################
#######################################################################


class InvariantViolation(EquilibriumError):
    """
    An emitted row does not satisfy its defining equation.
    """

    def __init__(self, message: str, row: dict | None = None):
        super().__init__(message)
        self.row = row
