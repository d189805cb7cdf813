"""Exception hierarchy shared across the library and the CLI.

The CLI maps ``UsageError`` (and argparse/JSON failures) to exit code 2 and
every other ``FracvarError`` to exit code 1.
"""


class FracvarError(Exception):
    """Base class for all library errors."""


class UsageError(FracvarError):
    """Caller misuse: bad arguments, malformed problem files, wrong mode."""


class SchemaError(UsageError):
    """A problem file does not conform to the documented JSON schema."""


class DomainError(FracvarError):
    """Evaluation outside a function's domain (kernel singular point, Gamma pole)."""


class RangeError(FracvarError):
    """Argument outside the supported accuracy range (e.g. Mittag-Leffler |z|)."""


class GridMismatchError(FracvarError):
    """Two grid functions (or a grid and a parameter set) disagree on [a, b] or n."""


class UnsupportedKernelError(FracvarError):
    """A kernel family cannot be used for the requested operation."""


class IncompatibleDataError(FracvarError):
    """Input data violates a solvability condition (e.g. Volterra rhs(a) != 0)."""


class LagrangianValidationError(FracvarError):
    """A supplied partial derivative disagrees with finite differences of F."""


class DegenerateConstraintError(FracvarError):
    """The constraint residual vanishes, so no multiplier can be estimated."""


class SimulationBlowUpError(FracvarError):
    """A trajectory became non-finite; carries the first bad node index."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class ConvergenceError(FracvarError):
    """An iterative routine failed to reach its tolerance."""


class NormBoundViolation(FracvarError):
    """An empirical operator norm exceeded its theoretical bound."""
