"""Exception types shared across the toolkit.

Every failure mode that callers are expected to branch on gets its own
class so the CLI and service layers can map outcomes to exit codes and
HTTP payloads without string matching.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidBlowUp(ToolkitError):
    """Construction of a gain function violated a structural requirement."""


class TimeOutOfHorizon(ToolkitError):
    """A time argument fell outside the function's domain [0, T)."""


class DomainError(ToolkitError):
    """An argument fell outside the mathematical domain of an operation."""


class NotCertifiable(ToolkitError):
    """A certificate was requested that the given data cannot support."""


class NoQuadraticFloor(NotCertifiable):
    """The rate function has no term of exponent >= 2, so no quadratic
    lower bound on the gain exists and terminal-time convergence cannot
    be certified against it."""


class ConvergenceFailure(ToolkitError):
    """An iterative routine exhausted its iteration budget."""


class NotDiagonallyStable(ToolkitError):
    """The gain matrix admits no positive weighting with negative decay."""


class NotHurwitz(ToolkitError):
    """A Hurwitz matrix was required."""


class SpecMismatch(ToolkitError):
    """An interconnection description is internally inconsistent."""


class NonFiniteState(ToolkitError):
    """Integration produced a non-finite state or input signal.

    Carries the time at which the check tripped.
    """

    def __init__(self, message: str, t: float):
        super().__init__(message)
        self.t = t


class MissingSignal(ToolkitError):
    """A named signal was not recorded in the trajectory."""


class OracleMismatch(ToolkitError):
    """Two independent computations of the same quantity disagreed
    beyond tolerance; indicates a bug, not bad input."""
