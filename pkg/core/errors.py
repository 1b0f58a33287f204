"""
Exception hierarchy for pwcycles

Library code raises these; only the command handler turns them into exit codes.
"""

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2


class PwCyclesError(Exception):
    """Base class for every error raised by pwcycles"""

    exit_code = EXIT_NUMERICAL

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def to_dict(self):
        return {
            "type": self.__class__.__name__,
            "message": self.message,
            "context": {k: _plain(v) for k, v in self.context.items()},
        }


def _plain(value):
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return repr(value)


class UsageError(PwCyclesError):
    """Invalid command line or configuration"""
    exit_code = EXIT_USAGE


class PreconditionError(PwCyclesError):
    """An operation was called outside its documented domain"""
    exit_code = EXIT_USAGE


class DegreeOverflowError(PwCyclesError):
    """Requested level exceeds the assembled-degree cap"""
    exit_code = EXIT_USAGE


class NumericalError(PwCyclesError):
    """A numerical kernel could not produce a trustworthy value"""


class ConvergenceError(NumericalError):
    """Newton or bracketing iteration did not converge"""


class DerivativeUnderflowError(NumericalError):
    """Newton derivative vanished at an iterate"""


class NoReturnError(NumericalError):
    """An orbit did not come back to the switching line within budget"""


class TangencyError(NumericalError):
    """An orbit met the switching line tangentially"""


class CrossingError(NumericalError):
    """A return point landed where the two pieces do not cross"""


class BranchError(NumericalError):
    """Square-root conjugation left the strip (R + 2 < 0)"""


class PoleError(NumericalError):
    """A Melnikov denominator vanished"""


class DegenerateIntervalError(NumericalError):
    """Root isolation requested on an interval shorter than the tolerance"""
    exit_code = EXIT_USAGE


class IndeterminateError(NumericalError):
    """Multiplicity could not be decided up to the order cap"""


class ExtrapolationError(NumericalError):
    """Richardson ratios across the epsilon schedule are inconsistent"""


class LiftConsistencyError(NumericalError):
    """Lifted and direct displacements disagree"""


class UnresolvedSignChangeError(NumericalError):
    """A bracketed sign change could not be refined to a zero"""


class MonodromyError(NumericalError):
    """The fold point is not a monodromic two-fold with nonzero stability"""


class ConditionError(PwCyclesError):
    """Condition (A) or (B) of the degree lift fails"""

    def __init__(self, condition: str, inequality: str, value: float):
        super().__init__(
            f"condition ({condition}) violated: {inequality} (value {value:.6g})",
            condition=condition, inequality=inequality, value=value,
        )
        self.condition = condition
        self.inequality = inequality
