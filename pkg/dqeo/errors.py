"""Typed errors raised across the optimizer and the benchmark harness"""


class DQEOError(Exception):
    """Base class for every error raised by this package"""


class ConfigurationError(DQEOError, ValueError):
    """Invalid battery or component configuration (rejected before any work)"""


class QubitRangeError(DQEOError, ValueError):
    """Register width outside the supported simulator range"""


class GateError(DQEOError, ValueError):
    """Bad qubit index or non-finite gate angle"""


class NormalizationError(DQEOError, ValueError):
    """State vector norm drifted away from 1"""


class GridError(DQEOError, ValueError):
    """Invalid discretization grid or basis index"""


class WidthLimitError(DQEOError, ValueError):
    """Register too wide for tabulation or exhaustive scan"""


class NotExpandableError(DQEOError, ValueError):
    """Objective has no polynomial form and cannot be Pauli-expanded"""


class NotSeparableError(DQEOError, ValueError):
    """Slice requested from a non-separable objective"""


class GradientUnavailableError(DQEOError, ValueError):
    """Gradient requested from a non-differentiable objective"""


class BudgetTooSmallError(DQEOError, ValueError):
    """Evaluation budget below dim + 2"""


class NonFiniteObjectiveError(DQEOError, ValueError):
    """Objective returned NaN or infinity during optimization"""


class HistogramMismatchError(DQEOError, ValueError):
    """Shot histogram total does not match the CVaR configuration"""


class CircuitKnittingRequiredError(DQEOError, ValueError):
    """Non-separable objective whose joint register exceeds the simulator limit"""

    def __init__(self, width: int, limit: int):
        super().__init__(
            f"Joint register of {width} qubits exceeds {limit}: "
            "requires circuit knitting (out of scope)"
        )
        self.width = width
        self.limit = limit

    def __reduce__(self):
        return (type(self), (self.width, self.limit))


class EmptyBoxError(DQEOError, ValueError):
    """Search box with lb > ub in some dimension"""


class NoSuccessfulCaptureError(DQEOError):
    """Volume metrics requested for a cell without any correct hybrid trial"""


class ReportIOError(DQEOError, OSError):
    """Report could not be written or read"""

    def __init__(self, path, message: str):
        super().__init__(f"{path}: {message}")
        self.message = message
        self.path = str(path)

    def __reduce__(self):
        return (type(self), (self.path, self.message))
