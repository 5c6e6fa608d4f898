"""Exception types shared across the package."""


class GraphFlowError(Exception):
    pass


class ChartViolation(GraphFlowError, ValueError):
    """A point lies outside (or too close to the edge of) the coordinate chart."""


class SingularMetric(GraphFlowError, ArithmeticError):
    pass


class EigenFailure(GraphFlowError, ArithmeticError):
    pass


class RangeViolation(GraphFlowError, ValueError):
    pass


class DomainError(GraphFlowError, ValueError):
    pass


class ConfigError(GraphFlowError, ValueError):
    pass


class FlowError(GraphFlowError):
    """Base for failures that abort a time integration.

    Carries the partial monitor records and the last valid state so callers
    can still inspect what happened before the failure.
    """

    def __init__(self, message, *, t=None, index=None):
        super().__init__(message)
        self.t = t
        self.index = index
        self.records = []
        self.state = None


class ChartExit(FlowError):
    pass


class NumericalBlowup(FlowError):
    pass
