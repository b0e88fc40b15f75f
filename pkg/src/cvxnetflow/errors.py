"""Exception types raised across the package."""


class FlowError(Exception):
    """Base class for every error raised by cvxnetflow."""


class UnbalancedSupplies(FlowError):
    pass


class SelfLoop(FlowError):
    pass


class Disconnected(FlowError):
    pass


class BadCostParams(FlowError, ValueError):
    pass


class UnknownArc(FlowError, KeyError):
    pass


class ArcAlreadyBasic(FlowError):
    pass


class NegativeFlow(FlowError, ValueError):
    pass


class NegativeFlowResult(FlowError):
    """A loop adjustment produced a negative flow (step exceeded its bound)."""


class BlockingNotInLoop(FlowError):
    pass


class Infeasible(FlowError):
    """No nonnegative flow satisfies the node supplies."""


class NonlinearCost(FlowError):
    pass


class TooLarge(FlowError):
    pass


class NoFeasibleTree(FlowError):
    pass


class TooManyCycles(FlowError):
    pass


class ParseError(FlowError):
    """Malformed instance text. ``line`` is the 1-based offending line."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InvalidTree(FlowError, ValueError):
    """The given arc set is not a spanning tree of the network."""
