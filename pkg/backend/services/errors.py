"""
Exception hierarchy for wsatlab services

Every domain error is also a ValueError so routers can keep mapping
ValueError -> HTTP 400.
"""


class WsatLabError(Exception):
    """Base class for all wsatlab errors"""


class GraphError(WsatLabError, ValueError):
    """Invalid graph value or operation"""


class GraphFormatError(GraphError):
    """graph6 / JSON decoding failure at a byte offset"""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class GraphEditError(GraphError):
    """Adding an existing edge, removing a non-edge, or a bad vertex label"""


class PatternError(GraphError):
    """Pattern graph violates the pattern invariants (e.g. isolated vertices)"""


class CapacityError(WsatLabError, ValueError):
    """A configured size cap was exceeded"""


class InapplicableBoundError(WsatLabError, ValueError):
    """The hypotheses of a bound do not hold for this pattern"""


class HypothesisError(WsatLabError, ValueError):
    """A construction's preconditions do not hold"""


class ParameterError(WsatLabError, ValueError):
    """A numeric parameter is out of range"""
