"""Exception hierarchy shared by all modules."""


class TropMomentError(Exception):
    """Base class for every error raised by this package."""


class GraphError(TropMomentError, ValueError):
    """Invalid graph input. ``line``/``column`` locate parse errors when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            loc = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{loc}: {message}"
        super().__init__(message)


class LoopEdgeError(GraphError):
    pass


class LengthError(GraphError):
    pass


class ConnectivityError(GraphError):
    pass


class EmptyGraphError(GraphError):
    pass


class NumericalError(TropMomentError, ArithmeticError):
    pass


class DomainError(TropMomentError, ValueError):
    pass


class MassError(TropMomentError, ValueError):
    pass


class PathError(TropMomentError, ValueError):
    pass


class DegenerateEdgeError(TropMomentError, ArithmeticError):
    pass


class TreeError(TropMomentError, ValueError):
    pass


class EnumerationCapError(TropMomentError, RuntimeError):
    """Spanning-tree count above the configured cap.

    ``estimate`` is the exact unweighted tree count (matrix-tree theorem).
    """

    def __init__(self, cap, estimate):
        self.cap = cap
        self.estimate = estimate
        super().__init__(f"graph has {estimate:.6g} spanning trees, above cap {cap}")


class GenusZeroError(TropMomentError, ValueError):
    pass


class SearchRadiusError(TropMomentError, RuntimeError):
    pass


class SamplingError(TropMomentError, RuntimeError):
    pass
