class GraphError(ValueError):
    """Base class for graph input problems."""


class GraphParseError(GraphError):
    """A graph file line could not be parsed."""

    def __init__(self, message, line_no=None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class GraphValidationError(GraphError):
    """The edge set violates a WeightedGraph invariant."""


class GeneratorParamsError(GraphError):
    """Invalid parameters for a graph family."""
