class ExtensionError(RuntimeError):
    """Base class for failures of the applications built on the routing machinery."""


class InfeasibleSolutionError(ExtensionError):
    """A Steiner forest leaves some same-component terminals disconnected."""

    def __init__(self, unmet):
        self.unmet = list(unmet)
        pairs = ', '.join(f"{s}-{t}" for s, t in self.unmet[:5])
        super().__init__(f"{len(self.unmet)} terminal pairs are not connected: {pairs}")
