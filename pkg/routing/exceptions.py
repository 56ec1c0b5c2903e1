class RoutingError(RuntimeError):
    """Base class for routing-table failures."""


class RoutingLoopError(RoutingError):
    """The distance estimate did not decrease along a route: the tables are inconsistent."""

    def __init__(self, source, target, path):
        self.source = source
        self.target = target
        self.path = list(path)
        super().__init__(f"route {source} -> {target} stopped making progress after {len(self.path) - 1} hops")
