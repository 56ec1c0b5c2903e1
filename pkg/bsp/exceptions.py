class MissingEntryError(LookupError):
    """A route lookup found no entry for the source: the level lists are corrupted."""

    def __init__(self, node, source, level=None):
        self.node = node
        self.source = source
        self.level = level
        where = f"L_{node}({level})" if level is not None else f"any level of node {node}"
        super().__init__(f"no entry for source {source} in {where}")
