class ShortRangeError(RuntimeError):
    """Base class for landmark hierarchy failures."""


class LabelNotInCellError(ShortRangeError):
    """Tree routing was asked for a node outside the current Voronoi cell."""

    def __init__(self, node, root, target_root):
        self.node = node
        self.root = root
        self.target_root = target_root
        super().__init__(f"node {node} is in the cell of {root}, the label belongs to the cell of {target_root}")


class ValidationFailure(ShortRangeError):
    """A forced hierarchy does not have the required properties (forced levels are never resampled)."""

    def __init__(self, stage, problems):
        self.stage = stage
        self.problems = list(problems)
        preview = '; '.join(self.problems[:3])
        super().__init__(f"stage {stage} failed validation: {preview}")
