class SimulationError(RuntimeError):
    """Base class for engine failures. These signal protocol bugs, not user errors."""


class BudgetViolation(SimulationError):
    """A node put more than B bits on one edge in one round."""

    def __init__(self, round_no, sender, receiver, bits, budget):
        self.round_no = round_no
        self.sender = sender
        self.receiver = receiver
        self.bits = bits
        self.budget = budget
        super().__init__(
            f"round {round_no}: node {sender} sent {bits} bits to {receiver} (budget {budget})"
        )


class RoundCapExceeded(SimulationError):
    def __init__(self, protocol, cap):
        self.cap = cap
        super().__init__(f"protocol '{protocol}' did not terminate within {cap} rounds")


class EncodingError(SimulationError):
    """A message field cannot be put on the wire."""


class RetryBudgetExhausted(SimulationError):
    """Validation kept failing; the constants are too small for this instance."""

    def __init__(self, what, attempts, problems):
        self.what = what
        self.attempts = attempts
        self.problems = list(problems)
        preview = '; '.join(self.problems[:3])
        super().__init__(f"{what}: validation failed in all {attempts} attempts ({preview})")
