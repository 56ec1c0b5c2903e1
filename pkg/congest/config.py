from __future__ import annotations

from dataclasses import dataclass

from django.conf import settings

from .codec import word_bits


@dataclass(frozen=True)
class SimConfig:
    """
    CONGEST(B) parameters plus the construction constants shared by all builds.

    bits is B, the per-edge per-round budget. Defaults come from
    settings.ROUTINGLAB; use for_graph() to derive them for an n-node network.
    """
    n: int
    word: int
    bits: int
    entry_words: int = 4
    max_rounds: int = 5_000_000
    retry_budget: int = 5
    c: float = 4.0
    c_prime: float = 4.0
    skeleton_c: float = 4.0
    oracle: bool = True
    record_digest: bool = False

    def __post_init__(self):
        if self.bits < self.entry_words * self.word:
            raise ValueError(
                f"B={self.bits} bits cannot hold one {self.entry_words}-word entry of {self.word}-bit words"
            )
        if self.max_rounds <= 0:
            raise ValueError("max_rounds must be positive")
        if self.retry_budget < 0:
            raise ValueError("retry_budget must be non-negative")

    @classmethod
    def for_graph(cls, n: int, **overrides) -> 'SimConfig':
        """Defaults from settings; explicit keyword arguments win (None means default)."""
        defaults = settings.ROUTINGLAB
        word = word_bits(n)
        values = {
            'n': n,
            'word': word,
            'bits': defaults['BITS_FACTOR'] * word,
            'entry_words': defaults['ENTRY_WORDS'],
            'max_rounds': defaults['MAX_ROUNDS'],
            'retry_budget': defaults['RETRY_BUDGET'],
            'c': defaults['HIERARCHY_C'],
            'c_prime': defaults['HIERARCHY_C_PRIME'],
            'skeleton_c': defaults['SKELETON_C'],
            'oracle': defaults['ORACLE'],
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)
