"""
Landmark levels S_0 = V ⊇ S_1 ⊇ ... ⊇ S_L and the per-stage BSP parameters.

Each node draws one uniform value u and takes the largest level i with
u < p_i, so Pr[l_v >= i] = p_i and the sets are nested. No communication.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from django.conf import settings

from congest.engine import RandomStream

logger = logging.getLogger(__name__)


def max_stages(n: int) -> int:
    """ceil(log log n), at least 1."""
    if n <= 2:
        return 1
    return max(1, math.ceil(math.log2(math.log2(n))))


def clamp_stages(n: int, L: int) -> int:
    return max(1, min(L, max_stages(n)))


def landmark_probabilities(n: int, L: int) -> tuple[float, ...]:
    """p_i = (sqrt n)^(-(2^L/(2^L-1)) (2^i-1)/2^i) for i = 0..L."""
    if n <= 1:
        return (1.0,) * (L + 1)
    exponent = 2 ** L / (2 ** L - 1)
    root = math.sqrt(n)
    return tuple(root ** (-exponent * (2 ** i - 1) / 2 ** i) for i in range(L + 1))


def stage_parameters(n: int, p: Sequence[float], c: float, c_prime: float) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """
    h_i = ceil(c log n / p_i) and delta_i = ceil(c' h_i p_(i-1)), clamped to
    the useful ranges 1..n-1 and 1..n. Index 0 is a placeholder.
    """
    log_n = math.log2(n) if n > 1 else 0.0
    h, delta = [0], [0]
    for i in range(1, len(p)):
        h_i = max(1, min(n - 1, math.ceil(c * log_n / p[i])))
        h.append(h_i)
        delta.append(max(1, min(n, math.ceil(c_prime * h_i * p[i - 1]))))
    return tuple(h), tuple(delta)


def _level(u: float, p: Sequence[float], floor: int = 0) -> int:
    return max(i for i in range(floor, len(p)) if u < p[i])


@dataclass(frozen=True)
class Hierarchy:
    n: int
    L: int
    levels: dict[int, int]
    p: tuple[float, ...]
    h: tuple[int, ...]
    delta: tuple[int, ...]
    c: float
    c_prime: float
    seed: int = 0
    forced: bool = False

    def members(self, i: int) -> frozenset[int]:
        """S_i."""
        return frozenset(v for v, level in self.levels.items() if level >= i)

    def stage_sources(self, i: int) -> dict[int, tuple[int, int]]:
        """Stage i looks for S_(i-1); a source id is (node, level)."""
        return {v: (v, level) for v, level in self.levels.items() if level >= i - 1}

    def resample(self, stage: int, attempt: int) -> 'Hierarchy':
        """
        Redraw the levels of S_(stage-1) conditioned on membership there.
        S_1 .. S_(stage-1) stay as they are.
        """
        if self.forced:
            raise ValueError("forced hierarchies are never resampled")
        floor = stage - 1
        levels = dict(self.levels)
        for v in sorted(self.members(floor)):
            rng = np.random.default_rng([self.seed, v, stage, attempt])
            levels[v] = _level(float(rng.random()) * self.p[floor], self.p, floor)
        logger.debug("resampled stage %d (attempt %d): |S_%d| = %d",
                     stage, attempt, stage, sum(1 for level in levels.values() if level >= stage))
        return replace(self, levels=levels)

    @classmethod
    def forced_sets(cls, n: int, sets: Sequence[set[int]], c: float | None = None,
                    c_prime: float | None = None) -> 'Hierarchy':
        """Hierarchy with prescribed S_1 .. S_L (must be nested)."""
        L = len(sets)
        for i in range(1, L):
            if not set(sets[i]) <= set(sets[i - 1]):
                raise ValueError(f"S_{i + 1} is not a subset of S_{i}")
        levels = {v: max((i for i in range(1, L + 1) if v in sets[i - 1]), default=0) for v in range(1, n + 1)}
        p = landmark_probabilities(n, L)
        c, c_prime = _constants(c, c_prime)
        h, delta = stage_parameters(n, p, c, c_prime)
        return cls(n=n, L=L, levels=levels, p=p, h=h, delta=delta, c=c, c_prime=c_prime, forced=True)

    def to_dict(self) -> dict:
        return {
            'L': self.L,
            'p': list(self.p),
            'h': list(self.h[1:]),
            'delta': list(self.delta[1:]),
            'sizes': [len(self.members(i)) for i in range(self.L + 1)],
            'levels': {str(v): level for v, level in sorted(self.levels.items())},
        }


def _constants(c, c_prime):
    defaults = settings.ROUTINGLAB
    return (defaults['HIERARCHY_C'] if c is None else c,
            defaults['HIERARCHY_C_PRIME'] if c_prime is None else c_prime)


def sample_levels(n: int, L: int, seed: int = 0, c: float | None = None, c_prime: float | None = None,
                  p: Sequence[float] | None = None) -> Hierarchy:
    """
    Draw every node's level. L is clamped to 1..ceil(log log n) unless
    explicit probabilities p_0..p_L are given.
    """
    if p is None:
        L = clamp_stages(n, L)
        p = landmark_probabilities(n, L)
    else:
        p = tuple(float(x) for x in p)
        L = len(p) - 1
        if L < 1 or p[0] != 1.0 or any(a < b for a, b in zip(p, p[1:])):
            raise ValueError("probabilities must start at 1 and be non-increasing")
    c, c_prime = _constants(c, c_prime)
    levels = {v: _level(RandomStream(seed, v).random(), p) for v in range(1, n + 1)}
    h, delta = stage_parameters(n, p, c, c_prime)
    hierarchy = Hierarchy(n=n, L=L, levels=levels, p=tuple(p), h=h, delta=delta, c=c, c_prime=c_prime, seed=seed)
    logger.debug("sampled hierarchy n=%d L=%d sizes=%s h=%s delta=%s", n, L,
                 [len(hierarchy.members(i)) for i in range(L + 1)], h[1:], delta[1:])
    return hierarchy
