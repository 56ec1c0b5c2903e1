"""
Parameters of the routing scheme derived from the table-size exponent alpha.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from shortrange.hierarchy import clamp_stages


@dataclass(frozen=True)
class RoutingParams:
    n: int
    alpha: Fraction
    k: int
    L: int

    @property
    def stretch(self) -> int:
        """8kL - 1."""
        return 8 * self.k * self.L - 1

    @property
    def tight_stretch(self) -> int:
        """4k 4^L + 2k - 1, the bound with labels 1..n."""
        return 4 * self.k * 4 ** self.L + 2 * self.k - 1

    def to_dict(self) -> dict:
        return {'alpha': str(self.alpha), 'k': self.k, 'L': self.L,
                'stretch': self.stretch, 'tight_stretch': self.tight_stretch}


def routing_parameters(n: int, alpha) -> RoutingParams:
    """
    k = ceil(1/(2 alpha - 1)) when alpha >= 1/2 + 1/log n, otherwise log n;
    L = ceil(log(k + 1)), at most ceil(log log n).
    """
    alpha = Fraction(str(alpha)) if not isinstance(alpha, Fraction) else alpha
    if not Fraction(1, 2) <= alpha <= 1:
        raise ValueError(f"alpha must lie in [1/2, 1], got {alpha}")
    log_n = math.log2(n) if n > 1 else 1.0
    if n > 2 and float(alpha) >= 0.5 + 1 / log_n:
        k = math.ceil(1 / (2 * alpha - 1))
    else:
        k = max(1, math.ceil(log_n))
    L = clamp_stages(n, math.ceil(math.log2(k + 1)))
    return RoutingParams(n=n, alpha=alpha, k=k, L=L)
