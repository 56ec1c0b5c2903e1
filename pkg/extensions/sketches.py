"""
Distance sketches of size about n^(1/(2k)).

Stages 1..k are the short-range construction with |S_i| ~ n^(1-i/(2k)); S_k
is the skeleton. Its spanner gives every node the surrogate distance

    wd'(v, s) = wd(v, Y_v(k)) + wd^k(Y_v(k), s)        for s in S_k.

Levels k+1 .. 2k-1 are sampled inside S_k and announced; each node then
derives Y_v(i) and H_v(i) locally from wd'. H_v(2k) is all of S_(2k-1), so
every label finds a match.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from congest.broadcast import broadcast_all
from congest.codec import message_bits
from congest.config import SimConfig
from congest.engine import RoundTrace, with_retries
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle
from shortrange.construction import ShortRangeTables, build_short_range
from shortrange.hierarchy import Hierarchy, sample_levels
from skeleton.spanner import SkeletonSpanner, build_spanner, skeleton_parameters

logger = logging.getLogger(__name__)


def stretch_bound(k: int) -> int:
    return 2 * k * (8 * k - 3)


def sketch_probabilities(n: int, k: int) -> tuple[float, ...]:
    """p_i = n^(-i/(2k)) for i = 0..k."""
    return tuple(float(n) ** (-i / (2 * k)) for i in range(k + 1))


def entry_bound(n: int, k: int, c: float) -> int:
    """Accepted number of entries of one upper sketch level."""
    return math.ceil(c * float(n) ** (1 / (2 * k)) * max(1.0, math.log2(n) if n > 1 else 1.0))


def check_k(n: int, k: int) -> None:
    if k < 1 or k > max(1.0, math.log2(n) if n > 1 else 1.0):
        raise ValueError(f"k must lie in 1..log n, got {k} for n={n}")


@dataclass(frozen=True)
class SketchLabel:
    """(Y_v(i), d(i)) for i = 0..2k-1."""
    node: int
    levels: tuple[tuple[int, int], ...]

    def Y(self, i: int) -> int:
        return self.levels[i][0]

    def d(self, i: int) -> int:
        return self.levels[i][1]

    def bits(self, word: int) -> int:
        return message_bits([value for level in self.levels for value in level], word)

    def to_dict(self) -> dict:
        return {'node': self.node, 'levels': [list(level) for level in self.levels]}


@dataclass(frozen=True)
class Sketch:
    """H[i] maps each u in H_v(i) to the stored distance, i = 1..2k (H[0] is empty)."""
    node: int
    H: tuple[dict[int, int], ...]

    @property
    def entries(self) -> int:
        return sum(len(level) for level in self.H)

    def bits(self, word: int) -> int:
        return message_bits([value for level in self.H for item in level.items() for value in item], word)

    def to_dict(self) -> dict:
        return {'node': self.node, 'H': [[[u, d] for u, d in sorted(level.items())] for level in self.H[1:]]}


@dataclass(frozen=True)
class Sketches:
    k: int
    levels: dict[int, int]
    short_range: ShortRangeTables
    spanner: SkeletonSpanner
    sketches: dict[int, Sketch]

    def __getitem__(self, v: int) -> Sketch:
        return self.sketches[v]

    def __len__(self) -> int:
        return len(self.sketches)

    @property
    def stretch_bound(self) -> int:
        return stretch_bound(self.k)

    def members(self, i: int) -> frozenset[int]:
        """S_i for i = 0..2k-1."""
        return frozenset(v for v, level in self.levels.items() if level >= i)

    def surrogate(self, v: int, s: int) -> float:
        top = self.short_range.stage(v, self.k)
        return top.dY + self.spanner.wd(top.Y, s)

    def size_report(self, word: int) -> dict[str, int]:
        entries = [sketch.entries for sketch in self.sketches.values()]
        sizes = [sketch.bits(word) for sketch in self.sketches.values()]
        return {'max_sketch_entries': max(entries), 'max_sketch_bits': max(sizes),
                'mean_sketch_bits': sum(sizes) // len(sizes)}

    def to_dict(self) -> dict:
        return {
            'k': self.k,
            'sizes': [len(self.members(i)) for i in range(2 * self.k)],
            'spanner': self.spanner.to_dict(),
            'sketches': {str(v): sketch.to_dict() for v, sketch in sorted(self.sketches.items())},
        }


def _upper_levels(skeleton: frozenset[int], n: int, k: int, seed: int, attempt: int) -> dict[int, int]:
    """Each s in S_k climbs from level k with probability n^(-1/(2k)) per step, up to 2k-1."""
    q = float(n) ** (-1 / (2 * k))
    levels = {}
    for s in sorted(skeleton):
        rng = np.random.default_rng([seed, s, k, attempt])
        level = k
        while level < 2 * k - 1 and rng.random() < q:
            level += 1
        levels[s] = level
    return levels


def _local_view(short_range: ShortRangeTables, spanner: SkeletonSpanner, upper: dict[int, int], k: int,
                v: int) -> tuple[list[dict[int, int]], list[tuple[int, int]]]:
    """Levels k+1..2k of H_v and the label entries k..2k-1, from wd' only."""
    top = short_range.stage(v, k)
    surrogate = {s: top.dY + spanner.wd(top.Y, s) for s in upper}
    H, label = [], [(top.Y, top.dY)]
    for i in range(k + 1, 2 * k):
        y = min((s for s, level in upper.items() if level >= i), key=lambda s: (surrogate[s], s))
        H.append({s: surrogate[s] for s, level in upper.items() if level >= i - 1 and surrogate[s] <= surrogate[y]})
        label.append((y, surrogate[y]))
    H.append({s: surrogate[s] for s, level in upper.items() if level >= 2 * k - 1})
    return H, label


def _assemble(g: WeightedGraph, short_range: ShortRangeTables, spanner: SkeletonSpanner, upper: dict[int, int],
              k: int) -> tuple[Sketches, dict[int, SketchLabel]]:
    levels = dict(short_range.hierarchy.levels)
    levels.update(upper)
    sketches, labels = {}, {}
    for v in g.nodes:
        H, label = [{}], [(v, 0)]
        for i in range(1, k + 1):
            stage = short_range.stage(v, i)
            H.append({u: entry.d for u, entry in stage.H.items()})
            if i < k:
                label.append((stage.Y, stage.dY))
        if any(level >= 2 * k - 1 for level in upper.values()):
            upper_H, upper_label = _local_view(short_range, spanner, upper, k, v)
            H.extend(upper_H)
            label.extend(upper_label)
        sketches[v] = Sketch(node=v, H=tuple(H))
        labels[v] = SketchLabel(node=v, levels=tuple(label))
    return Sketches(k=k, levels=levels, short_range=short_range, spanner=spanner, sketches=sketches), labels


def validate_sketches(g: WeightedGraph, sketches: Sketches, cfg: SimConfig, oracle: DistanceOracle | None) -> list[str]:
    k = sketches.k
    top = sketches.members(2 * k - 1)
    if not top:
        return [f"S_{2 * k - 1} is empty"]
    problems = []
    bound = entry_bound(g.n, k, cfg.c)
    for v, sketch in sketches.sketches.items():
        for i in range(k + 1, 2 * k + 1):
            if len(sketch.H[i]) > bound:
                problems.append(f"node {v}: |H_{v}({i})| = {len(sketch.H[i])} exceeds {bound}")
    if oracle is None or problems:
        return problems

    for v in g.nodes:
        stage = sketches.short_range.stage(v, k)
        for s in sketches.members(k):
            estimate = sketches.surrogate(v, s)
            if estimate < oracle.wd(v, s):
                problems.append(f"wd'({v}, {s}) = {estimate} is below wd")
            elif estimate > stage.dY + (2 * k - 1) * oracle.wd(stage.Y, s):
                problems.append(f"wd'({v}, {s}) = {estimate} exceeds the spanner guarantee")
    return problems


def build_sketches(g: WeightedGraph, k: int, cfg: SimConfig | None = None, seed: int = 0,
                   hierarchy: Hierarchy | None = None) -> tuple[Sketches, dict[int, SketchLabel], RoundTrace]:
    """
    Sketches and labels for every node. A prebuilt hierarchy must have k
    stages; it replaces the sampled S_0 .. S_k.
    """
    check_k(g.n, k)
    cfg = cfg or SimConfig.for_graph(g.n)
    oracle = DistanceOracle(g) if cfg.oracle else None
    if hierarchy is None:
        hierarchy = sample_levels(g.n, k, seed=seed, c=cfg.c, c_prime=cfg.c_prime, p=sketch_probabilities(g.n, k))
    elif hierarchy.L != k:
        raise ValueError(f"the hierarchy has {hierarchy.L} stages, sketches with k={k} need {k}")
    logger.info("building sketches: n=%d k=%d", g.n, k)

    trace = RoundTrace()
    short_range, _, short_trace = build_short_range(g, hierarchy, cfg, seed)
    trace.absorb(short_trace, 'short-range')
    skeleton = short_range.hierarchy.members(k)
    spanner, spanner_trace = build_spanner(g, skeleton_parameters(g.n, skeleton, k=k, c=cfg.skeleton_c), cfg, seed)
    trace.absorb(spanner_trace, 'skeleton spanner')

    def attempt(index):
        upper = _upper_levels(skeleton, g.n, k, seed, index)
        _, cast_trace = broadcast_all(g, {s: [(s, level)] for s, level in upper.items()}, cfg, seed=seed)
        trace.absorb(cast_trace, 'upper levels')
        return _assemble(g, short_range, spanner, upper, k)

    sketches, labels = with_retries(attempt, lambda built: validate_sketches(g, built[0], cfg, oracle),
                                    cfg.retry_budget, trace, 'sketch levels')
    logger.info("sketches built: %d rounds, %d retries, max %d entries", trace.rounds, trace.retries,
                max(sketch.entries for sketch in sketches.sketches.values()))
    return sketches, labels, trace


def sketch_estimate(sketch: Sketch, label: SketchLabel) -> int:
    """Smallest i with Y_w(i-1) in H_v(i): the stored distance plus d_w(i-1)."""
    for i in range(1, len(sketch.H)):
        d = sketch.H[i].get(label.Y(i - 1))
        if d is not None:
            return d + label.d(i - 1)
    raise KeyError(f"node {sketch.node} has no sketch entry for the label of {label.node}")
