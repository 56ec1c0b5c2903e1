"""
Weighted diameter within a factor 2k + 1.

A random skeleton S (each node with probability n^(-1/2)) gets a
(2k-1)-spanner whose diameter WD^k every node computes locally. One BSP run
with all of S as a single source (delta = 1) gives each node its distance to
S; the largest of these, d_max, is found by a convergecast. The output is
2 d_max + WD^k.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

from bsp.protocol import bsp
from congest.broadcast import aggregate_max, build_bfs_tree
from congest.config import SimConfig
from congest.engine import RoundTrace, with_retries
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle
from skeleton.spanner import build_spanner, random_skeleton, skeleton_parameters

from .sketches import check_k

logger = logging.getLogger(__name__)


def coverage_range(n: int, c: float) -> int:
    """h = ceil(c sqrt(n) log n), clamped to 1..n-1."""
    log_n = math.log2(n) if n > 1 else 0.0
    return max(1, min(n - 1, math.ceil(c * math.sqrt(n) * log_n)))


@dataclass(frozen=True)
class DiameterEstimate:
    estimate: int
    d_max: int
    spanner_diameter: int
    k: int
    skeleton: frozenset[int]
    coverage: dict[int, int | None]

    @property
    def bound(self) -> int:
        return 2 * self.k + 1

    def to_dict(self) -> dict:
        return {
            'estimate': self.estimate,
            'd_max': self.d_max,
            'spanner_diameter': self.spanner_diameter,
            'k': self.k,
            'skeleton': sorted(self.skeleton),
        }


def validate_estimate(g: WeightedGraph, result: DiameterEstimate | None, oracle: DistanceOracle | None) -> list[str]:
    if result is None:
        return ["the skeleton sample is empty"]
    problems = [f"node {v} is not within range of the skeleton" for v, d in result.coverage.items() if d is None]
    if oracle is None or problems:
        return problems
    for v, d in result.coverage.items():
        exact = min(oracle.wd(v, s) for s in result.skeleton)
        if d != exact:
            problems.append(f"node {v}: distance {d} to the skeleton, exact {exact}")
    return problems


def approx_diameter(g: WeightedGraph, k: int, cfg: SimConfig | None = None, seed: int = 0,
                    skeleton: Iterable[int] | None = None) -> tuple[DiameterEstimate, RoundTrace]:
    """Pass skeleton to fix S; a fixed skeleton is never redrawn."""
    check_k(g.n, k)
    cfg = cfg or SimConfig.for_graph(g.n)
    oracle = DistanceOracle(g) if cfg.oracle else None
    forced = None if skeleton is None else frozenset(skeleton)
    h = coverage_range(g.n, cfg.skeleton_c)
    trace = RoundTrace()
    tree, tree_trace = build_bfs_tree(g, cfg, seed)
    trace.absorb(tree_trace, 'bfs-tree')

    def attempt(index):
        S = forced if forced is not None else random_skeleton(g.n, seed, index)
        if not S:
            return None
        spanner, spanner_trace = build_spanner(g, skeleton_parameters(g.n, S, k=k, c=cfg.skeleton_c), cfg, seed)
        trace.absorb(spanner_trace, 'skeleton spanner')
        spanner_diameter = max(d for row in spanner.distances.values() for d in row.values())

        lists, bsp_trace = bsp(g, h, 1, {v: 1 for v in S}, cfg, seed)
        trace.absorb(bsp_trace, 'coverage bsp')
        coverage = {v: (lists.final(v)[0].d if lists.final(v) else None) for v in g.nodes}
        d_max, gather_trace = aggregate_max(g, {v: d or 0 for v, d in coverage.items()}, cfg, tree, seed)
        trace.absorb(gather_trace, 'max distance')
        logger.debug("diameter attempt %d: |S| = %d, d_max = %d, WD^k = %d",
                     index, len(S), d_max, spanner_diameter)
        return DiameterEstimate(estimate=2 * d_max + spanner_diameter, d_max=d_max,
                                spanner_diameter=spanner_diameter, k=k, skeleton=S, coverage=coverage)

    budget = 0 if forced is not None else cfg.retry_budget
    result = with_retries(attempt, lambda candidate: validate_estimate(g, candidate, oracle), budget, trace,
                          'diameter')
    logger.info("diameter estimate %d (k=%d) after %d rounds", result.estimate, k, trace.rounds)
    return result, trace
