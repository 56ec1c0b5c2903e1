"""
Exact centralized oracles: the ground truth every distributed result is checked against.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx

from .graph import WeightedGraph

INF = math.inf


@dataclass(frozen=True)
class DistanceTable:
    """
    Single-source shortest paths.

    hops[u] is the minimum hop count among minimum-weight paths; pred follows
    such a path (ties broken by smaller predecessor id).
    """
    source: int
    dist: dict[int, float]
    pred: dict[int, int | None]
    hops: dict[int, float]

    def path_to(self, u: int) -> list[int]:
        """Node sequence source -> u along pred pointers."""
        path = [u]
        while path[-1] != self.source:
            path.append(self.pred[path[-1]])
        path.reverse()
        return path


@dataclass(frozen=True)
class HopBoundedTable:
    source: int
    h: int
    dist_h: dict[int, float]


@dataclass(frozen=True)
class GraphMetrics:
    HD: int
    WD: int
    SPD: int

    def to_dict(self):
        return {'HD': self.HD, 'WD': self.WD, 'SPD': self.SPD}


def dijkstra(g: WeightedGraph, s: int) -> DistanceTable:
    """Dijkstra on (weight, hops) keys, lexicographically."""
    dist = {v: INF for v in g.nodes}
    hops = {v: INF for v in g.nodes}
    pred: dict[int, int | None] = {v: None for v in g.nodes}
    dist[s], hops[s] = 0, 0
    heap = [(0, 0, s)]
    done = set()

    while heap:
        d, h, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u, w in g.neighbors(v).items():
            if u in done:
                continue
            key = (d + w, h + 1)
            if key < (dist[u], hops[u]):
                dist[u], hops[u] = key
                pred[u] = v
                heapq.heappush(heap, (d + w, h + 1, u))
            elif key == (dist[u], hops[u]) and v < pred[u]:
                pred[u] = v

    return DistanceTable(source=s, dist=dist, pred=pred, hops=hops)


def hop_bounded_dist(g: WeightedGraph, s: int, h: int) -> HopBoundedTable:
    """wd_h(s, .) by h rounds of Bellman-Ford relaxation."""
    if h < 0:
        raise ValueError(f"hop bound must be non-negative, got {h}")
    current = {v: INF for v in g.nodes}
    current[s] = 0
    for _ in range(h):
        updated = dict(current)
        changed = False
        for v in g.nodes:
            if current[v] == INF:
                continue
            for u, w in g.neighbors(v).items():
                if current[v] + w < updated[u]:
                    updated[u] = current[v] + w
                    changed = True
        current = updated
        if not changed:
            break
    return HopBoundedTable(source=s, h=h, dist_h=current)


def ball(g: WeightedGraph, v: int, i: int) -> frozenset[int]:
    """The i nodes closest to v, ordered by (wd(v, u), u)."""
    if not 1 <= i <= g.n:
        raise ValueError(f"ball size must be in 1..{g.n}, got {i}")
    table = dijkstra(g, v)
    ranked = sorted(g.nodes, key=lambda u: (table.dist[u], u))
    return frozenset(ranked[:i])


def metrics(g: WeightedGraph) -> GraphMetrics:
    """Hop diameter, weighted diameter and shortest-paths diameter."""
    if g.n == 1:
        return GraphMetrics(HD=0, WD=0, SPD=0)
    hd = nx.diameter(g.to_networkx())
    wd, spd = 0, 0
    for s in g.nodes:
        table = dijkstra(g, s)
        wd = max(wd, max(table.dist.values()))
        spd = max(spd, max(table.hops.values()))
    return GraphMetrics(HD=int(hd), WD=int(wd), SPD=int(spd))


class DistanceOracle:
    """All-pairs exact distances for one graph, computed lazily per source."""

    def __init__(self, g: WeightedGraph):
        self.graph = g
        self._table = lru_cache(maxsize=None)(lambda s: dijkstra(g, s))
        self._ranked = lru_cache(maxsize=None)(self._rank)

    def table(self, s: int) -> DistanceTable:
        return self._table(s)

    def wd(self, u: int, v: int) -> float:
        return self._table(u).dist[v]

    def hops(self, u: int, v: int) -> float:
        return self._table(u).hops[v]

    def _rank(self, v: int) -> tuple[int, ...]:
        table = self._table(v)
        return tuple(sorted(self.graph.nodes, key=lambda u: (table.dist[u], u)))

    def ranked(self, v: int) -> tuple[int, ...]:
        """All nodes in ball order around v."""
        return self._ranked(v)

    def in_ball(self, v: int, u: int, i: int) -> bool:
        return u in self.ranked(v)[:min(i, self.graph.n)]
