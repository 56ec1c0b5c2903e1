"""
Stateless next-hop and distance decisions.

decide() looks only at the local table and the destination label. It takes
the smallest of three kinds of candidate routes:

  (a) a level i at which v and w share a Voronoi cell: tree routing;
  (b) a level i at which Y_w(i-1) is in H_v(i): to that landmark, then down;
  (c) through a skeleton node s of S_v and the spanner to Y_w(L).

Ties go to the smaller level, then the kind, then the smaller node id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple

from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle, dijkstra
from shortrange.trees import tree_next_hop

from .exceptions import RoutingLoopError
from .tables import NodeLabel, RoutingTable

SHARED_CELL, VIA_LANDMARK, VIA_SKELETON = 0, 1, 2


class Decision(NamedTuple):
    next: int
    d: int


def candidates(table: RoutingTable, label: NodeLabel) -> Iterator[tuple[int, int, int, int, int]]:
    """(d, level, kind, intermediate node, next hop) for every usable route."""
    v, L = table.node, table.L
    for i in range(L + 1):
        if table.stages[i].Y == label.Y(i):
            next_hop, d = tree_next_hop(table.trees[i], label.levels[i])
            yield d, i, SHARED_CELL, label.Y(i), next_hop

    for i in range(1, L + 1):
        u = label.Y(i - 1)
        if u == v:
            continue
        entry = table.stages[i].H.get(u)
        if entry is not None:
            yield entry.d + label.d(i - 1), i, VIA_LANDMARK, u, entry.next

    target = label.Y(L)
    for s, pointer in table.skeleton.items():
        if s == v:
            continue
        through = table.spanner.wd(s, target)
        if through < math.inf:
            yield pointer.d + through + label.d(L), L + 1, VIA_SKELETON, s, pointer.next


def decide(table: RoutingTable, label: NodeLabel) -> Decision:
    d, _, _, _, next_hop = min(candidates(table, label))
    return Decision(next_hop, d)


def estimate_distance(table: RoutingTable, label: NodeLabel) -> int:
    return decide(table, label).d


@dataclass(frozen=True)
class RouteResult:
    path: tuple[int, ...]
    weight: int
    estimate: int | None
    stretch: float
    oracle_wd: float

    @property
    def hops(self) -> int:
        return len(self.path) - 1

    def to_dict(self) -> dict:
        return {'path': list(self.path), 'weight': self.weight, 'estimate': self.estimate,
                'stretch': self.stretch, 'oracle_wd': self.oracle_wd}


def result(g: WeightedGraph, path: list[int], estimate: int | None, oracle: DistanceOracle | None) -> RouteResult:
    v, w = path[0], path[-1]
    weight = sum(g.weight(a, b) for a, b in zip(path, path[1:]))
    wd = oracle.wd(v, w) if oracle is not None else dijkstra(g, v).dist[w]
    return RouteResult(path=tuple(path), weight=weight, estimate=estimate,
                       stretch=1.0 if v == w else weight / wd, oracle_wd=wd)


def route(g: WeightedGraph, tables: Mapping[int, RoutingTable], labels: Mapping[int, NodeLabel], v: int, w: int,
          oracle: DistanceOracle | None = None) -> RouteResult:
    """Apply decide hop by hop; every hop must lower the estimate by at least the edge weight."""
    label = labels[w]
    current = decide(tables[v], label)
    estimate = current.d
    path, x = [v], v
    while current.next != x:
        next_hop = current.next
        following = decide(tables[next_hop], label)
        if following.d > current.d - g.weight(x, next_hop):
            raise RoutingLoopError(v, w, path + [next_hop])
        x, current = next_hop, following
        path.append(x)
    if x != w:
        raise RoutingLoopError(v, w, path)
    return result(g, path, estimate, oracle)
