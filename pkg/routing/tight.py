"""
Routing with labels 1..n.

Every landmark s of S_i owns a block of count_s(i) consecutive labels: the
labels of all nodes whose chain v_0 = v, v_j = Y_(v_(j-1))(j) reaches s at
level i. Skeleton nodes take their blocks in id order; inside a level-i cell
the blocks of S_(i-1) follow the preorder of the Voronoi tree, with the
root's own level-(i-1) block first. Counts and block starts are computed
with the same subtree sweep that numbers the trees.

A message climbs v_0, v_1, ... until w_i is in H_(v_i)(i+1) (or level L is
reached and the spanner takes over), then descends w_i, w_(i-1), ..., w
inside the Voronoi trees by label ranges.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

from bsp.protocol import bsp
from congest.broadcast import broadcast_all
from congest.config import SimConfig
from congest.engine import RoundTrace
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle
from shortrange.trees import TreeTable, preorder_ranges

from .decide import RouteResult, result
from .exceptions import RoutingLoopError
from .tables import RoutingTables

logger = logging.getLogger(__name__)

Block = tuple[int, int]


def _inside(label: int, block: Block) -> bool:
    return block[0] <= label <= block[1]


@dataclass(frozen=True)
class TightLabeling:
    """
    labels: lambda(v). counts[i][s] for s in S_i. trees[i] (i >= 1): label
    ranges of every node's subtree in its level-i tree; own[i][v] is the
    level-(i-1) block of v (empty for nodes outside S_(i-1)). known[i][v]
    maps each u in H_v(i) to its level-(i-1) block.
    """
    labels: dict[int, int]
    counts: tuple[dict[int, int], ...]
    trees: tuple[dict[int, TreeTable], ...]
    own: tuple[dict[int, Block], ...]
    known: tuple[dict[int, dict[int, Block]], ...]

    @property
    def L(self) -> int:
        return len(self.counts) - 1

    def block(self, i: int, s: int) -> Block:
        start = self.labels[s]
        return start, start + self.counts[i][s] - 1

    def top_owner(self, label: int) -> int:
        """The skeleton node whose level-L block holds label (known to every node)."""
        for s in self.counts[self.L]:
            if _inside(label, self.block(self.L, s)):
                return s
        raise KeyError(label)

    @cached_property
    def _nodes(self) -> dict[int, int]:
        return {label: v for v, label in self.labels.items()}

    def node_of(self, label: int) -> int:
        return self._nodes[label]

    def to_dict(self) -> dict:
        return {
            'labels': {str(v): label for v, label in sorted(self.labels.items())},
            'counts': [{str(s): count for s, count in sorted(level.items())} for level in self.counts],
        }


def assign_tight_labels(g: WeightedGraph, tables: RoutingTables, cfg: SimConfig | None = None,
                        seed: int = 0) -> tuple[TightLabeling, RoundTrace]:
    cfg = cfg or SimConfig.for_graph(g.n)
    short_range = tables.short_range
    hier, L = short_range.hierarchy, short_range.L
    trace = RoundTrace()
    parents = [{}] + [{v: short_range.stage(v, i).parent for v in g.nodes} for i in range(1, L + 1)]

    counts = [{v: 1 for v in g.nodes}]
    for i in range(1, L + 1):
        weights = {v: counts[i - 1].get(v, 0) for v in g.nodes}
        ranges, level_trace = preorder_ranges(g, parents[i], cfg, weights=weights, seed=seed)
        trace.absorb(level_trace, f'level {i} counts')
        counts.append({s: ranges[s][1] - ranges[s][0] + 1 for s in sorted(hier.members(i))})

    top = sorted(hier.members(L))
    _, cast_trace = broadcast_all(g, {s: [(s, counts[L][s])] for s in top}, cfg, seed=seed)
    trace.absorb(cast_trace, 'top counts')
    labels, position = {}, 1
    for s in top:
        labels[s] = position
        position += counts[L][s]

    trees: list[dict[int, TreeTable]] = [{} for _ in range(L + 1)]
    own: list[dict[int, Block]] = [{} for _ in range(L + 1)]
    for i in range(L, 0, -1):
        weights = {v: counts[i - 1].get(v, 0) for v in g.nodes}
        bases = {s: labels[s] for s in hier.members(i)}
        ranges, level_trace = preorder_ranges(g, parents[i], cfg, weights=weights, bases=bases, seed=seed)
        trace.absorb(level_trace, f'level {i} labels')
        for s in hier.members(i - 1) - hier.members(i):
            labels[s] = ranges[s][0]
        for v, (start, end, children) in ranges.items():
            stage = short_range.stage(v, i)
            trees[i][v] = TreeTable(node=v, root=stage.Y, parent=stage.parent, dist=stage.dY,
                                    enter=start, exit=end, children=children)
            own[i][v] = (start, start + weights[v] - 1)

    known: list[dict[int, dict[int, Block]]] = [{}]
    for i in range(1, L + 1):
        sources = {u: (u, labels[u], labels[u] + counts[i - 1][u] - 1) for u in hier.members(i - 1)}
        lists, level_trace = bsp(g, hier.h[i], hier.delta[i], sources, cfg, seed)
        trace.absorb(level_trace, f'level {i} blocks')
        level = {}
        for v in g.nodes:
            H = short_range.stage(v, i).H
            level[v] = {entry.s[0]: (entry.s[1], entry.s[2]) for entry in lists.final(v) if entry.s[0] in H}
        known.append(level)

    labeling = TightLabeling(labels=labels, counts=tuple(counts), trees=tuple(trees), own=tuple(own),
                             known=tuple(known))
    logger.info("tight labels assigned to %d nodes in %d rounds", len(labels), trace.rounds)
    return labeling, trace


class _Walk:
    """Accumulates the physical path; every leg is bounded by n hops."""

    def __init__(self, g: WeightedGraph, source: int, target: int):
        self.g = g
        self.source = source
        self.target = target
        self.path = [source]

    @property
    def at(self) -> int:
        return self.path[-1]

    def move(self, x: int, hops: int) -> None:
        if hops > self.g.n:
            raise RoutingLoopError(self.source, self.target, self.path + [x])
        self.path.append(x)


def tight_route(g: WeightedGraph, tables: RoutingTables, labeling: TightLabeling, v: int, label: int,
                oracle: DistanceOracle | None = None) -> RouteResult:
    short_range, L = tables.short_range, labeling.L
    walk = _Walk(g, v, labeling.node_of(label))

    i = 0
    while True:
        x = walk.at
        if i == L:
            _long_range(tables, walk, labeling.top_owner(label))
            break
        hit = next((u for u, block in sorted(labeling.known[i + 1][x].items()) if _inside(label, block)), None)
        if hit is not None:
            hops = 0
            while walk.at != hit:
                entry = short_range.stage(walk.at, i + 1).H.get(hit)
                if entry is None:
                    raise RoutingLoopError(walk.source, walk.target, walk.path)
                hops += 1
                walk.move(entry.next, hops)
            break
        hops = 0
        while short_range.stage(walk.at, i + 1).parent is not None:
            hops += 1
            walk.move(short_range.stage(walk.at, i + 1).parent, hops)
        i += 1

    while i > 0:
        hops = 0
        while not _inside(label, labeling.own[i][walk.at]):
            child = labeling.trees[i][walk.at].child_towards(label)
            if child is None:
                raise RoutingLoopError(walk.source, walk.target, walk.path)
            hops += 1
            walk.move(child, hops)
        i -= 1

    if walk.at != walk.target:
        raise RoutingLoopError(walk.source, walk.target, walk.path)
    return result(g, walk.path, None, oracle)


def _long_range(tables: RoutingTables, walk: _Walk, target: int) -> None:
    """Spanner leg between two skeleton nodes; the remaining estimate drops every hop."""
    spanner = tables.spanner
    remaining = math.inf
    while walk.at != target:
        x = walk.at
        d, _, next_hop = min((pointer.d + spanner.wd(s, target), s, pointer.next)
                             for s, pointer in tables[x].skeleton.items() if s != x)
        if d >= remaining:
            raise RoutingLoopError(walk.source, walk.target, walk.path + [next_hop])
        remaining = d
        walk.path.append(next_hop)
