"""
Labels and per-node routing tables of the combined scheme.

A node's label lists, per level i = 0..L, its closest landmark Y_v(i), the
distance to it and its interval in the Voronoi tree of Y_v(i). Its table
holds its slice of the short-range tables, the tree tables, the skeleton
nodes it has pointers to and the spanner.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, NamedTuple

from congest.codec import message_bits
from congest.config import SimConfig
from congest.engine import RoundTrace
from graphs.graph import WeightedGraph
from shortrange.construction import ShortRangeTables, StageTable, build_short_range
from shortrange.hierarchy import Hierarchy, sample_levels
from shortrange.trees import TreeLabel, TreeTable
from skeleton.paths import SpannerPaths, reverse_paths
from skeleton.spanner import SkeletonSpanner, build_spanner, skeleton_parameters

from .params import RoutingParams, routing_parameters

logger = logging.getLogger(__name__)


class SkeletonPointer(NamedTuple):
    next: int
    d: int


@dataclass(frozen=True)
class NodeLabel:
    node: int
    levels: tuple[TreeLabel, ...]

    def Y(self, i: int) -> int:
        return self.levels[i].root

    def d(self, i: int) -> int:
        return self.levels[i].dist

    def bits(self, word: int) -> int:
        return message_bits([value for level in self.levels for value in level], word)

    def to_dict(self) -> dict:
        return {'node': self.node, 'levels': [list(level) for level in self.levels]}


@dataclass(frozen=True)
class RoutingTable:
    node: int
    L: int
    stages: tuple[StageTable, ...]
    trees: tuple[TreeTable, ...]
    skeleton: dict[int, SkeletonPointer]
    spanner: SkeletonSpanner

    def bits(self, word: int) -> int:
        fields = []
        for stage in self.stages:
            fields += [stage.Y, stage.dY, stage.parent or 0]
            for entry in stage.H.values():
                fields += [entry.u, entry.d, entry.next]
        for tree in self.trees:
            fields += [tree.root, tree.parent or 0, tree.dist, tree.enter, tree.exit]
            for child in tree.children:
                fields += list(child)
        for s, pointer in self.skeleton.items():
            fields += [s, pointer.next, pointer.d]
        for edge in self.spanner.edges:
            fields += [edge.s, edge.t, edge.w]
        return message_bits(fields, word)


@dataclass(frozen=True)
class RoutingTables:
    """Everything the build leaves at the nodes, indexable by node."""
    params: RoutingParams
    short_range: ShortRangeTables
    spanner: SkeletonSpanner
    paths: SpannerPaths
    tables: dict[int, RoutingTable]

    def __getitem__(self, v: int) -> RoutingTable:
        return self.tables[v]

    def __iter__(self) -> Iterator[int]:
        return iter(self.tables)

    def __len__(self) -> int:
        return len(self.tables)

    @property
    def hierarchy(self) -> Hierarchy:
        return self.short_range.hierarchy

    def size_report(self, word: int) -> dict[str, int]:
        sizes = [table.bits(word) for table in self.tables.values()]
        return {'max_table_bits': max(sizes), 'mean_table_bits': sum(sizes) // len(sizes)}


def skeleton_pointers(short_range: ShortRangeTables, paths: SpannerPaths, v: int) -> dict[int, SkeletonPointer]:
    """S_v: Y_v(L) through the tree parent, plus every spanner-edge endpoint v has a pointer to."""
    L = short_range.L
    top = short_range.stage(v, L)
    pointers = {s: SkeletonPointer(p.next, p.rem) for s, p in paths.reachable(v).items()}
    via_tree = SkeletonPointer(v if top.parent is None else top.parent, top.dY)
    if top.Y not in pointers or via_tree.d < pointers[top.Y].d:
        pointers[top.Y] = via_tree
    return pointers


def make_label(short_range: ShortRangeTables, v: int) -> NodeLabel:
    return NodeLabel(node=v, levels=tuple(short_range.tree_label(v, i) for i in range(short_range.L + 1)))


def build_tables(g: WeightedGraph, alpha, cfg: SimConfig | None = None, seed: int = 0,
                 hierarchy: Hierarchy | None = None) -> tuple[dict[int, NodeLabel], RoutingTables, RoundTrace]:
    """
    Short-range stages, the skeleton spanner on S_L and the reversed spanner
    paths. A prebuilt hierarchy fixes the landmark levels (and with it L).
    """
    cfg = cfg or SimConfig.for_graph(g.n)
    params = routing_parameters(g.n, alpha)
    if hierarchy is None:
        hierarchy = sample_levels(g.n, params.L, seed=seed, c=cfg.c, c_prime=cfg.c_prime)
    elif hierarchy.L != params.L:
        params = RoutingParams(n=params.n, alpha=params.alpha, k=params.k, L=hierarchy.L)
    logger.info("building routing tables: n=%d alpha=%s k=%d L=%d", g.n, params.alpha, params.k, params.L)

    trace = RoundTrace()
    short_range, _, short_trace = build_short_range(g, hierarchy, cfg, seed)
    trace.absorb(short_trace, 'short-range')

    landmarks = short_range.hierarchy.members(params.L)
    skeleton = skeleton_parameters(g.n, landmarks, k=params.k, c=cfg.skeleton_c)
    spanner, spanner_trace = build_spanner(g, skeleton, cfg, seed)
    trace.absorb(spanner_trace, 'skeleton spanner')
    paths, paths_trace = reverse_paths(g, spanner, cfg, seed)
    trace.absorb(paths_trace, 'reverse paths')

    tables = {
        v: RoutingTable(
            node=v,
            L=params.L,
            stages=short_range.stages[v],
            trees=tuple(short_range.tree_table(v, i) for i in range(params.L + 1)),
            skeleton=skeleton_pointers(short_range, paths, v),
            spanner=spanner,
        )
        for v in g.nodes
    }
    labels = {v: make_label(short_range, v) for v in g.nodes}
    result = RoutingTables(params=params, short_range=short_range, spanner=spanner, paths=paths, tables=tables)
    logger.info("routing tables installed: %d rounds, %d retries", trace.rounds, trace.retries)
    return labels, result, trace
