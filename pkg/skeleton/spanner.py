"""
Spanner of the h-hop skeleton graph.

Baswana-Sen clustering is simulated over virtual edges. In every phase the
clustered skeleton nodes run BSP' with their cluster as merged source id and
the cluster's mark as an extra field, so each node learns its delta closest
clusters together with the endpoint realizing each distance. Nodes of
unmarked clusters add the lightest edge to every cluster up to and including
the closest marked one; the new edges are broadcast to every node.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import AbstractSet, Iterable, Mapping, NamedTuple

import networkx as nx
import numpy as np
from django.conf import settings

from bsp.lists import Entry, LevelLists, SourceId
from bsp.protocol import bsp_prime
from congest.broadcast import BfsTree, broadcast_all, build_bfs_tree
from congest.config import SimConfig
from congest.engine import RoundTrace, with_retries
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle

from .reference import skeleton_distances

logger = logging.getLogger(__name__)


class SpannerEdge(NamedTuple):
    s: int
    t: int
    w: int
    owner: int

    @property
    def key(self) -> tuple[int, int]:
        return self.s, self.t

    def other(self, v: int) -> int:
        return self.t if v == self.s else self.s


def make_edge(owner: int, other: int, w: int) -> SpannerEdge:
    return SpannerEdge(min(owner, other), max(owner, other), w, owner)


class EdgeOrigin(NamedTuple):
    """Phase in which an edge was added and the source id its owner looked up."""
    phase: int
    source: SourceId


@dataclass(frozen=True)
class SkeletonParams:
    S: frozenset[int]
    sample: frozenset[int]
    k: int
    h: int
    delta: int

    def to_dict(self) -> dict:
        return {'S': sorted(self.S), 'sample': sorted(self.sample), 'k': self.k, 'h': self.h, 'delta': self.delta}


def skeleton_parameters(n: int, S: Iterable[int], sample: Iterable[int] | None = None, k: int = 1,
                        c: float | None = None) -> SkeletonParams:
    """
    h = ceil(c n log n / |S_R|) and delta = ceil(c |S|^(1/k) log n), clamped
    to 1..n-1 and 1..|S|. Without a sample, S itself is the random sample.
    """
    S = frozenset(S)
    sample = S if sample is None else frozenset(sample)
    if not S:
        raise ValueError("the skeleton needs at least one node")
    if not sample <= S:
        raise ValueError("the random sample must be a subset of the skeleton")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    c = settings.ROUTINGLAB['SKELETON_C'] if c is None else c
    log_n = math.log2(n) if n > 1 else 0.0
    h = max(1, min(n - 1, math.ceil(c * n * log_n / max(1, len(sample)))))
    delta = max(1, min(len(S), math.ceil(c * len(S) ** (1 / k) * log_n)))
    return SkeletonParams(S=S, sample=sample, k=k, h=h, delta=delta)


def random_skeleton(n: int, seed: int = 0, attempt: int = 0) -> frozenset[int]:
    """S_R: every node joins independently with probability n^(-1/2)."""
    p = 1 / math.sqrt(n)
    return frozenset(v for v in range(1, n + 1)
                     if np.random.default_rng([seed, v, attempt]).random() < p)


def edge_bound(n: int, size: int, k: int) -> float:
    """8 k |S|^(1+1/k) log n, the accepted number of spanner edges."""
    return 8 * k * size ** (1 + 1 / k) * max(1.0, math.log2(n) if n > 1 else 1.0)


def scan_clusters(v: int, cluster: int, entries: Iterable[Entry]) -> tuple[list[tuple[SpannerEdge, SourceId]], int | None]:
    """
    Edges node v adds from its ascending cluster list, and the marked cluster
    it joins (None when it stays unclustered).
    """
    added = []
    for entry in entries:
        c, marked = entry.s
        if c == cluster:
            continue
        added.append((make_edge(v, entry.endpoint, entry.d), entry.s))
        if marked:
            return added, c
    return added, None


@dataclass(frozen=True)
class Announcement:
    """Result of one edge-detection phase."""
    added: dict[int, tuple[tuple[SpannerEdge, SourceId], ...]]
    joined: dict[int, int | None]
    lists: LevelLists
    received: dict[int, tuple]

    @property
    def edges(self) -> list[SpannerEdge]:
        return [edge for v in sorted(self.added) for edge, _ in self.added[v]]


def detect_edges(g: WeightedGraph, clusters: Mapping[int, int | None], marked: AbstractSet[int], h: int,
                 delta: int, cfg: SimConfig | None = None, tree: BfsTree | None = None,
                 seed: int = 0) -> tuple[Announcement, RoundTrace]:
    """
    One phase of edge detection: clusters maps skeleton nodes to their
    cluster leader (None once unclustered), marked holds the surviving
    clusters. Every node of an unmarked cluster announces its new edges.
    """
    cfg = cfg or SimConfig.for_graph(g.n)
    sources = {v: (c, int(c in marked)) for v, c in clusters.items() if c is not None}
    trace = RoundTrace()
    lists, bsp_trace = bsp_prime(g, h, delta, sources, cfg, seed)
    trace.absorb(bsp_trace, 'edges bsp')

    added, joined = {}, {}
    for v, (c, mark) in sorted(sources.items()):
        if mark:
            continue
        found, target = scan_clusters(v, c, lists.final(v))
        added[v] = tuple(found)
        joined[v] = target

    items = {v: [(edge.owner, edge.other(v), edge.w) for edge, _ in found] for v, found in added.items() if found}
    received, cast_trace = broadcast_all(g, items, cfg, tree, seed)
    trace.absorb(cast_trace, 'edges broadcast')
    return Announcement(added=added, joined=joined, lists=lists, received=received), trace


@dataclass(frozen=True)
class SkeletonSpanner:
    """
    The spanner edges known at every node, the marks of every phase (R_2 ..
    R_k, then the empty set of the last phase) and, per edge, where its
    realizing path can be looked up.
    """
    params: SkeletonParams
    edges: tuple[SpannerEdge, ...]
    marks: tuple[frozenset[int], ...]
    origins: dict[tuple[int, int], EdgeOrigin]
    lists: tuple[LevelLists, ...]
    known_everywhere: bool = True

    def graph(self) -> nx.Graph:
        spanner = nx.Graph()
        spanner.add_nodes_from(sorted(self.params.S))
        spanner.add_weighted_edges_from((edge.s, edge.t, edge.w) for edge in self.edges)
        return spanner

    @cached_property
    def distances(self) -> dict[int, dict[int, int]]:
        """wd^k between all skeleton nodes."""
        return {s: dict(lengths) for s, lengths in nx.all_pairs_dijkstra_path_length(self.graph())}

    def wd(self, s: int, t: int) -> float:
        return self.distances.get(s, {}).get(t, math.inf)

    def path(self, s: int, t: int) -> list[int]:
        """Skeleton nodes of a lightest spanner path s -> t."""
        return nx.dijkstra_path(self.graph(), s, t)

    def edge(self, s: int, t: int) -> SpannerEdge:
        return self._by_key[(min(s, t), max(s, t))]

    @cached_property
    def _by_key(self) -> dict[tuple[int, int], SpannerEdge]:
        return {edge.key: edge for edge in self.edges}

    def dump(self) -> list[list[int]]:
        return [[edge.s, edge.t, edge.w, edge.owner] for edge in self.edges]

    def to_dict(self) -> dict:
        return {
            'params': self.params.to_dict(),
            'edges': self.dump(),
            'marks': [sorted(marked) for marked in self.marks],
        }


def _construct(g: WeightedGraph, params: SkeletonParams, cfg: SimConfig, tree: BfsTree, seed: int,
               attempt: int, trace: RoundTrace) -> SkeletonSpanner:
    rng = np.random.default_rng([seed, tree.root, attempt])
    clusters: dict[int, int | None] = {v: v for v in sorted(params.S)}
    chosen: dict[tuple[int, int], SpannerEdge] = {}
    origins: dict[tuple[int, int], EdgeOrigin] = {}
    marks, phase_lists = [], []
    known = True

    for i in range(1, params.k + 1):
        live = sorted({c for c in clusters.values() if c is not None})
        if i < params.k:
            size = min(len(live), max(1, math.floor(len(params.S) ** (1 - i / params.k) + 0.5)))
            marked = frozenset(int(c) for c in rng.choice(live, size=size, replace=False))
            _, cast_trace = broadcast_all(g, {tree.root: [(c,) for c in sorted(marked)]}, cfg, tree, seed)
            trace.absorb(cast_trace, f'phase {i} marks')
        else:
            marked = frozenset()

        announcement, phase_trace = detect_edges(g, clusters, marked, params.h, params.delta, cfg, tree, seed)
        trace.absorb(phase_trace, f'phase {i} edges')
        total = sum(len(found) for found in announcement.added.values())
        known = known and all(len(view) == total for view in announcement.received.values())

        for v in sorted(announcement.added):
            for edge, source in announcement.added[v]:
                if edge.key not in chosen:
                    chosen[edge.key] = edge
                    origins[edge.key] = EdgeOrigin(i - 1, source)

        clusters = {
            v: None if c is None else (c if c in marked else announcement.joined[v])
            for v, c in clusters.items()
        }
        marks.append(marked)
        phase_lists.append(announcement.lists)
        logger.debug("spanner phase %d: %d clusters, %d marked, %d edges so far",
                     i, len(live), len(marked), len(chosen))

    return SkeletonSpanner(
        params=params,
        edges=tuple(sorted(chosen.values())),
        marks=tuple(marks),
        origins=origins,
        lists=tuple(phase_lists),
        known_everywhere=known,
    )


def validate_spanner(g: WeightedGraph, spanner: SkeletonSpanner, oracle: DistanceOracle | None) -> list[str]:
    params = spanner.params
    problems = []
    if not spanner.known_everywhere:
        problems.append("some node missed a spanner edge announcement")
    bound = edge_bound(g.n, len(params.S), params.k)
    if len(spanner.edges) > bound:
        problems.append(f"{len(spanner.edges)} spanner edges exceed {bound:.0f}")
    if oracle is None:
        return problems

    exact = skeleton_distances(g, params.S, params.h)
    for edge in spanner.edges:
        if exact[edge.s].get(edge.t) != edge.w:
            problems.append(f"edge {edge.key} has weight {edge.w}, wd_h is {exact[edge.s].get(edge.t)}")

    skeleton = nx.Graph()
    skeleton.add_nodes_from(params.S)
    skeleton.add_weighted_edges_from((s, t, d) for s, row in exact.items() for t, d in row.items() if s < t)
    closure = dict(nx.all_pairs_dijkstra_path_length(skeleton))
    stretch = 2 * params.k - 1
    for s in sorted(params.S):
        for t in sorted(params.S):
            through = closure[s].get(t, math.inf)
            if through != oracle.wd(s, t):
                problems.append(f"skeleton distance {s}-{t} is {through}, wd is {oracle.wd(s, t)}")
            elif spanner.wd(s, t) > stretch * through:
                problems.append(f"spanner distance {s}-{t} is {spanner.wd(s, t)}, above {stretch} x {through}")
    return problems


def build_spanner(g: WeightedGraph, params: SkeletonParams, cfg: SimConfig | None = None,
                  seed: int = 0) -> tuple[SkeletonSpanner, RoundTrace]:
    """(2k-1)-spanner of the h-hop skeleton graph, validated and retried with fresh marks."""
    cfg = cfg or SimConfig.for_graph(g.n)
    oracle = DistanceOracle(g) if cfg.oracle else None
    trace = RoundTrace()
    tree, tree_trace = build_bfs_tree(g, cfg, seed)
    trace.absorb(tree_trace, 'bfs-tree')

    spanner = with_retries(
        lambda index: _construct(g, params, cfg, tree, seed, index, trace),
        lambda candidate: validate_spanner(g, candidate, oracle),
        cfg.retry_budget, trace, 'skeleton spanner',
    )
    logger.info("skeleton spanner built: |S| = %d, k = %d, h = %d, %d edges",
                len(params.S), params.k, params.h, len(spanner.edges))
    return spanner, trace
