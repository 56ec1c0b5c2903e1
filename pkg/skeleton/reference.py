"""
Centralized counterparts used to check the simulated spanner: the h-hop
skeleton graph and sequential Baswana-Sen run on it, with the same marks and
each node seeing only its delta closest clusters.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import networkx as nx

from graphs.graph import WeightedGraph
from graphs.oracles import hop_bounded_dist


def skeleton_distances(g: WeightedGraph, S: Iterable[int], h: int) -> dict[int, dict[int, int]]:
    """wd_h(s, t) for skeleton pairs within h hops; farther pairs are absent."""
    S = sorted(S)
    rows = {}
    for s in S:
        dist_h = hop_bounded_dist(g, s, h).dist_h
        rows[s] = {t: int(dist_h[t]) for t in S if t != s and dist_h[t] != math.inf}
    return rows


def skeleton_graph(g: WeightedGraph, S: Iterable[int], h: int) -> nx.Graph:
    S = sorted(S)
    graph = nx.Graph()
    graph.add_nodes_from(S)
    for s, row in skeleton_distances(g, S, h).items():
        graph.add_weighted_edges_from((s, t, d) for t, d in row.items() if s < t)
    return graph


def closest_clusters(skeleton: nx.Graph, v: int, leader: dict[int, int | None], marked: set[int],
                     delta: int) -> list[tuple[int, int, int]]:
    """
    (cluster, weight, member) for the delta clusters closest to v, ascending
    by (weight, cluster, mark). v's own cluster comes first at weight 0; the
    lightest member of every other cluster is the one with the smallest id.
    """
    best = {leader[v]: (0, v)}
    for t, attrs in skeleton[v].items():
        c = leader.get(t)
        if c is None or c == leader[v]:
            continue
        candidate = (attrs['weight'], t)
        if c not in best or candidate < best[c]:
            best[c] = candidate
    ranked = sorted(best.items(), key=lambda item: (item[1][0], item[0], int(item[0] in marked)))
    return [(c, w, t) for c, (w, t) in ranked[:delta]]


def reference_spanner(g: WeightedGraph, S: Iterable[int], k: int, h: int, delta: int,
                      marks: Sequence[Iterable[int]]) -> set[tuple[int, int, int]]:
    """
    Sequential Baswana-Sen on skeleton_graph: marks[i] is the set of clusters
    surviving phase i + 1 (the last phase keeps none). Returns (s, t, w) with
    s < t.
    """
    skeleton = skeleton_graph(g, S, h)
    leader: dict[int, int | None] = {v: v for v in sorted(S)}
    edges = {}
    for phase in range(k):
        marked = set(marks[phase]) if phase < k - 1 else set()
        following = {}
        for v, c in sorted(leader.items()):
            if c is None or c in marked:
                following[v] = c
                continue
            following[v] = None
            for cluster, w, t in closest_clusters(skeleton, v, leader, marked, delta):
                if cluster == c:
                    continue
                edges.setdefault((min(v, t), max(v, t)), w)
                if cluster in marked:
                    following[v] = cluster
                    break
        leader = following
    return {(s, t, w) for (s, t), w in edges.items()}
