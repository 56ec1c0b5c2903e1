"""
Centralized Bellman-Ford producing the same LevelLists shape as the protocol.

Without delta it keeps every source at every level (the untruncated
reference); with delta it is the sequential twin of bsp/bsp_prime.
"""
from __future__ import annotations

from typing import Mapping

from graphs.graph import WeightedGraph

from .lists import Entry, LevelLists, SourceId, normalize_sources, ordered, relax


def reference_lists(g: WeightedGraph, h: int, src: Mapping[int, SourceId | int | None],
                    endpoints: bool = False, delta: int | None = None) -> LevelLists:
    sources = normalize_sources(src)
    levels = {v: [()] for v in g.nodes}
    for v, s in sources.items():
        levels[v] = [(Entry(0, s, v, v if endpoints else None),)]

    for _ in range(h):
        updated = {}
        for v in g.nodes:
            best = {entry.s: entry for entry in levels[v][-1]}
            for u, w in g.neighbors(v).items():
                for entry in levels[u][-1]:
                    relax(best, Entry(entry.d + w, entry.s, u, entry.endpoint))
            current = ordered(best.values(), delta)
            updated[v] = levels[v][-1] if current == levels[v][-1] else current
        for v in g.nodes:
            levels[v].append(updated[v])

    return LevelLists(h=h, delta=delta, levels={v: tuple(lists) for v, lists in levels.items()})
