"""
Bounded multi-source Bellman-Ford with hop range h and overlap delta.

Iteration t occupies delta consecutive steps. In step j of the iteration a
node sends the j-th entry of its previous level to every neighbor; the new
level is closed at the first step of the next iteration, so a run of h
iterations takes h * delta rounds.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping

from congest.config import SimConfig
from congest.engine import Protocol, RoundTrace, run
from graphs.graph import WeightedGraph

from .lists import Entry, LevelLists, SourceId, normalize_sources, ordered, relax

logger = logging.getLogger(__name__)


@dataclass
class _BspState:
    levels: list[tuple[Entry, ...]]
    best: dict[SourceId, Entry]
    outgoing: tuple[Entry, ...]


class BoundedShortestPaths(Protocol):
    """
    Per-node program of bounded Bellman-Ford.

    Entries that did not change since the previous level were already offered
    to the neighbors and are not sent again; the resulting lists are the same.
    With endpoints=True every entry also carries the source node that
    realizes it.
    """

    name = 'bsp'

    def __init__(self, h: int, delta: int, sources: Mapping[int, SourceId], endpoints: bool = False):
        self.h = h
        self.delta = delta
        self.sources = sources
        self.endpoints = endpoints
        self.width = len(next(iter(sources.values())))
        if endpoints:
            self.name = 'bsp-prime'

    def setup(self, node):
        s = self.sources.get(node.id)
        own = () if s is None else (Entry(0, s, node.id, node.id if self.endpoints else None),)
        return _BspState(levels=[own], best={entry.s: entry for entry in own}, outgoing=own)

    def _receive(self, node, state, inbox):
        width = self.width
        for sender, fields in inbox:
            s = tuple(fields[1:1 + width])
            endpoint = fields[1 + width] if self.endpoints else None
            relax(state.best, Entry(fields[0] + node.neighbors[sender], s, sender, endpoint))

    def step(self, node, state, inbox, round_no):
        self._receive(node, state, inbox)
        slot = (round_no - 1) % self.delta
        if slot == 0 and round_no > 1:
            previous = state.levels[-1]
            current = ordered(state.best.values(), self.delta)
            if current == previous:
                current = previous
                state.outgoing = ()
            else:
                kept = set(previous)
                state.outgoing = tuple(entry for entry in current if entry not in kept)
            state.levels.append(current)
            state.best = {entry.s: entry for entry in current}

        if len(state.levels) > self.h or slot >= len(state.outgoing):
            return ()
        fields = state.outgoing[slot].fields(self.endpoints)
        return [(u, fields) for u in node.neighbors]

    def finished(self, node, state):
        return len(state.levels) > self.h

    def output(self, node, state):
        return tuple(state.levels)


def _run(g, h, delta, src, cfg, seed, endpoints) -> tuple[LevelLists, RoundTrace]:
    if h < 1 or delta < 1:
        raise ValueError(f"h and delta must be at least 1, got h={h}, delta={delta}")
    sources = normalize_sources(src)
    cfg = cfg or SimConfig.for_graph(g.n)
    protocol = BoundedShortestPaths(h, delta, sources, endpoints=endpoints)
    outputs, trace = run(g, protocol, cfg, seed)
    logger.debug("%s h=%d delta=%d sources=%d: %d rounds, %d messages",
                 protocol.name, h, delta, len(sources), trace.rounds, trace.messages)
    return LevelLists(h=h, delta=delta, levels=outputs), trace


def bsp(g: WeightedGraph, h: int, delta: int, src: Mapping[int, SourceId | int | None],
        cfg: SimConfig | None = None, seed: int = 0) -> tuple[LevelLists, RoundTrace]:
    """
    L_v(t) for every node v and t = 0..h: the delta smallest (d, s, next)
    entries, where d is the t-hop distance from v to source s.
    """
    return _run(g, h, delta, src, cfg, seed, endpoints=False)


def bsp_prime(g: WeightedGraph, h: int, delta: int, src: Mapping[int, SourceId | int | None],
              cfg: SimConfig | None = None, seed: int = 0) -> tuple[LevelLists, RoundTrace]:
    """As bsp, with the realizing endpoint of each entry."""
    return _run(g, h, delta, src, cfg, seed, endpoints=True)
