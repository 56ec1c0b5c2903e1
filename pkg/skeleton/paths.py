"""
Bidirectional pointers along the physical paths of spanner edges.

BSP' left every node with pointers towards sources only. The owner of each
spanner edge sends a token along its path; every node on the way records the
next hop and remaining weight towards both endpoints. Tokens sharing a
physical edge are queued and leave one per round.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import AbstractSet, Mapping, NamedTuple, Sequence

from bsp.exceptions import MissingEntryError
from bsp.lists import LevelLists
from congest.config import SimConfig
from congest.engine import Protocol, RoundTrace, run
from graphs.graph import WeightedGraph

from .spanner import SkeletonSpanner

logger = logging.getLogger(__name__)


class Pointer(NamedTuple):
    next: int
    rem: int


EdgeKey = tuple[int, int]


@dataclass
class _PathState:
    queues: dict[int, deque] = field(default_factory=dict)
    pointers: dict[EdgeKey, dict[int, Pointer]] = field(default_factory=dict)


class ReversePaths(Protocol):
    """
    Tokens are (origin, cluster, endpoint, walked weight, hops so far).

    Spanner edges and cluster marks are known everywhere, so a node derives
    the merged source id and the distance still to cover from the token. It
    follows the entry realizing exactly that distance to that endpoint; its
    current entry for the cluster may have switched to another member.
    """

    name = 'reverse-paths'

    def __init__(self, lists: LevelLists, owned: Mapping[int, Sequence[tuple[int, int]]],
                 marked: AbstractSet[int], weights: Mapping[EdgeKey, int]):
        self.lists = lists
        self.owned = owned
        self.marked = marked
        self.weights = weights

    def _install(self, node, state, origin, cluster, endpoint, walked, hops, back):
        key = (min(origin, endpoint), max(origin, endpoint))
        source = (cluster, int(cluster in self.marked))
        level = self.lists.h - hops
        entry = self.lists.realizing(node.id, level, source, self.weights[key] - walked, endpoint)
        if entry is None:
            raise MissingEntryError(node.id, source, level)
        state.pointers[key] = {endpoint: Pointer(entry.next, entry.d), origin: back}
        if entry.next != node.id:
            token = (origin, cluster, endpoint, walked + node.neighbors[entry.next], hops + 1)
            state.queues.setdefault(entry.next, deque()).append(token)

    def setup(self, node):
        state = _PathState()
        for cluster, endpoint in self.owned.get(node.id, ()):
            self._install(node, state, node.id, cluster, endpoint, 0, 0, Pointer(node.id, 0))
        return state

    def step(self, node, state, inbox, round_no):
        for sender, (origin, cluster, endpoint, walked, hops) in inbox:
            self._install(node, state, origin, cluster, endpoint, walked, hops, Pointer(sender, walked))
        return [(target, queue.popleft()) for target, queue in sorted(state.queues.items()) if queue]

    def finished(self, node, state):
        return not any(state.queues.values())

    def output(self, node, state):
        return state.pointers


@dataclass(frozen=True)
class SpannerPaths:
    """pointers[x][(s, t)][end] = next hop and remaining weight from x towards end."""
    pointers: dict[int, dict[EdgeKey, dict[int, Pointer]]]

    def pointer(self, x: int, s: int, t: int, toward: int) -> Pointer:
        return self.pointers[x][(min(s, t), max(s, t))][toward]

    def reachable(self, x: int) -> dict[int, Pointer]:
        """Every spanner-edge endpoint x has a pointer to, with the lightest pointer per endpoint."""
        best: dict[int, Pointer] = {}
        for ends in self.pointers[x].values():
            for end, pointer in ends.items():
                if end not in best or (pointer.rem, pointer.next) < (best[end].rem, best[end].next):
                    best[end] = pointer
        return best

    def path(self, s: int, t: int) -> list[int]:
        """Physical nodes realizing spanner edge {s, t}, from s to t."""
        nodes = [s]
        while nodes[-1] != t:
            nodes.append(self.pointer(nodes[-1], s, t, t).next)
        return nodes

    def dump(self) -> dict[str, dict[str, dict[str, list[int]]]]:
        return {
            str(x): {
                f"{s}-{t}": {str(end): [pointer.next, pointer.rem] for end, pointer in sorted(ends.items())}
                for (s, t), ends in sorted(keys.items())
            }
            for x, keys in sorted(self.pointers.items())
        }


def reverse_paths(g: WeightedGraph, spanner: SkeletonSpanner, cfg: SimConfig | None = None,
                  seed: int = 0) -> tuple[SpannerPaths, RoundTrace]:
    """Install pointers in both directions along every spanner edge's path, phase by phase."""
    cfg = cfg or SimConfig.for_graph(g.n)
    pointers: dict[int, dict[EdgeKey, dict[int, Pointer]]] = {v: {} for v in g.nodes}
    weights = {edge.key: edge.w for edge in spanner.edges}
    trace = RoundTrace()
    for phase, lists in enumerate(spanner.lists):
        owned: dict[int, list[tuple[int, int]]] = {}
        for edge in spanner.edges:
            origin = spanner.origins[edge.key]
            if origin.phase == phase:
                owned.setdefault(edge.owner, []).append((origin.source[0], edge.other(edge.owner)))
        if not owned:
            continue
        protocol = ReversePaths(lists, owned, spanner.marks[phase], weights)
        outputs, phase_trace = run(g, protocol, cfg, seed)
        trace.absorb(phase_trace, f'phase {phase + 1} reverse')
        for v, installed in outputs.items():
            pointers[v].update(installed)
    logger.debug("reverse paths for %d spanner edges took %d rounds", len(spanner.edges), trace.rounds)
    return SpannerPaths(pointers), trace
