"""
Global primitives over a BFS tree: tree construction, pipelined all-to-all
broadcast and a max-aggregation. Every message is (kind, *payload).
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from graphs.graph import WeightedGraph

from .codec import message_bits
from .config import SimConfig
from .engine import Message, NodeContext, Protocol, RoundTrace, run
from .exceptions import EncodingError

logger = logging.getLogger(__name__)

ROOT = 1

FLOOD, ACK = 0, 1
UP, DONE, DOWN, END = 0, 1, 2, 3
GATHER, RESULT = 0, 1


@dataclass(frozen=True)
class BfsTree:
    root: int
    parent: dict[int, int | None]
    depth: dict[int, int]
    children: dict[int, tuple[int, ...]]

    @property
    def height(self) -> int:
        return max(self.depth.values())


# --- BFS tree ---

@dataclass
class _BfsState:
    depth: int | None = None
    parent: int | None = None
    children: list[int] = field(default_factory=list)
    sent_round: int | None = None
    done: bool = False


class BuildBfsTree(Protocol):
    """
    The root floods its depth; a node adopts the smallest-id sender of the
    first flood it hears as parent and acknowledges it. Acks arrive exactly
    two steps after a node's own flood, which closes its child list.
    """

    name = 'bfs-tree'

    def __init__(self, root: int = ROOT):
        self.root = root

    def setup(self, node):
        return _BfsState(depth=0) if node.id == self.root else _BfsState()

    def step(self, node, state, inbox, round_no):
        floods = []
        for sender, fields in inbox:
            if fields[0] == ACK:
                state.children.append(sender)
            else:
                floods.append((sender, fields[1]))

        if state.sent_round is not None:
            if round_no >= state.sent_round + 2:
                state.done = True
            return ()

        if node.id == self.root:
            state.sent_round = round_no
            return [(u, (FLOOD, 0)) for u in node.neighbors]
        if not floods:
            return ()

        parent, parent_depth = min(floods)
        state.parent, state.depth = parent, parent_depth + 1
        state.sent_round = round_no
        out = [(parent, (ACK,))]
        out.extend((u, (FLOOD, state.depth)) for u in node.neighbors if u != parent)
        return out

    def finished(self, node, state):
        return state.done

    def output(self, node, state):
        return state.parent, state.depth, tuple(sorted(state.children))


def build_bfs_tree(g: WeightedGraph, cfg: SimConfig | None = None, seed: int = 0) -> tuple[BfsTree, RoundTrace]:
    """BFS tree rooted at the smallest id; O(HD) rounds."""
    cfg = cfg or SimConfig.for_graph(g.n)
    outputs, trace = run(g, BuildBfsTree(), cfg, seed)
    tree = BfsTree(
        root=ROOT,
        parent={v: out[0] for v, out in outputs.items()},
        depth={v: out[1] for v, out in outputs.items()},
        children={v: out[2] for v, out in outputs.items()},
    )
    logger.debug("bfs tree height %d in %d rounds", tree.height, trace.rounds)
    return tree, trace


# --- Pipelined broadcast ---

@dataclass
class _RelayState:
    parent: int | None
    children: tuple[int, ...]
    waiting: set[int]
    up: deque = field(default_factory=deque)
    down: deque = field(default_factory=deque)
    received: list[Message] = field(default_factory=list)
    done_sent: bool = False
    end_queued: bool = False
    finished: bool = False


class PipelinedBroadcast(Protocol):
    """
    Convergecast every item to the root, one item per tree edge per round,
    while the root streams what it has seen down the tree. The root's arrival
    order is the global order, so all nodes end with the same sequence.
    """

    name = 'broadcast'

    def __init__(self, tree: BfsTree, items: Mapping[int, Sequence[Message]]):
        self.tree = tree
        self.items = items

    def setup(self, node):
        children = self.tree.children[node.id]
        state = _RelayState(parent=self.tree.parent[node.id], children=children, waiting=set(children))
        for item in self.items.get(node.id, ()):
            self._accept(state, tuple(item))
        return state

    @staticmethod
    def _accept(state, item):
        if state.parent is None:
            state.received.append(item)
            state.down.append((DOWN, *item))
        else:
            state.up.append(item)

    def step(self, node, state, inbox, round_no):
        for sender, fields in inbox:
            kind = fields[0]
            if kind == UP:
                self._accept(state, tuple(fields[1:]))
            elif kind == DONE:
                state.waiting.discard(sender)
            elif kind == DOWN:
                state.received.append(tuple(fields[1:]))
                state.down.append(fields)
            else:
                state.down.append(fields)

        out = []
        if state.parent is not None:
            if state.up:
                out.append((state.parent, (UP, *state.up.popleft())))
            elif not state.waiting and not state.done_sent:
                out.append((state.parent, (DONE,)))
                state.done_sent = True
        elif not state.waiting and not state.end_queued:
            state.down.append((END,))
            state.end_queued = True

        if state.down:
            fields = state.down.popleft()
            out.extend((child, fields) for child in state.children)
            if fields[0] == END:
                state.finished = True
        return out

    def finished(self, node, state):
        return state.finished

    def output(self, node, state):
        return tuple(state.received)


def broadcast_all(g: WeightedGraph, items: Mapping[int, Sequence[Message]], cfg: SimConfig | None = None,
                  tree: BfsTree | None = None, seed: int = 0) -> tuple[dict[int, tuple[Message, ...]], RoundTrace]:
    """
    Make every node learn all M messages in O(M + HD) rounds.

    items maps a node to the messages it starts with. Each message must fit
    one CONGEST message next to its kind tag. Pass a prebuilt tree to skip
    the tree construction.
    """
    cfg = cfg or SimConfig.for_graph(g.n)
    for v, messages in items.items():
        for item in messages:
            bits = message_bits((DOWN, *item), cfg.word)
            if bits > cfg.bits:
                raise EncodingError(f"node {v}: broadcast item {tuple(item)} needs {bits} bits, budget {cfg.bits}")

    trace = RoundTrace()
    if tree is None:
        tree, tree_trace = build_bfs_tree(g, cfg, seed)
        trace.absorb(tree_trace, 'bfs-tree')
    outputs, relay_trace = run(g, PipelinedBroadcast(tree, items), cfg, seed)
    trace.absorb(relay_trace, 'broadcast')
    total = sum(len(messages) for messages in items.values())
    logger.debug("broadcast of %d items took %d rounds", total, trace.rounds)
    return outputs, trace


# --- Aggregation ---

@dataclass
class _GatherState:
    best: int
    parent: int | None
    children: tuple[int, ...]
    waiting: set[int]
    reported: bool = False
    result: int | None = None
    done: bool = False


class AggregateMax(Protocol):
    """Convergecast the maximum to the root, then send it back down."""

    name = 'aggregate-max'

    def __init__(self, tree: BfsTree, values: Mapping[int, int]):
        self.tree = tree
        self.values = values

    def setup(self, node):
        children = self.tree.children[node.id]
        return _GatherState(best=int(self.values.get(node.id, 0)), parent=self.tree.parent[node.id],
                            children=children, waiting=set(children))

    def step(self, node, state, inbox, round_no):
        for sender, fields in inbox:
            if fields[0] == GATHER:
                state.best = max(state.best, fields[1])
                state.waiting.discard(sender)
            else:
                state.result = fields[1]

        out = []
        if not state.waiting and not state.reported:
            state.reported = True
            if state.parent is None:
                state.result = state.best
            else:
                out.append((state.parent, (GATHER, state.best)))
        if state.result is not None and not state.done:
            out.extend((child, (RESULT, state.result)) for child in state.children)
            state.done = True
        return out

    def finished(self, node, state):
        return state.done

    def output(self, node, state):
        return state.result


def aggregate_max(g: WeightedGraph, values: Mapping[int, int], cfg: SimConfig | None = None,
                  tree: BfsTree | None = None, seed: int = 0) -> tuple[int, RoundTrace]:
    """Global maximum of non-negative per-node values, known to every node."""
    cfg = cfg or SimConfig.for_graph(g.n)
    trace = RoundTrace()
    if tree is None:
        tree, tree_trace = build_bfs_tree(g, cfg, seed)
        trace.absorb(tree_trace, 'bfs-tree')
    outputs, gather_trace = run(g, AggregateMax(tree, values), cfg, seed)
    trace.absorb(gather_trace, 'aggregate-max')
    return outputs[tree.root], trace
