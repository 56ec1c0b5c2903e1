"""
Voronoi-cell trees and interval routing on them.

Trees are given by parent pointers (roots have none). An up/down sweep over
the forest computes, for every node, the range [enter, exit] of its subtree
in preorder and the ranges of its children. With unit weights these are DFS
intervals; with other weights and root bases the same sweep assigns blocks
of consecutive numbers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

from congest.config import SimConfig
from congest.engine import Protocol, RoundTrace, run
from graphs.graph import WeightedGraph

from .exceptions import LabelNotInCellError

logger = logging.getLogger(__name__)

NOTIFY, SIZE, START = 0, 1, 2


class TreeLabel(NamedTuple):
    root: int
    dist: int
    enter: int
    exit: int


class ChildRange(NamedTuple):
    child: int
    lo: int
    hi: int


@dataclass(frozen=True)
class TreeTable:
    """What node `node` stores about its tree: position, parent and child ranges."""
    node: int
    root: int
    parent: int | None
    dist: int
    enter: int
    exit: int
    children: tuple[ChildRange, ...] = ()

    def label(self) -> TreeLabel:
        return TreeLabel(self.root, self.dist, self.enter, self.exit)

    def contains(self, position: int) -> bool:
        return self.enter <= position <= self.exit

    def child_towards(self, position: int) -> int | None:
        for child, lo, hi in self.children:
            if lo <= position <= hi:
                return child
        return None


def tree_next_hop(table: TreeTable, target: TreeLabel) -> tuple[int, int]:
    """
    Next hop inside the cell and the remaining distance estimate.

    Towards a descendant the estimate is dist(w) - dist(v); otherwise the
    message climbs to the parent and the estimate is dist(v) + dist(w), the
    weight of the path through the root.
    """
    if target.root != table.root:
        raise LabelNotInCellError(table.node, table.root, target.root)
    if target.enter == table.enter:
        return table.node, 0
    child = table.child_towards(target.enter)
    if child is not None:
        return child, target.dist - table.dist
    if table.parent is None:
        raise LabelNotInCellError(table.node, table.root, target.root)
    return table.parent, table.dist + target.dist


# --- Preorder ranges ---

@dataclass
class _RangeState:
    parent: int | None
    weight: int
    base: int
    children: set[int] = field(default_factory=set)
    sizes: dict[int, int] = field(default_factory=dict)
    total: int | None = None
    start: int | None = None
    ranges: tuple[ChildRange, ...] = ()
    done: bool = False


class PreorderRanges(Protocol):
    """
    Step 1: every node tells its parent it is a child. Then subtree weights
    are summed towards the roots; each root starts at its base and every node
    hands consecutive sub-ranges to its children in id order.
    """

    name = 'preorder-ranges'

    def __init__(self, parent: Mapping[int, int | None], weights: Mapping[int, int] | None = None,
                 bases: Mapping[int, int] | None = None):
        self.parent = parent
        self.weights = weights
        self.bases = bases

    def setup(self, node):
        weight = 1 if self.weights is None else int(self.weights[node.id])
        base = 1 if self.bases is None else int(self.bases.get(node.id, 1))
        return _RangeState(parent=self.parent[node.id], weight=weight, base=base)

    def step(self, node, state, inbox, round_no):
        if round_no == 1:
            return [] if state.parent is None else [(state.parent, (NOTIFY,))]

        for sender, fields in inbox:
            kind = fields[0]
            if kind == NOTIFY:
                state.children.add(sender)
            elif kind == SIZE:
                state.sizes[sender] = fields[1]
            else:
                state.start = fields[1]

        out = []
        if state.total is None and len(state.sizes) == len(state.children):
            state.total = state.weight + sum(state.sizes.values())
            if state.parent is None:
                state.start = state.base
            else:
                out.append((state.parent, (SIZE, state.total)))

        if state.start is not None and not state.done:
            position = state.start + state.weight
            ranges = []
            for child in sorted(state.children):
                size = state.sizes[child]
                ranges.append(ChildRange(child, position, position + size - 1))
                out.append((child, (START, position)))
                position += size
            state.ranges = tuple(ranges)
            state.done = True
        return out

    def finished(self, node, state):
        return state.done

    def output(self, node, state):
        return state.start, state.start + state.total - 1, state.ranges


def preorder_ranges(g: WeightedGraph, parent: Mapping[int, int | None], cfg: SimConfig | None = None,
                    weights: Mapping[int, int] | None = None, bases: Mapping[int, int] | None = None,
                    seed: int = 0) -> tuple[dict[int, tuple[int, int, tuple[ChildRange, ...]]], RoundTrace]:
    """(enter, exit, child ranges) per node for the forest given by parent pointers."""
    for v, p in parent.items():
        if p is not None and not g.has_edge(v, p):
            raise ValueError(f"tree edge ({v}, {p}) is not an edge of the graph")
    cfg = cfg or SimConfig.for_graph(g.n)
    return run(g, PreorderRanges(parent, weights, bases), cfg, seed)


@dataclass(frozen=True)
class VoronoiForest:
    """Per stage, the tree table of every node."""
    tables: tuple[dict[int, TreeTable], ...]

    def table(self, v: int, i: int) -> TreeTable:
        return self.tables[i][v]

    def roots(self, i: int) -> list[int]:
        return sorted({table.root for table in self.tables[i].values()})

    def cell(self, u: int, i: int) -> set[int]:
        """C_u(i)."""
        return {v for v, table in self.tables[i].items() if table.root == u}

    def depth(self, i: int) -> int:
        """Largest hop depth of any tree of stage i."""
        best = 0
        for v, table in self.tables[i].items():
            hops, x = 0, table
            while x.parent is not None:
                x = self.tables[i][x.parent]
                hops += 1
            best = max(best, hops)
        return best


def singleton_tables(nodes) -> dict[int, TreeTable]:
    """Stage 0: every node is the root of its own cell."""
    return {v: TreeTable(node=v, root=v, parent=None, dist=0, enter=1, exit=1) for v in nodes}


def build_trees(g: WeightedGraph, parent: Mapping[int, int | None], root: Mapping[int, int],
                dist: Mapping[int, int], cfg: SimConfig | None = None, seed: int = 0) -> tuple[dict[int, TreeTable], RoundTrace]:
    """Tree tables with DFS intervals for one stage's Voronoi forest."""
    ranges, trace = preorder_ranges(g, parent, cfg, seed=seed)
    tables = {
        v: TreeTable(node=v, root=root[v], parent=parent[v], dist=dist[v], enter=enter, exit=exit, children=children)
        for v, (enter, exit, children) in ranges.items()
    }
    return tables, trace
