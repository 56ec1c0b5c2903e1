from __future__ import annotations

from typing import NamedTuple

from graphs.graph import WeightedGraph

from .exceptions import MissingEntryError
from .lists import LevelLists, SourceId


class Route(NamedTuple):
    path: tuple[int, ...]
    weight: int

    @property
    def hops(self) -> int:
        return len(self.path) - 1


def route_stateful(g: WeightedGraph, lists: LevelLists, v: int, s: SourceId) -> Route:
    """
    Follow next pointers with a hop counter: the t-th hop reads level h-(t-1)
    at the current node. At most h hops; the weight equals the d in L_v(h).
    """
    t = lists.h
    entry = lists.lookup(v, t, s)
    if entry is None:
        raise MissingEntryError(v, s, t)
    path, weight, x = [v], 0, v
    while entry.next != x:
        y = entry.next
        weight += g.weight(x, y)
        path.append(y)
        x, t = y, t - 1
        entry = lists.lookup(x, t, s) if t >= 0 else None
        if entry is None:
            raise MissingEntryError(x, s, t)
    return Route(tuple(path), weight)


def route_stateless(g: WeightedGraph, lists: LevelLists, v: int, s: SourceId) -> Route:
    """
    Follow, at each node, the entry for s with minimal d over all levels.
    d drops by at least the traversed edge weight per hop, so this terminates.
    """
    path, weight, x = [v], 0, v
    entry = lists.best(v, s)
    while True:
        if entry is None:
            raise MissingEntryError(x, s)
        if entry.next == x:
            return Route(tuple(path), weight)
        y = entry.next
        weight += g.weight(x, y)
        path.append(y)
        x = y
        entry = lists.best(x, s)
