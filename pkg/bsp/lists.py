"""
Entries and per-level lists produced by bounded Bellman-Ford.

A SourceId is a tuple of non-negative ints of the same length for every
source of one run; several nodes sharing a SourceId act as one source.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

SourceId = tuple[int, ...]


class Entry(NamedTuple):
    d: int
    s: SourceId
    next: int
    endpoint: int | None = None

    def fields(self, with_endpoint: bool) -> tuple[int, ...]:
        """Wire form; the next hop is implicit (it is the sender)."""
        if with_endpoint:
            return (self.d, *self.s, self.endpoint)
        return (self.d, *self.s)


def entry_key(entry: Entry) -> tuple:
    """Order among entries of the same source."""
    return entry.d, entry.next, entry.endpoint or 0


def order_key(entry: Entry) -> tuple:
    """Lexicographic (d, s, next) order of a level list."""
    return entry.d, entry.s, entry.next, entry.endpoint or 0


def ordered(entries: Iterable[Entry], delta: int | None = None) -> tuple[Entry, ...]:
    ranked = sorted(entries, key=order_key)
    return tuple(ranked if delta is None else ranked[:delta])


def relax(best: dict[SourceId, Entry], candidate: Entry) -> None:
    """Keep the per-source minimum."""
    current = best.get(candidate.s)
    if current is None or entry_key(candidate) < entry_key(current):
        best[candidate.s] = candidate


def normalize_sources(sources: Mapping[int, SourceId | int | None]) -> dict[int, SourceId]:
    """Drop unassigned nodes and turn bare ints into 1-tuples."""
    result = {}
    for v, s in sources.items():
        if s is None:
            continue
        s = (s,) if isinstance(s, int) else tuple(int(x) for x in s)
        if any(x < 0 for x in s):
            raise ValueError(f"source id {s} of node {v} has a negative component")
        result[v] = s
    if not result:
        raise ValueError("at least one node must be a source")
    if len({len(s) for s in result.values()}) > 1:
        raise ValueError("all source ids of one run must have the same length")
    return result


@dataclass(frozen=True)
class LevelLists:
    """
    levels[v][t] is L_v(t) for t = 0..h; level 0 holds the node's own entry.

    delta is None for untruncated lists. Consecutive levels that did not
    change are the same tuple object.
    """
    h: int
    delta: int | None
    levels: dict[int, tuple[tuple[Entry, ...], ...]]

    def level(self, v: int, t: int) -> tuple[Entry, ...]:
        return self.levels[v][t]

    def final(self, v: int) -> tuple[Entry, ...]:
        return self.levels[v][self.h]

    def lookup(self, v: int, t: int, s: SourceId) -> Entry | None:
        for entry in self.levels[v][t]:
            if entry.s == s:
                return entry
        return None

    def realizing(self, v: int, upto: int, s: SourceId, d: int, endpoint: int) -> Entry | None:
        """
        An entry of v at level <= upto for s with exactly this distance and
        endpoint. Entries are derived from the next hop's entry one level
        lower, so following these hop by hop always reaches the endpoint.
        """
        seen = set()
        for level in self.levels[v][:upto + 1]:
            if id(level) in seen:
                continue
            seen.add(id(level))
            for entry in level:
                if entry.s == s and entry.d == d and entry.endpoint == endpoint:
                    return entry
        return None

    def best(self, v: int, s: SourceId) -> Entry | None:
        """Minimum entry for s over all levels of v."""
        found = None
        seen = set()
        for level in self.levels[v]:
            if id(level) in seen:
                continue
            seen.add(id(level))
            for entry in level:
                if entry.s == s and (found is None or entry_key(entry) < entry_key(found)):
                    found = entry
        return found

    def sources(self, v: int) -> set[SourceId]:
        """Every source that appears in some level of v."""
        return {entry.s for level in self.levels[v] for entry in level}

    def truncated(self, delta: int) -> 'LevelLists':
        return LevelLists(
            h=self.h,
            delta=delta,
            levels={v: tuple(level[:delta] for level in levels) for v, levels in self.levels.items()},
        )

    def distinct_levels(self, v: int) -> int:
        """Number of level lists actually stored at v (shared tuples count once)."""
        return len({id(level) for level in self.levels[v]})

    def dump(self) -> dict[str, list]:
        def row(entry):
            values = [entry.d, list(entry.s), entry.next]
            if entry.endpoint is not None:
                values.append(entry.endpoint)
            return values

        return {str(v): [[row(entry) for entry in level] for level in levels]
                for v, levels in sorted(self.levels.items())}
