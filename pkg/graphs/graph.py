"""
Weighted graph representation and the edge-list file format.

File format: line 1 "n m", then m lines "u v w" (1-based ids, integer w >= 1).
Lines starting with '#' are comments. Files are written in canonical order
(u < v, sorted).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import networkx as nx
from django.conf import settings

from .exceptions import GraphParseError, GraphValidationError

logger = logging.getLogger(__name__)

Edge = tuple[int, int, int]


def max_weight(n: int) -> int:
    """Largest admissible edge weight for an n-node graph (n^exponent)."""
    exponent = settings.ROUTINGLAB['WEIGHT_EXPONENT']
    return max(2, n) ** exponent


@dataclass(frozen=True)
class WeightedGraph:
    """
    Simple, connected, undirected graph with positive integer weights.

    Nodes are 1..n. Edges are stored canonically as (u, v, w) with u < v,
    sorted. Instances are immutable; build them with from_edges().
    """
    n: int
    edges: tuple[Edge, ...]
    adjacency: dict[int, dict[int, int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        adjacency = {v: {} for v in range(1, self.n + 1)}
        for u, v, w in self.edges:
            adjacency[u][v] = w
            adjacency[v][u] = w
        object.__setattr__(self, 'adjacency', adjacency)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, int]], weight_limit: int | None = None) -> 'WeightedGraph':
        """Canonicalize and validate an edge collection."""
        if n < 1:
            raise GraphValidationError(f"node count must be positive, got {n}")
        limit = weight_limit if weight_limit is not None else max_weight(n)
        seen = {}
        for u, v, w in edges:
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphValidationError(f"edge ({u}, {v}) uses an id outside 1..{n}")
            if u == v:
                raise GraphValidationError(f"self-loop at node {u}")
            if isinstance(w, bool) or int(w) != w:
                raise GraphValidationError(f"edge ({u}, {v}) has non-integer weight {w!r}")
            if w < 1:
                raise GraphValidationError(f"edge ({u}, {v}) has weight {w} < 1")
            if w > limit:
                raise GraphValidationError(f"edge ({u}, {v}) has weight {w} above the limit {limit}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphValidationError(f"duplicate edge {key}")
            seen[key] = int(w)

        graph = cls(n=n, edges=tuple(sorted((u, v, w) for (u, v), w in seen.items())))
        if not nx.is_connected(graph.to_networkx()):
            raise GraphValidationError("graph is disconnected")
        return graph

    # --- Accessors ---

    @property
    def nodes(self) -> range:
        return range(1, self.n + 1)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> dict[int, int]:
        """Neighbor -> edge weight."""
        return self.adjacency[v]

    def weight(self, u: int, v: int) -> int:
        return self.adjacency[u][v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency.get(u, {})

    @cached_property
    def _nx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        graph.add_weighted_edges_from(self.edges)
        return graph

    def to_networkx(self) -> nx.Graph:
        """networkx view with a 'weight' edge attribute (do not mutate)."""
        return self._nx

    # --- Serialization ---

    def to_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{u} {v} {w}" for u, v, w in self.edges)
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text())
        logger.debug("wrote graph n=%d m=%d to %s", self.n, self.m, path)
        return path


def parse_graph(text: str) -> tuple[WeightedGraph, list[tuple[int, str]]]:
    """
    Parse the edge-list format.

    Returns the graph and any non-comment lines that follow the m edge lines,
    with their line numbers (instance files append extra records there).
    """
    records = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        records.append((line_no, line))

    if not records:
        raise GraphParseError("empty graph file")

    header_no, header = records[0]
    try:
        n, m = (int(token) for token in header.split())
    except ValueError:
        raise GraphParseError(f"expected 'n m', got {header!r}", header_no)

    if len(records) - 1 < m:
        raise GraphParseError(f"header announces {m} edges, found {len(records) - 1}", header_no)

    edges = []
    for line_no, line in records[1:m + 1]:
        tokens = line.split()
        if len(tokens) != 3:
            raise GraphParseError(f"expected 'u v w', got {line!r}", line_no)
        try:
            u, v, w = (int(token) for token in tokens)
        except ValueError:
            raise GraphParseError(f"non-integer token in {line!r}", line_no)
        edges.append((u, v, w))

    return WeightedGraph.from_edges(n, edges), records[m + 1:]


def load_graph(path: str | Path) -> WeightedGraph:
    """Read and validate a graph file; trailing records are rejected."""
    graph, extra = parse_graph(Path(path).read_text())
    if extra:
        line_no, line = extra[0]
        raise GraphParseError(f"unexpected record after the edge list: {line!r}", line_no)
    logger.debug("loaded graph n=%d m=%d from %s", graph.n, graph.m, path)
    return graph
