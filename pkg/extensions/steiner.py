"""
Generalized Steiner forest through the terminal metric.

Terminals and their component numbers are broadcast. The skeleton is the
terminal set plus a random sample; its (2k-1)-spanner gives every node the
same distance estimates W'(s, t) between terminals, so every node can run
the centralized moat-growing 2-approximation on the complete terminal graph
by itself. The chosen metric edges are then realized in G: the spanner path
of each one is expanded into physical paths and tokens walk them to mark
the edges.
"""
from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import networkx as nx

from congest.broadcast import broadcast_all
from congest.config import SimConfig
from congest.engine import Protocol, RoundTrace, run
from graphs.exceptions import GraphParseError
from graphs.graph import WeightedGraph, parse_graph
from skeleton.paths import SpannerPaths, reverse_paths
from skeleton.spanner import build_spanner, random_skeleton, skeleton_parameters

from .exceptions import InfeasibleSolutionError
from .sketches import check_k

logger = logging.getLogger(__name__)

EdgeKey = tuple[int, int]

# Exhaustive optima are only computed up to this size.
MAX_OPT_NODES = 12
MAX_OPT_TERMINALS = 6


def _key(u: int, v: int) -> EdgeKey:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class GsfInstance:
    graph: WeightedGraph
    components: dict[int, int]

    def __post_init__(self):
        if not self.components:
            raise ValueError("an instance needs at least one terminal")
        for t, component in self.components.items():
            if not 1 <= t <= self.graph.n:
                raise ValueError(f"terminal {t} is not a node of the graph")
            if component < 0:
                raise ValueError(f"terminal {t} has a negative component number")

    @property
    def terminals(self) -> frozenset[int]:
        return frozenset(self.components)

    def groups(self) -> dict[int, frozenset[int]]:
        grouped: dict[int, set[int]] = {}
        for t, component in self.components.items():
            grouped.setdefault(component, set()).add(t)
        return {component: frozenset(members) for component, members in sorted(grouped.items())}

    def pairs(self) -> list[EdgeKey]:
        """Every same-component terminal pair."""
        return [(s, t) for members in self.groups().values() for s, t in itertools.combinations(sorted(members), 2)]

    def to_text(self) -> str:
        records = [f"T {t} {component}" for t, component in sorted(self.components.items())]
        return self.graph.to_text() + "\n".join(records) + "\n"

    @classmethod
    def parse(cls, text: str) -> 'GsfInstance':
        """The graph file followed by 'T terminal component' records."""
        graph, extra = parse_graph(text)
        components = {}
        for line_no, line in extra:
            tokens = line.split()
            if len(tokens) != 3 or tokens[0] != 'T':
                raise GraphParseError(f"expected 'T terminal component', got {line!r}", line_no)
            try:
                t, component = int(tokens[1]), int(tokens[2])
            except ValueError:
                raise GraphParseError(f"non-integer token in {line!r}", line_no)
            if t in components:
                raise GraphParseError(f"terminal {t} is listed twice", line_no)
            components[t] = component
        if not components:
            raise GraphParseError("the instance lists no terminals")
        return cls(graph=graph, components=components)

    @classmethod
    def load(cls, path: str | Path) -> 'GsfInstance':
        return cls.parse(Path(path).read_text())


@dataclass(frozen=True)
class GsfSolution:
    edges: frozenset[EdgeKey]
    weight: int
    feasible: bool
    metric_edges: frozenset[EdgeKey] = field(default_factory=frozenset)

    def to_dict(self, g: WeightedGraph | None = None) -> dict:
        edges = sorted(self.edges)
        return {
            'edges': [[u, v, g.weight(u, v)] if g is not None else [u, v] for u, v in edges],
            'weight': self.weight,
            'feasible': self.feasible,
            'metric_edges': [list(edge) for edge in sorted(self.metric_edges)],
        }


def edge_weight(g: WeightedGraph, edges: Iterable[EdgeKey]) -> int:
    return sum(g.weight(u, v) for u, v in edges)


def unmet_pairs(nodes: Iterable[int], edges: Iterable[EdgeKey], components: Mapping[int, int]) -> list[EdgeKey]:
    """Same-component terminal pairs that the edge set leaves disconnected."""
    forest = nx.utils.UnionFind(nodes)
    for u, v in edges:
        forest.union(u, v)
    unmet = []
    for s, t in itertools.combinations(sorted(components), 2):
        if components[s] == components[t] and forest[s] != forest[t]:
            unmet.append((s, t))
    return unmet


# --- Centralized 2-approximation ---

def _active(moat: frozenset[int], components: Mapping[int, int], groups: Mapping[int, frozenset[int]]) -> bool:
    return any(not groups[components[t]] <= moat for t in moat)


def gsf_centralized(weights: Mapping[EdgeKey, int | Fraction], components: Mapping[int, int]) -> frozenset[EdgeKey]:
    """
    Primal-dual moat growing on the complete graph over the terminals, then
    reverse delete. weights holds W'(s, t) for every pair s < t. Ties between
    edges going tight together go to the smaller (s, t).
    """
    terminals = sorted(components)
    groups: dict[int, frozenset[int]] = {}
    for t in terminals:
        groups[components[t]] = groups.get(components[t], frozenset()) | {t}
    moat_of = {t: frozenset({t}) for t in terminals}
    paid = {t: Fraction(0) for t in terminals}
    chosen: list[EdgeKey] = []

    while True:
        moats = set(moat_of.values())
        active = {moat: _active(moat, components, groups) for moat in moats}
        if not any(active.values()):
            break
        best = None
        for s, t in itertools.combinations(terminals, 2):
            if moat_of[s] == moat_of[t]:
                continue
            rate = active[moat_of[s]] + active[moat_of[t]]
            if rate == 0:
                continue
            slack = (Fraction(weights[(s, t)]) - paid[s] - paid[t]) / rate
            if best is None or (slack, s, t) < best:
                best = (slack, s, t)
        epsilon, s, t = best
        for moat, growing in active.items():
            if growing:
                for x in moat:
                    paid[x] += epsilon
        merged = moat_of[s] | moat_of[t]
        for x in merged:
            moat_of[x] = merged
        chosen.append((s, t))

    kept = list(chosen)
    for edge in reversed(chosen):
        rest = [other for other in kept if other != edge]
        if not unmet_pairs(terminals, rest, components):
            kept = rest
    logger.debug("moat growing chose %d of %d edges", len(kept), len(chosen))
    return frozenset(kept)


# --- Exact optima for small instances ---

def _tree_costs(graph: nx.Graph, terminals: Sequence[int]) -> dict[int, int | Fraction]:
    """Minimum Steiner tree weight of every terminal subset (bit mask), Dreyfus-Wagner."""
    dist = dict(nx.all_pairs_dijkstra_path_length(graph))
    nodes = sorted(graph.nodes())
    count = len(terminals)
    table: dict[int, dict[int, int | Fraction]] = {}
    for index, t in enumerate(terminals):
        table[1 << index] = {v: dist[t][v] for v in nodes}
    for mask in range(1, 1 << count):
        if mask & (mask - 1) == 0:
            continue
        low = mask & -mask
        joined = {}
        for u in nodes:
            best = None
            sub = (mask - 1) & mask
            while sub:
                if sub & low:
                    candidate = table[sub][u] + table[mask ^ sub][u]
                    if best is None or candidate < best:
                        best = candidate
                sub = (sub - 1) & mask
            joined[u] = best
        table[mask] = {v: min(joined[u] + dist[u][v] for u in nodes) for v in nodes}
    costs = {0: 0}
    for mask in range(1, 1 << count):
        first = terminals[(mask & -mask).bit_length() - 1]
        costs[mask] = table[mask][first] if mask & (mask - 1) else 0
    return costs


def _partitions(items: Sequence[int]) -> Iterable[list[list[int]]]:
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for partition in _partitions(rest):
        yield [[head], *partition]
        for index in range(len(partition)):
            yield partition[:index] + [[head, *partition[index]]] + partition[index + 1:]


def forest_optimum(graph: nx.Graph, components: Mapping[int, int]) -> int | Fraction:
    """
    Exact Steiner forest weight: every grouping of the non-trivial
    components into trees, each tree a minimum Steiner tree.
    """
    groups: dict[int, list[int]] = {}
    for t, component in sorted(components.items()):
        groups.setdefault(component, []).append(t)
    needed = [sorted(members) for members in groups.values() if len(members) > 1]
    terminals = [t for members in needed for t in members]
    if not terminals:
        return 0
    position = {t: index for index, t in enumerate(terminals)}
    masks = [sum(1 << position[t] for t in members) for members in needed]
    costs = _tree_costs(graph, terminals)
    best = None
    for partition in _partitions(list(range(len(masks)))):
        total = sum(costs[sum(masks[i] for i in block)] for block in partition)
        if best is None or total < best:
            best = total
    return best


def metric_graph(weights: Mapping[EdgeKey, int | Fraction]) -> nx.Graph:
    graph = nx.Graph()
    graph.add_weighted_edges_from((s, t, w) for (s, t), w in weights.items())
    return graph


def exact_metric(g: WeightedGraph, terminals: Iterable[int]) -> dict[EdgeKey, int]:
    """W'(s, t) = wd(s, t) over every terminal pair."""
    terminals = sorted(terminals)
    dist = {t: nx.single_source_dijkstra_path_length(g.to_networkx(), t) for t in terminals}
    return {(s, t): dist[s][t] for s, t in itertools.combinations(terminals, 2)}


# --- Distributed solve ---

@dataclass
class _MarkState:
    queues: dict[int, deque] = field(default_factory=dict)
    marked: set[EdgeKey] = field(default_factory=set)


class MarkPaths(Protocol):
    """Tokens (s, t) walk the physical path of spanner edge {s, t} from s, marking every edge."""

    name = 'mark-paths'

    def __init__(self, paths: SpannerPaths, starts: Mapping[int, Sequence[EdgeKey]]):
        self.paths = paths
        self.starts = starts

    def _forward(self, node, state, s, t):
        if node.id == t:
            return
        next_hop = self.paths.pointer(node.id, s, t, toward=t).next
        state.marked.add(_key(node.id, next_hop))
        state.queues.setdefault(next_hop, deque()).append((s, t))

    def setup(self, node):
        state = _MarkState()
        for s, t in self.starts.get(node.id, ()):
            self._forward(node, state, s, t)
        return state

    def step(self, node, state, inbox, round_no):
        for _, (s, t) in inbox:
            self._forward(node, state, s, t)
        return [(target, queue.popleft()) for target, queue in sorted(state.queues.items()) if queue]

    def finished(self, node, state):
        return not any(state.queues.values())

    def output(self, node, state):
        return state.marked


def gsf_solve(inst: GsfInstance, k: int, cfg: SimConfig | None = None,
              seed: int = 0) -> tuple[GsfSolution, RoundTrace]:
    g = inst.graph
    check_k(g.n, k)
    cfg = cfg or SimConfig.for_graph(g.n)
    trace = RoundTrace()
    _, cast_trace = broadcast_all(g, {t: [(t, c)] for t, c in inst.components.items()}, cfg, seed=seed)
    trace.absorb(cast_trace, 'terminals')

    sample = random_skeleton(g.n, seed)
    params = skeleton_parameters(g.n, inst.terminals | sample, sample=sample, k=k, c=cfg.skeleton_c)
    spanner, spanner_trace = build_spanner(g, params, cfg, seed)
    trace.absorb(spanner_trace, 'skeleton spanner')
    paths, paths_trace = reverse_paths(g, spanner, cfg, seed)
    trace.absorb(paths_trace, 'reverse paths')

    terminals = sorted(inst.terminals)
    weights = {(s, t): spanner.wd(s, t) for s, t in itertools.combinations(terminals, 2)}
    metric_edges = gsf_centralized(weights, inst.components)

    spanner_edges = set()
    for s, t in metric_edges:
        hops = spanner.path(s, t)
        spanner_edges.update(_key(a, b) for a, b in zip(hops, hops[1:]))
    starts: dict[int, list[EdgeKey]] = {}
    for s, t in sorted(spanner_edges):
        starts.setdefault(s, []).append((s, t))
    outputs, mark_trace = run(g, MarkPaths(paths, starts), cfg, seed)
    trace.absorb(mark_trace, 'mark paths')

    edges = frozenset(edge for marked in outputs.values() for edge in marked)
    unmet = unmet_pairs(g.nodes, edges, inst.components)
    if unmet:
        raise InfeasibleSolutionError(unmet)
    solution = GsfSolution(edges=edges, weight=edge_weight(g, edges), feasible=True, metric_edges=metric_edges)
    logger.info("steiner forest: %d terminals, %d metric edges, %d graph edges of weight %d, %d rounds",
                len(terminals), len(metric_edges), len(edges), solution.weight, trace.rounds)
    return solution, trace


# --- Verification ---

@dataclass(frozen=True)
class GsfReport:
    feasible: bool
    weight: int
    bound: int
    unmet: tuple[EdgeKey, ...]
    optimum: int | None = None
    closure_optimum: int | Fraction | None = None

    @property
    def ratio(self) -> float | None:
        if self.optimum is None:
            return None
        if self.optimum == 0:
            return 1.0 if self.weight == 0 else float('inf')
        return self.weight / self.optimum

    @property
    def closure_ok(self) -> bool:
        """The optimum over the terminal metric alone is within twice the true optimum."""
        if self.optimum is None or self.closure_optimum is None:
            return True
        return self.closure_optimum <= 2 * self.optimum

    @property
    def ok(self) -> bool:
        if not self.feasible:
            return False
        if self.optimum is None:
            return True
        return self.weight <= self.bound * self.optimum and self.closure_ok

    def to_dict(self) -> dict:
        return {
            'feasible': self.feasible,
            'weight': self.weight,
            'optimum': self.optimum,
            'ratio': self.ratio,
            'bound': self.bound,
            'closure_optimum': None if self.closure_optimum is None else float(self.closure_optimum),
            'closure_ok': self.closure_ok,
            'ok': self.ok,
            'unmet': [list(pair) for pair in self.unmet],
        }


def brute_force_feasible(inst: GsfInstance) -> bool:
    return inst.graph.n <= MAX_OPT_NODES and len(inst.terminals) <= MAX_OPT_TERMINALS


def gsf_verify(inst: GsfInstance, solution: GsfSolution, k: int, a: int = 2, oracle: bool = True) -> GsfReport:
    """
    Feasibility always; with the oracle, the weight against 2a(2k-1) times
    the exact optimum and the optimum on the exact terminal metric.
    """
    g = inst.graph
    unmet = tuple(unmet_pairs(g.nodes, solution.edges, inst.components))
    bound = 2 * a * (2 * k - 1)
    if not oracle:
        return GsfReport(feasible=not unmet, weight=solution.weight, bound=bound, unmet=unmet)
    if not brute_force_feasible(inst):
        raise ValueError(f"exact optima need n <= {MAX_OPT_NODES} and at most {MAX_OPT_TERMINALS} terminals")
    optimum = forest_optimum(g.to_networkx(), inst.components)
    closure = forest_optimum(metric_graph(exact_metric(g, inst.terminals)), inst.components)
    return GsfReport(feasible=not unmet, weight=solution.weight, bound=bound, unmet=unmet,
                     optimum=optimum, closure_optimum=closure)
