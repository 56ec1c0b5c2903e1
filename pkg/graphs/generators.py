"""
Graph families used by experiments and tests.

All families are deterministic for a fixed (params, seed).
"""
from __future__ import annotations

import logging
import math

import networkx as nx
import numpy as np

from .exceptions import GeneratorParamsError
from .graph import WeightedGraph, max_weight

logger = logging.getLogger(__name__)

FAMILIES = ('random_weighted', 'path', 'star', 'tree', 'grid', 'lb_diameter')

MAX_CONNECT_ATTEMPTS = 1000


def _require(params, key, minimum=1):
    if key not in params:
        raise GeneratorParamsError(f"missing parameter '{key}'")
    value = int(params[key])
    if value < minimum:
        raise GeneratorParamsError(f"parameter '{key}' must be >= {minimum}, got {value}")
    return value


def _weights(rng, count, params, n):
    """Unit weights unless params['weights'] == 'random' (uniform in 1..w_max)."""
    if params.get('weights', 'unit') == 'unit':
        return [1] * count
    w_max = int(params.get('w_max', max_weight(n)))
    if w_max < 1:
        raise GeneratorParamsError(f"w_max must be >= 1, got {w_max}")
    return [int(w) for w in rng.integers(1, w_max + 1, size=count)]


def _from_networkx(graph: nx.Graph, rng, params) -> WeightedGraph:
    """Relabel to 1..n in sorted order and attach weights."""
    mapping = {node: index for index, node in enumerate(sorted(graph.nodes()), start=1)}
    pairs = sorted(tuple(sorted((mapping[u], mapping[v]))) for u, v in graph.edges())
    n = graph.number_of_nodes()
    weights = _weights(rng, len(pairs), params, n)
    return WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in zip(pairs, weights)])


def random_weighted(params, rng) -> WeightedGraph:
    """G(n, p) conditioned on connectivity, weights uniform in 1..w_max."""
    n = _require(params, 'n')
    p = float(params.get('p', min(1.0, 2 * math.log(max(n, 2)) / max(n, 2))))
    if not 0.0 < p <= 1.0:
        raise GeneratorParamsError(f"edge probability must be in (0, 1], got {p}")
    params = {'weights': 'random', **params}
    for attempt in range(MAX_CONNECT_ATTEMPTS):
        graph = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
        if nx.is_connected(graph):
            logger.debug("G(%d, %.3f) connected after %d attempts", n, p, attempt + 1)
            return _from_networkx(graph, rng, params)
    raise GeneratorParamsError(f"G({n}, {p}) stayed disconnected after {MAX_CONNECT_ATTEMPTS} draws")


def path(params, rng) -> WeightedGraph:
    return _from_networkx(nx.path_graph(_require(params, 'n')), rng, params)


def star(params, rng) -> WeightedGraph:
    """Center is node 1."""
    return _from_networkx(nx.star_graph(_require(params, 'n') - 1), rng, params)


def tree(params, rng) -> WeightedGraph:
    """Uniform random labeled tree via a random Pruefer sequence."""
    n = _require(params, 'n')
    if n <= 2:
        return path(params, rng)
    sequence = [int(x) for x in rng.integers(0, n, size=n - 2)]
    return _from_networkx(nx.from_prufer_sequence(sequence), rng, params)


def grid(params, rng) -> WeightedGraph:
    rows = _require(params, 'rows')
    cols = _require(params, 'cols')
    return _from_networkx(nx.grid_2d_graph(rows, cols), rng, params)


def lb_diameter(params, rng) -> WeightedGraph:
    """
    Diameter lower-bound family.

    An m x m array of unit-weight row paths v(i, j). Alice attaches to the first
    column, Bob to the last; row i's attachment weighs omega when i is in A
    (resp. B) and 1 otherwise. Column hubs u(j) reach their column with
    omega-weight edges and are the leaves of a unit-weight binary tree, which
    keeps the hop diameter logarithmic. Alice-u(1) and Bob-u(m) weigh 1.

    Ids: v(i, j) = (i-1)*m + j, Alice = m^2+1, Bob = m^2+2, u(j) = m^2+2+j,
    internal tree nodes follow.
    """
    m = _require(params, 'm', minimum=2)
    omega = _require(params, 'omega', minimum=1)
    set_a = {int(i) for i in params.get('A', ())}
    set_b = {int(i) for i in params.get('B', ())}
    if not set_a <= set(range(1, m + 1)) or not set_b <= set(range(1, m + 1)):
        raise GeneratorParamsError(f"input sets must be subsets of 1..{m}")

    def v(i, j):
        return (i - 1) * m + j

    alice, bob = m * m + 1, m * m + 2

    def hub(j):
        return m * m + 2 + j

    edges = []
    for i in range(1, m + 1):
        edges.extend((v(i, j), v(i, j + 1), 1) for j in range(1, m))
        edges.append((alice, v(i, 1), omega if i in set_a else 1))
        edges.append((bob, v(i, m), omega if i in set_b else 1))
        edges.extend((hub(j), v(i, j), omega) for j in range(1, m + 1))
    edges.append((alice, hub(1), 1))
    edges.append((bob, hub(m), 1))

    next_id = hub(m) + 1

    def build(lo, hi):
        nonlocal next_id
        if lo == hi:
            return hub(lo)
        mid = (lo + hi) // 2
        node = next_id
        next_id += 1
        edges.append((node, build(lo, mid), 1))
        edges.append((node, build(mid + 1, hi), 1))
        return node

    build(1, m)
    n = next_id - 1
    if omega * omega < n:
        raise GeneratorParamsError(f"omega must be at least sqrt(n) = {math.sqrt(n):.2f}, got {omega}")
    return WeightedGraph.from_edges(n, edges, weight_limit=max(max_weight(n), omega))


GENERATORS = {
    'random_weighted': random_weighted,
    'path': path,
    'star': star,
    'tree': tree,
    'grid': grid,
    'lb_diameter': lb_diameter,
}


def generate(family: str, params: dict, seed: int = 0) -> WeightedGraph:
    """Build a graph of the given family; identical inputs give identical edge sets."""
    try:
        builder = GENERATORS[family]
    except KeyError:
        raise GeneratorParamsError(f"unknown family '{family}', expected one of {', '.join(FAMILIES)}")
    if seed < 0:
        raise GeneratorParamsError(f"seed must be non-negative, got {seed}")
    graph = builder(dict(params), np.random.default_rng(seed))
    logger.info("generated %s graph n=%d m=%d seed=%d", family, graph.n, graph.m, seed)
    return graph
