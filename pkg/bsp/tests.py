import numpy as np
from django.test import SimpleTestCase

from graphs.generators import generate
from graphs.graph import WeightedGraph
from graphs.oracles import hop_bounded_dist

from .exceptions import MissingEntryError
from .lists import Entry
from .protocol import bsp, bsp_prime
from .reference import reference_lists
from .routes import route_stateful, route_stateless

G1 = WeightedGraph.from_edges(5, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (1, 5, 10)])
FIVE = (5,)
SIGMA = (9,)


def random_sources(rng, n, merged):
    """About a quarter of the nodes become sources; with merged, ids are shared."""
    chosen = [v for v in range(1, n + 1) if rng.random() < 0.25] or [1]
    if merged:
        return {v: (int(rng.integers(1, 4)),) for v in chosen}
    return {v: (v,) for v in chosen}


class BspExampleTests(SimpleTestCase):

    def test_two_hops_take_the_direct_edge(self):
        lists, _ = bsp(G1, 2, 1, {5: FIVE})
        self.assertEqual(lists.level(1, 2), (Entry(10, FIVE, 5),))

    def test_four_hops_find_the_long_path(self):
        lists, _ = bsp(G1, 4, 1, {5: FIVE})
        self.assertEqual(lists.level(1, 4), (Entry(4, FIVE, 2),))

    def test_no_source_within_one_hop(self):
        lists, _ = bsp(G1, 1, 1, {5: FIVE})
        self.assertEqual(lists.level(3, 1), ())

    def test_own_entry_is_kept(self):
        lists, _ = bsp(G1, 3, 1, {5: FIVE, 1: (1,)})
        for t in range(4):
            self.assertEqual(lists.level(5, t)[0], Entry(0, FIVE, 5))

    def test_bare_int_sources(self):
        lists, _ = bsp(G1, 4, 1, {5: 5})
        self.assertEqual(lists.final(1), (Entry(4, FIVE, 2),))

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            bsp(G1, 0, 1, {5: FIVE})
        with self.assertRaises(ValueError):
            bsp(G1, 2, 1, {})
        with self.assertRaises(ValueError):
            bsp(G1, 2, 1, {1: (1,), 2: (2, 0)})


class BspPrimeExampleTests(SimpleTestCase):

    def test_merged_source_tie_breaks_by_next(self):
        lists, _ = bsp_prime(G1, 1, 1, {2: SIGMA, 4: SIGMA})
        self.assertEqual(lists.level(3, 1), (Entry(1, SIGMA, 2, 2),))

    def test_single_path(self):
        lists, _ = bsp_prime(G1, 1, 1, {2: SIGMA, 4: SIGMA})
        self.assertEqual(lists.level(5, 1), (Entry(1, SIGMA, 4, 4),))

    def test_two_hops_from_node_one(self):
        lists, _ = bsp_prime(G1, 2, 1, {2: SIGMA, 4: SIGMA})
        self.assertEqual(lists.level(1, 2), (Entry(1, SIGMA, 2, 2),))

    def test_endpoint_is_a_source_node(self):
        graph = generate('random_weighted', {'n': 30}, seed=6)
        src = {3: (1,), 17: (1,), 25: (2,)}
        lists, _ = bsp_prime(graph, 6, 2, src)
        for v in graph.nodes:
            for entry in lists.final(v):
                self.assertEqual(src[entry.endpoint], entry.s)
                self.assertEqual(entry.d, hop_bounded_dist(graph, entry.endpoint, 6).dist_h[v])


class TruncationTests(SimpleTestCase):

    def test_matches_truncated_reference(self):
        rng = np.random.default_rng(0)
        for case, n in enumerate((12, 24, 40, 64)):
            graph = generate('random_weighted', {'n': n}, seed=case)
            for merged in (False, True):
                src = random_sources(rng, n, merged)
                h, delta = int(rng.integers(1, 9)), int(rng.integers(1, 5))
                for run, endpoints in ((bsp, False), (bsp_prime, True)):
                    lists, _ = run(graph, h, delta, src)
                    reference = reference_lists(graph, h, src, endpoints=endpoints).truncated(delta)
                    with self.subTest(n=n, merged=merged, h=h, delta=delta, endpoints=endpoints):
                        self.assertEqual(lists.levels, reference.levels)

    def test_distances_are_hop_bounded(self):
        graph = generate('random_weighted', {'n': 32}, seed=3)
        src = {2: (1,), 9: (1,), 20: (2,), 31: (3,)}
        members = {}
        for v, s in src.items():
            members.setdefault(s, []).append(v)
        tables = {(u, t): hop_bounded_dist(graph, u, t).dist_h for u in src for t in range(6)}
        lists, _ = bsp(graph, 5, 3, src)
        for v in graph.nodes:
            for t in range(6):
                for entry in lists.level(v, t):
                    self.assertEqual(entry.d, min(tables[(u, t)][v] for u in members[entry.s]))

    def test_round_accounting(self):
        graph = generate('random_weighted', {'n': 40}, seed=2)
        for h, delta in ((1, 1), (4, 3), (8, 4)):
            _, trace = bsp(graph, h, delta, {v: (v,) for v in range(1, 41, 5)})
            self.assertLessEqual(trace.rounds, h * delta + 2)

    def test_unchanged_levels_are_shared(self):
        lists, _ = bsp(G1, 8, 1, {5: FIVE})
        self.assertIs(lists.level(1, 7), lists.level(1, 8))
        self.assertLess(lists.distinct_levels(1), 9)

    def test_dump_shape(self):
        lists, _ = bsp_prime(G1, 1, 1, {2: SIGMA, 4: SIGMA})
        self.assertEqual(lists.dump()['3'], [[], [[1, [9], 2, 2]]])


class RouteTests(SimpleTestCase):

    def test_stateful_examples(self):
        lists, _ = bsp(G1, 4, 1, {5: FIVE})
        route = route_stateful(G1, lists, 1, FIVE)
        self.assertEqual((route.path, route.weight), ((1, 2, 3, 4, 5), 4))
        self.assertEqual(route_stateful(G1, lists, 5, FIVE).hops, 0)

        short, _ = bsp(G1, 2, 1, {5: FIVE})
        route = route_stateful(G1, short, 1, FIVE)
        self.assertEqual((route.path, route.weight), ((1, 5), 10))

    def test_stateless_examples(self):
        lists, _ = bsp(G1, 4, 1, {5: FIVE})
        route = route_stateless(G1, lists, 1, FIVE)
        self.assertEqual((route.path, route.weight), ((1, 2, 3, 4, 5), 4))
        short, _ = bsp(G1, 2, 1, {5: FIVE})
        self.assertEqual(route_stateless(G1, short, 1, FIVE).path, (1, 5))
        self.assertEqual(route_stateless(G1, short, 5, FIVE).path, (5,))

    def test_missing_entry(self):
        lists, _ = bsp(G1, 1, 1, {5: FIVE})
        with self.assertRaises(MissingEntryError):
            route_stateful(G1, lists, 3, FIVE)
        with self.assertRaises(MissingEntryError):
            route_stateless(G1, lists, 3, FIVE)

    def test_route_properties_on_random_graphs(self):
        rng = np.random.default_rng(5)
        for seed in range(3):
            graph = generate('random_weighted', {'n': 36}, seed=seed)
            src = random_sources(rng, graph.n, merged=True)
            h, delta = 6, 3
            lists, _ = bsp(graph, h, delta, src)
            for v in graph.nodes:
                for entry in lists.final(v):
                    stateful = route_stateful(graph, lists, v, entry.s)
                    self.assertLessEqual(stateful.hops, h)
                    self.assertEqual(stateful.weight, entry.d)
                    self.assertEqual(src[stateful.path[-1]], entry.s)
                for s in lists.sources(v):
                    stateless = route_stateless(graph, lists, v, s)
                    self.assertLessEqual(stateless.weight, lists.best(v, s).d)
                    self.assertEqual(src[stateless.path[-1]], s)
