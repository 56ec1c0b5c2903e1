from fractions import Fraction

from django.test import SimpleTestCase

from graphs.generators import generate
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle
from shortrange.hierarchy import Hierarchy

from .decide import Decision, decide, estimate_distance, route
from .params import routing_parameters
from .tables import build_tables
from .tight import assign_tight_labels, tight_route

G1 = WeightedGraph.from_edges(5, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (1, 5, 10)])


class ParameterTests(SimpleTestCase):

    def test_alpha_one(self):
        params = routing_parameters(64, 1)
        self.assertEqual((params.k, params.L, params.stretch), (1, 1, 7))
        self.assertEqual(params.tight_stretch, 17)

    def test_alpha_point_six(self):
        params = routing_parameters(2 ** 20, '0.6')
        self.assertEqual((params.k, params.L, params.stretch), (5, 3, 119))
        self.assertEqual(params.alpha, Fraction(3, 5))

    def test_alpha_half_takes_log_n(self):
        params = routing_parameters(16, 0.5)
        self.assertEqual((params.k, params.L), (4, 2))

    def test_three_quarters(self):
        params = routing_parameters(64, 0.75)
        self.assertEqual((params.k, params.L, params.stretch), (2, 2, 31))

    def test_out_of_range(self):
        with self.assertRaises(ValueError):
            routing_parameters(64, 0.4)
        with self.assertRaises(ValueError):
            routing_parameters(64, '1.5')


class DecideTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.labels, cls.tables, cls.trace = build_tables(G1, 1, hierarchy=Hierarchy.forced_sets(5, [{3}]))

    def test_neighbor_through_stage_one(self):
        self.assertEqual(decide(self.tables[1], self.labels[2]), Decision(2, 1))

    def test_self(self):
        for v in G1.nodes:
            self.assertEqual(decide(self.tables[v], self.labels[v]), Decision(v, 0))

    def test_stateless(self):
        for v in G1.nodes:
            for w in G1.nodes:
                self.assertEqual(decide(self.tables[v], self.labels[w]), decide(self.tables[v], self.labels[w]))

    def test_estimates_bracket_distances(self):
        oracle = DistanceOracle(G1)
        for v in G1.nodes:
            for w in G1.nodes:
                estimate = estimate_distance(self.tables[v], self.labels[w])
                self.assertGreaterEqual(estimate, oracle.wd(v, w))
                self.assertLessEqual(estimate, 7 * oracle.wd(v, w))

    def test_labels(self):
        label = self.labels[4]
        self.assertEqual((label.Y(0), label.d(0)), (4, 0))
        self.assertEqual((label.Y(1), label.d(1)), (3, 1))
        self.assertEqual(label.to_dict()['node'], 4)
        self.assertGreater(label.bits(3), 0)

    def test_skeleton_pointer_to_own_landmark(self):
        self.assertEqual(self.tables[1].skeleton[3], (2, 2))


class RouteTests(SimpleTestCase):

    def test_empty_route(self):
        labels, tables, _ = build_tables(G1, 1, hierarchy=Hierarchy.forced_sets(5, [{3}]))
        result = route(G1, tables, labels, 4, 4)
        self.assertEqual((result.path, result.weight, result.stretch), ((4,), 0, 1.0))

    def test_path_graph_within_stretch(self):
        graph = generate('path', {'n': 8})
        labels, tables, _ = build_tables(graph, 1, seed=1)
        oracle = DistanceOracle(graph)
        for v in graph.nodes:
            for w in graph.nodes:
                result = route(graph, tables, labels, v, w, oracle)
                self.assertEqual((result.path[0], result.path[-1]), (v, w))
                self.assertLessEqual(result.stretch, tables.params.stretch)

    def test_stretch_on_random_graph(self):
        graph = generate('random_weighted', {'n': 64}, seed=0)
        labels, tables, trace = build_tables(graph, 0.75, seed=0)
        self.assertEqual((tables.params.k, tables.params.L), (2, 2))
        self.assertLessEqual(trace.retries, 5)
        oracle = DistanceOracle(graph)
        bound = tables.params.stretch
        for v in graph.nodes:
            for w in graph.nodes:
                result = route(graph, tables, labels, v, w, oracle)
                wd = oracle.wd(v, w)
                self.assertEqual(result.path[-1], w)
                self.assertLessEqual(result.weight, result.estimate)
                self.assertGreaterEqual(result.estimate, wd)
                self.assertLessEqual(result.estimate, bound * wd)

    def test_progress_along_every_route(self):
        graph = generate('random_weighted', {'n': 40}, seed=5)
        labels, tables, _ = build_tables(graph, 1, seed=5)
        for v in graph.nodes:
            for w in graph.nodes:
                result = route(graph, tables, labels, v, w)
                estimates = [estimate_distance(tables[x], labels[w]) for x in result.path]
                for (a, b), (d, following) in zip(zip(result.path, result.path[1:]), zip(estimates, estimates[1:])):
                    self.assertLessEqual(following, d - graph.weight(a, b))

    def test_size_report(self):
        graph = generate('random_weighted', {'n': 32}, seed=2)
        _, tables, _ = build_tables(graph, 1, seed=2)
        report = tables.size_report(6)
        self.assertLessEqual(report['mean_table_bits'], report['max_table_bits'])
        self.assertEqual(len(tables), 32)


class TightLabelTests(SimpleTestCase):

    def test_path_of_four(self):
        graph = generate('path', {'n': 4})
        _, tables, _ = build_tables(graph, 1, hierarchy=Hierarchy.forced_sets(4, [{1}]))
        labeling, _ = assign_tight_labels(graph, tables)
        self.assertEqual(labeling.labels, {1: 1, 2: 2, 3: 3, 4: 4})
        self.assertEqual(labeling.counts[1], {1: 4})

    def test_single_node(self):
        graph = WeightedGraph.from_edges(1, [])
        _, tables, _ = build_tables(graph, 1)
        labeling, _ = assign_tight_labels(graph, tables)
        self.assertEqual(labeling.labels, {1: 1})
        self.assertEqual(tight_route(graph, tables, labeling, 1, 1).path, (1,))

    def test_permutation_and_stretch(self):
        for n, alpha, seed in ((48, 1, 3), (64, 0.75, 1)):
            graph = generate('random_weighted', {'n': n}, seed=seed)
            _, tables, _ = build_tables(graph, alpha, seed=seed)
            labeling, _ = assign_tight_labels(graph, tables)
            self.assertEqual(sorted(labeling.labels.values()), list(range(1, n + 1)))
            oracle = DistanceOracle(graph)
            bound = tables.params.tight_stretch
            for v in graph.nodes:
                for w in graph.nodes:
                    result = tight_route(graph, tables, labeling, v, labeling.labels[w], oracle)
                    self.assertEqual(result.path[-1], w)
                    self.assertLessEqual(result.weight, bound * oracle.wd(v, w))

    def test_blocks_nest(self):
        graph = generate('random_weighted', {'n': 48}, seed=8)
        _, tables, _ = build_tables(graph, 0.75, seed=8)
        labeling, _ = assign_tight_labels(graph, tables)
        hier = tables.hierarchy
        for i in range(1, labeling.L + 1):
            for s in hier.members(i):
                lo, hi = labeling.block(i, s)
                inner = [labeling.block(i - 1, u) for u in hier.members(i - 1)
                         if tables.short_range.stage(u, i).Y == s]
                self.assertEqual(sum(b - a + 1 for a, b in inner), hi - lo + 1)
                self.assertTrue(all(lo <= a and b <= hi for a, b in inner))
