import math
import tempfile
from pathlib import Path

import networkx as nx
from django.test import SimpleTestCase

from .exceptions import GeneratorParamsError, GraphParseError, GraphValidationError
from .generators import generate
from .graph import WeightedGraph, load_graph, parse_graph
from .oracles import INF, DistanceOracle, ball, dijkstra, hop_bounded_dist, metrics

G1_EDGES = [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (1, 5, 10)]


def g1():
    return WeightedGraph.from_edges(5, G1_EDGES)


class LoadGraphTests(SimpleTestCase):

    def _load(self, text):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'g.txt'
            path.write_text(text)
            return load_graph(path)

    def test_triangle(self):
        graph = self._load("3 3\n1 2 1\n2 3 1\n1 3 5\n")
        self.assertEqual(graph.n, 3)
        self.assertEqual(graph.edges, ((1, 2, 1), (1, 3, 5), (2, 3, 1)))

    def test_self_loop_rejected(self):
        with self.assertRaisesMessage(GraphValidationError, 'self-loop'):
            self._load("2 1\n1 1 1\n")

    def test_disconnected_rejected(self):
        with self.assertRaisesMessage(GraphValidationError, 'disconnected'):
            self._load("4 2\n1 2 1\n3 4 1\n")

    def test_comments_and_orientation(self):
        graph = self._load("# triangle\n3 3\n2 1 4\n# middle\n3 2 1\n3 1 2\n")
        self.assertEqual(graph.edges, ((1, 2, 4), (1, 3, 2), (2, 3, 1)))

    def test_malformed_line_reports_line_number(self):
        with self.assertRaises(GraphParseError) as ctx:
            self._load("2 1\n1 two 1\n")
        self.assertEqual(ctx.exception.line_no, 2)

    def test_duplicate_and_zero_weight(self):
        with self.assertRaisesMessage(GraphValidationError, 'duplicate'):
            self._load("2 2\n1 2 1\n2 1 3\n")
        with self.assertRaisesMessage(GraphValidationError, 'weight 0'):
            self._load("2 1\n1 2 0\n")

    def test_canonical_text_round_trip(self):
        graph = g1()
        again, extra = parse_graph(graph.to_text())
        self.assertEqual(again, graph)
        self.assertEqual(extra, [])


class OracleTests(SimpleTestCase):

    def test_dijkstra_examples(self):
        self.assertEqual(dijkstra(g1(), 1).dist[5], 4)
        self.assertEqual(dijkstra(g1(), 1).dist[1], 0)
        self.assertEqual(dijkstra(g1(), 3).dist[5], 2)

    def test_dijkstra_pred_chain(self):
        table = dijkstra(g1(), 1)
        self.assertEqual(table.path_to(5), [1, 2, 3, 4, 5])
        self.assertEqual(table.hops[5], 4)

    def test_hop_bounded_examples(self):
        self.assertEqual(hop_bounded_dist(g1(), 1, 1).dist_h[5], 10)
        self.assertEqual(hop_bounded_dist(g1(), 1, 4).dist_h[5], 4)
        self.assertEqual(hop_bounded_dist(g1(), 1, 0).dist_h[2], INF)

    def test_ball_examples(self):
        self.assertEqual(ball(g1(), 1, 1), {1})
        self.assertEqual(ball(g1(), 1, 3), {1, 2, 3})
        self.assertEqual(ball(g1(), 5, 2), {5, 4})
        with self.assertRaises(ValueError):
            ball(g1(), 1, 6)

    def test_metrics_examples(self):
        m = metrics(g1())
        self.assertEqual((m.HD, m.WD), (2, 4))
        star = generate('star', {'n': 5})
        self.assertEqual(metrics(star).to_dict(), {'HD': 2, 'WD': 2, 'SPD': 2})
        p5 = generate('path', {'n': 5})
        self.assertEqual(metrics(p5).to_dict(), {'HD': 4, 'WD': 4, 'SPD': 4})

    def test_hop_bound_n_minus_one_is_exact(self):
        for seed in range(4):
            graph = generate('random_weighted', {'n': 24}, seed=seed)
            for s in graph.nodes:
                self.assertEqual(hop_bounded_dist(graph, s, graph.n - 1).dist_h, dijkstra(graph, s).dist)

    def test_ball_members_are_reached_within_hops(self):
        for seed, n in ((0, 16), (1, 32), (2, 48)):
            graph = generate('random_weighted', {'n': n}, seed=seed)
            for v in graph.nodes:
                exact = dijkstra(graph, v).dist
                bounded = {j: hop_bounded_dist(graph, v, j).dist_h for j in range(n)}
                for i in range(1, n + 1):
                    for u in ball(graph, v, i):
                        for j in range(i - 1, n):
                            self.assertEqual(bounded[j][u], exact[u])

    def test_metrics_against_networkx(self):
        graph = generate('random_weighted', {'n': 20}, seed=3)
        expected = max(max(d.values()) for _, d in nx.all_pairs_dijkstra_path_length(graph.to_networkx()))
        self.assertEqual(metrics(graph).WD, expected)
        self.assertLessEqual(metrics(graph).HD, metrics(graph).SPD)

    def test_distance_oracle_caches_rank(self):
        oracle = DistanceOracle(g1())
        self.assertEqual(oracle.ranked(5)[:2], (5, 4))
        self.assertTrue(oracle.in_ball(5, 4, 2))
        self.assertEqual(oracle.hops(1, 5), 4)


class GeneratorTests(SimpleTestCase):

    def test_path_family(self):
        self.assertEqual(generate('path', {'n': 5}, seed=0).edges,
                         ((1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1)))

    def test_reproducible(self):
        for family, params in (('random_weighted', {'n': 30}), ('tree', {'n': 20, 'weights': 'random'}),
                               ('grid', {'rows': 3, 'cols': 4})):
            self.assertEqual(generate(family, params, seed=11), generate(family, params, seed=11))

    def test_lb_diameter_small_weight_diameter(self):
        graph = generate('lb_diameter', {'m': 3, 'omega': 16})
        m = metrics(graph)
        self.assertLessEqual(m.WD, 3 + 2 * math.ceil(math.log2(9)))
        self.assertLessEqual(m.HD, 4 * math.ceil(math.log2(graph.n)))

    def test_lb_diameter_intersecting_inputs(self):
        graph = generate('lb_diameter', {'m': 3, 'omega': 16, 'A': [2], 'B': [2]})
        self.assertGreater(metrics(graph).WD, 16)

    def test_invalid_params(self):
        with self.assertRaises(GeneratorParamsError):
            generate('lb_diameter', {'m': 1, 'omega': 16})
        with self.assertRaises(GeneratorParamsError):
            generate('lb_diameter', {'m': 5, 'omega': 2})
        with self.assertRaises(GeneratorParamsError):
            generate('hypercube', {'n': 8})
