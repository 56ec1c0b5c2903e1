import math

from django.test import SimpleTestCase

from congest.config import SimConfig
from graphs.generators import generate
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle, dijkstra

from .construction import build_short_range
from .exceptions import LabelNotInCellError, ValidationFailure
from .hierarchy import Hierarchy, clamp_stages, landmark_probabilities, sample_levels
from .trees import TreeLabel, tree_next_hop

G1 = WeightedGraph.from_edges(5, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (1, 5, 10)])


def p8():
    return generate('path', {'n': 8})


class HierarchyTests(SimpleTestCase):

    def test_probability_examples(self):
        self.assertAlmostEqual(landmark_probabilities(16, 1)[1], 0.25)
        self.assertAlmostEqual(landmark_probabilities(16, 2)[2], 0.25)
        for n, L in ((64, 1), (256, 3), (1000, 2)):
            p = landmark_probabilities(n, L)
            self.assertEqual(p[0], 1.0)
            self.assertAlmostEqual(p[L], n ** -0.5)

    def test_stage_clamp(self):
        self.assertEqual(clamp_stages(16, 5), 2)
        self.assertEqual(clamp_stages(3, 4), 1)
        self.assertEqual(sample_levels(16, 9, seed=1).L, 2)

    def test_every_node_in_s0_and_sets_nested(self):
        hier = sample_levels(200, 2, seed=3)
        self.assertEqual(hier.members(0), frozenset(range(1, 201)))
        self.assertLessEqual(hier.members(2), hier.members(1))

    def test_deterministic_per_seed(self):
        self.assertEqual(sample_levels(100, 2, seed=5).levels, sample_levels(100, 2, seed=5).levels)
        self.assertNotEqual(sample_levels(100, 2, seed=5).levels, sample_levels(100, 2, seed=6).levels)

    def test_level_frequencies(self):
        n = 3000
        hier = sample_levels(n, 2, seed=0)
        for i in (1, 2):
            expected = hier.p[i] * n
            self.assertLess(abs(len(hier.members(i)) - expected), 5 * math.sqrt(expected))

    def test_parameters(self):
        hier = sample_levels(64, 1, seed=0, c=1.0, c_prime=1.0)
        self.assertEqual(hier.h[1], math.ceil(6 / hier.p[1]))
        self.assertEqual(hier.delta[1], min(64, math.ceil(hier.h[1])))

    def test_resample_keeps_lower_stages(self):
        hier = sample_levels(300, 3, seed=2)
        again = hier.resample(2, 1)
        self.assertEqual(again.members(1), hier.members(1))
        self.assertLessEqual(again.members(2), again.members(1))
        self.assertNotEqual(again.levels, hier.levels)

    def test_forced_sets(self):
        hier = Hierarchy.forced_sets(8, [{1, 8}])
        self.assertEqual(hier.members(1), {1, 8})
        with self.assertRaises(ValueError):
            Hierarchy.forced_sets(8, [{1}, {1, 2}])
        with self.assertRaises(ValueError):
            hier.resample(1, 1)


class ForcedConstructionTests(SimpleTestCase):

    def test_path_landmarks(self):
        tables, _, _ = build_short_range(p8(), Hierarchy.forced_sets(8, [{1, 8}]))
        stage = tables.stage(4, 1)
        self.assertEqual((stage.Y, stage.dY), (1, 3))
        self.assertEqual(set(stage.H), {1, 2, 3, 4, 5, 6, 7})
        self.assertEqual(stage.H[7].next, 5)

    def test_landmark_is_its_own_closest(self):
        tables, _, _ = build_short_range(p8(), Hierarchy.forced_sets(8, [{1, 8}]))
        for v in (1, 8):
            self.assertEqual((tables.stage(v, 1).Y, tables.stage(v, 1).dY), (v, 0))
            self.assertIsNone(tables.stage(v, 1).parent)

    def test_single_landmark_cell_is_shortest_path_tree(self):
        tables, forest, _ = build_short_range(G1, Hierarchy.forced_sets(5, [{3}]))
        self.assertEqual(forest.cell(3, 1), {1, 2, 3, 4, 5})
        pred = dijkstra(G1, 3).pred
        for v in (1, 2, 4, 5):
            self.assertEqual(tables.stage(v, 1).parent, pred[v])

    def test_stage_zero_is_trivial(self):
        tables, forest, _ = build_short_range(G1, Hierarchy.forced_sets(5, [{3}]))
        self.assertEqual(tables.stage(2, 0).Y, 2)
        self.assertEqual(forest.cell(2, 0), {2})

    def test_empty_landmark_set_fails(self):
        with self.assertRaises(ValidationFailure):
            build_short_range(G1, Hierarchy.forced_sets(5, [set()]))

    def test_dump(self):
        tables, _, _ = build_short_range(p8(), Hierarchy.forced_sets(8, [{1, 8}]))
        dump = tables.dump()['4']
        self.assertEqual(dump['level'], 0)
        self.assertEqual(dump['stages'][1]['Y'], 1)
        self.assertIn([7, 3, 5], dump['stages'][1]['H'])


class TreeRoutingTests(SimpleTestCase):

    def setUp(self):
        self.tables, self.forest, _ = build_short_range(p8(), Hierarchy.forced_sets(8, [{1}]))

    def next_hop(self, v, w, i=1):
        return tree_next_hop(self.tables.tree_table(v, i), self.tables.tree_label(w, i))

    def test_examples(self):
        self.assertEqual(self.next_hop(4, 4), (4, 0))
        self.assertEqual(self.next_hop(4, 6), (5, 2))
        self.assertEqual(self.next_hop(4, 1)[0], 3)

    def test_other_cell(self):
        with self.assertRaises(LabelNotInCellError):
            self.next_hop(4, 5, i=0)
        with self.assertRaises(LabelNotInCellError):
            tree_next_hop(self.tables.tree_table(4, 1), TreeLabel(root=8, dist=0, enter=1, exit=1))

    def test_intervals_contain_exactly_descendants(self):
        graph = generate('random_weighted', {'n': 40}, seed=7)
        tables, forest, _ = build_short_range(graph, sample_levels(40, 2, seed=7))
        for i in range(3):
            for v in graph.nodes:
                table = forest.table(v, i)
                descendants = set()
                for u in forest.cell(table.root, i):
                    x = forest.table(u, i)
                    while x is not None:
                        if x.node == v:
                            descendants.add(u)
                            break
                        x = forest.table(x.parent, i) if x.parent is not None else None
                inside = {u for u in forest.cell(table.root, i) if table.contains(forest.table(u, i).enter)}
                self.assertEqual(inside, descendants)

    def test_tree_routes_reach_the_target(self):
        graph = generate('random_weighted', {'n': 36}, seed=2)
        tables, forest, _ = build_short_range(graph, sample_levels(36, 1, seed=2))
        for u in forest.roots(1):
            cell = sorted(forest.cell(u, 1))
            for v in cell:
                for w in cell:
                    x, (nxt, estimate) = v, self.route_step(tables, v, w)
                    hops = 0
                    while nxt != x:
                        weight = graph.weight(x, nxt)
                        x = nxt
                        nxt, following = self.route_step(tables, x, w)
                        self.assertLessEqual(following, estimate - weight)
                        estimate = following
                        hops += 1
                        self.assertLess(hops, graph.n)
                    self.assertEqual(x, w)

    @staticmethod
    def route_step(tables, v, w):
        return tree_next_hop(tables.tree_table(v, 1), tables.tree_label(w, 1))


class SampledConstructionTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.graph = generate('random_weighted', {'n': 48}, seed=11)
        cls.tables, cls.forest, cls.trace = build_short_range(cls.graph, sample_levels(48, 2, seed=11))
        cls.oracle = DistanceOracle(cls.graph)

    def test_distances_are_exact(self):
        for v in self.graph.nodes:
            for i in range(1, self.tables.L + 1):
                for u, entry in self.tables.stage(v, i).H.items():
                    self.assertEqual(entry.d, self.oracle.wd(v, u))
                    x, walked = v, 0
                    while x != u:
                        nxt = self.tables.stage(x, i).H[u].next
                        walked += self.graph.weight(x, nxt)
                        x = nxt
                    self.assertEqual(walked, entry.d)

    def test_size_bounds(self):
        hier = self.tables.hierarchy
        for v in self.graph.nodes:
            for i in range(1, hier.L + 1):
                stage = self.tables.stage(v, i)
                self.assertLessEqual(len(stage.H), hier.delta[i])
                self.assertIn(stage.Y, stage.H)
                self.assertIn(stage.Y, hier.members(i))

    def test_cells_partition_nodes(self):
        for i in range(self.tables.L + 1):
            cells = [self.forest.cell(u, i) for u in self.forest.roots(i)]
            self.assertEqual(sum(len(cell) for cell in cells), self.graph.n)
            self.assertEqual(set().union(*cells), set(self.graph.nodes))

    def test_separation(self):
        tables, wd = self.tables, self.oracle.wd
        for v in self.graph.nodes:
            for w in self.graph.nodes:
                if v == w:
                    continue
                for j in range(1, tables.L + 1):
                    if any(tables.stage(w, i - 1).Y in tables.stage(v, i).H for i in range(1, j + 1)):
                        break
                    self.assertLessEqual(tables.stage(v, j).dY, (2 * j - 1) * wd(v, w))
                    self.assertLessEqual(tables.stage(w, j).dY, 2 * j * wd(v, w))

    def test_short_route_stretch(self):
        tables, wd = self.tables, self.oracle.wd
        for v in self.graph.nodes:
            for w in self.graph.nodes:
                if v == w:
                    continue
                for i0 in range(1, tables.L + 1):
                    landmark = tables.stage(w, i0 - 1).Y
                    if landmark in tables.stage(v, i0).H:
                        self.assertLessEqual(wd(v, landmark) + wd(landmark, w), (4 * i0 - 3) * wd(v, w))
                        break

    def test_trace_has_every_stage(self):
        labels = [label for label, _ in self.trace.phases]
        self.assertEqual(labels.count('stage 1 trees'), 1)
        self.assertIn('stage 2 bsp', labels)
        self.assertLessEqual(self.trace.max_bits_edge_round, SimConfig.for_graph(48).bits)
