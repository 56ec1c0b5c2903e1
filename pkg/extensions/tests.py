import itertools
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from graphs.exceptions import GraphParseError
from graphs.generators import generate
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle, metrics
from shortrange.hierarchy import Hierarchy

from .diameter import approx_diameter, coverage_range
from .exceptions import InfeasibleSolutionError
from .sketches import build_sketches, check_k, sketch_estimate, stretch_bound
from .steiner import (GsfInstance, GsfReport, GsfSolution, exact_metric, forest_optimum, gsf_centralized,
                      gsf_solve, gsf_verify, metric_graph, unmet_pairs)


def path_instance(n, components):
    return GsfInstance(graph=generate('path', {'n': n}), components=components)


class SketchTests(SimpleTestCase):

    def test_stretch_bound(self):
        self.assertEqual(stretch_bound(1), 10)
        self.assertEqual(stretch_bound(2), 52)

    def test_k_range(self):
        with self.assertRaises(ValueError):
            check_k(64, 0)
        with self.assertRaises(ValueError):
            check_k(64, 7)
        check_k(64, 6)

    def test_adjacent_nodes_on_a_path(self):
        graph = generate('path', {'n': 8})
        sketches, labels, _ = build_sketches(graph, 1, hierarchy=Hierarchy.forced_sets(8, [{1, 8}]))
        self.assertEqual(sketch_estimate(sketches[1], labels[2]), 1)
        for v in graph.nodes:
            self.assertEqual(sketch_estimate(sketches[v], labels[v]), 0)
            self.assertEqual(len(labels[v].levels), 2)
            self.assertEqual(set(sketches[v].H[2]), {1, 8})

    def test_hierarchy_must_match_k(self):
        with self.assertRaises(ValueError):
            build_sketches(generate('path', {'n': 8}), 2, hierarchy=Hierarchy.forced_sets(8, [{1, 8}]))

    def test_single_level_stretch(self):
        graph = generate('random_weighted', {'n': 64}, seed=0)
        sketches, labels, trace = build_sketches(graph, 1, seed=0)
        oracle = DistanceOracle(graph)
        for v in graph.nodes:
            for w in graph.nodes:
                estimate = sketch_estimate(sketches[v], labels[w])
                self.assertGreaterEqual(estimate, oracle.wd(v, w))
                self.assertLessEqual(estimate, 10 * oracle.wd(v, w))
        self.assertLessEqual(trace.retries, 5)

    def test_two_levels(self):
        graph = generate('random_weighted', {'n': 64}, seed=2)
        sketches, labels, _ = build_sketches(graph, 2, seed=2)
        oracle = DistanceOracle(graph)
        for i in range(1, 4):
            self.assertLessEqual(sketches.members(i), sketches.members(i - 1))
        top = sketches.members(3)
        for v in graph.nodes:
            self.assertEqual(len(labels[v].levels), 4)
            self.assertEqual(set(sketches[v].H[4]), set(top))
            for w in graph.nodes:
                estimate = sketch_estimate(sketches[v], labels[w])
                self.assertGreaterEqual(estimate, oracle.wd(v, w))
                self.assertLessEqual(estimate, sketches.stretch_bound * oracle.wd(v, w))

    def test_surrogate_sandwich(self):
        graph = generate('random_weighted', {'n': 48}, seed=4)
        sketches, _, _ = build_sketches(graph, 2, seed=4)
        oracle = DistanceOracle(graph)
        for v in graph.nodes:
            stage = sketches.short_range.stage(v, 2)
            for s in sketches.members(2):
                surrogate = sketches.surrogate(v, s)
                self.assertGreaterEqual(surrogate, oracle.wd(v, s))
                self.assertLessEqual(surrogate, stage.dY + 3 * oracle.wd(stage.Y, s))

    def test_size_report(self):
        graph = generate('random_weighted', {'n': 32}, seed=1)
        sketches, labels, _ = build_sketches(graph, 1, seed=1)
        report = sketches.size_report(6)
        self.assertGreater(report['max_sketch_entries'], 0)
        self.assertLessEqual(report['mean_sketch_bits'], report['max_sketch_bits'])
        self.assertEqual(sketches.to_dict()['k'], 1)
        self.assertEqual(labels[3].to_dict()['node'], 3)


class DiameterTests(SimpleTestCase):

    def test_coverage_range(self):
        self.assertEqual(coverage_range(64, 4), 63)
        self.assertEqual(coverage_range(1, 4), 1)
        self.assertEqual(coverage_range(10_000, 1), 1329)

    def test_star(self):
        graph = generate('star', {'n': 9})
        result, _ = approx_diameter(graph, 1, seed=3)
        self.assertGreaterEqual(result.estimate, 2)
        self.assertLessEqual(result.estimate, 6)

    def test_full_skeleton_is_exact(self):
        graph = generate('random_weighted', {'n': 20}, seed=6)
        result, _ = approx_diameter(graph, 1, skeleton=graph.nodes)
        self.assertEqual(result.d_max, 0)
        self.assertEqual(result.estimate, metrics(graph).WD)

    def test_lower_bound_family(self):
        graph = generate('lb_diameter', {'m': 3, 'omega': 16})
        WD = metrics(graph).WD
        result, _ = approx_diameter(graph, 1)
        self.assertGreaterEqual(result.estimate, WD)
        self.assertLessEqual(result.estimate, 3 * WD)

    def test_sandwich_on_random_graphs(self):
        for k, seed in itertools.product((1, 2), range(3)):
            graph = generate('random_weighted', {'n': 48}, seed=seed)
            WD = metrics(graph).WD
            result, trace = approx_diameter(graph, k, seed=seed)
            with self.subTest(k=k, seed=seed):
                self.assertGreaterEqual(result.estimate, WD)
                self.assertLessEqual(result.estimate, (2 * k + 1) * WD)
                self.assertEqual(result.bound, 2 * k + 1)
                self.assertGreater(trace.rounds, 0)


class CentralizedForestTests(SimpleTestCase):

    def test_two_terminals(self):
        self.assertEqual(gsf_centralized({(1, 2): 5}, {1: 0, 2: 0}), {(1, 2)})

    def test_triangle(self):
        chosen = gsf_centralized({(1, 2): 1, (2, 3): 1, (1, 3): 2}, {1: 0, 2: 0, 3: 0})
        self.assertEqual(chosen, {(1, 2), (2, 3)})

    def test_singletons_need_nothing(self):
        self.assertEqual(gsf_centralized({(1, 2): 1, (1, 3): 1, (2, 3): 1}, {1: 0, 2: 1, 3: 2}), frozenset())

    def test_cheap_cross_edges(self):
        weights = {(1, 2): 10, (3, 4): 10, (1, 3): 1, (2, 4): 1, (1, 4): 2, (2, 3): 2}
        components = {1: 0, 2: 0, 3: 1, 4: 1}
        chosen = gsf_centralized(weights, components)
        self.assertEqual(unmet_pairs([1, 2, 3, 4], chosen, components), [])
        optimum = forest_optimum(metric_graph(weights), components)
        self.assertEqual(optimum, 4)
        self.assertLessEqual(sum(weights[edge] for edge in chosen), 2 * optimum)

    def test_within_twice_the_optimum(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            count = int(rng.integers(2, 7))
            points = rng.integers(0, 20, size=(count, 2))
            weights = {(s, t): int(abs(points[s - 1] - points[t - 1]).sum()) + 1
                       for s, t in itertools.combinations(range(1, count + 1), 2)}
            components = {t: int(rng.integers(0, 3)) for t in range(1, count + 1)}
            chosen = gsf_centralized(weights, components)
            self.assertEqual(unmet_pairs(range(1, count + 1), chosen, components), [])
            optimum = forest_optimum(metric_graph(weights), components)
            self.assertLessEqual(sum(weights[edge] for edge in chosen), 2 * optimum)

    def test_fractional_weights(self):
        chosen = gsf_centralized({(1, 2): Fraction(1, 2), (1, 3): 3, (2, 3): 3}, {1: 0, 2: 0, 3: 1})
        self.assertEqual(chosen, {(1, 2)})


class SteinerForestTests(SimpleTestCase):

    def test_adjacent_terminals(self):
        inst = path_instance(4, {2: 0, 3: 0})
        solution, _ = gsf_solve(inst, 1)
        self.assertEqual(solution.edges, {(2, 3)})
        self.assertEqual(solution.weight, 1)
        self.assertTrue(solution.feasible)

    def test_path_of_five(self):
        inst = path_instance(5, {1: 0, 5: 0})
        solution, trace = gsf_solve(inst, 1)
        self.assertEqual(solution.edges, {(1, 2), (2, 3), (3, 4), (4, 5)})
        self.assertEqual(solution.weight, 4)
        report = gsf_verify(inst, solution, 1)
        self.assertEqual((report.optimum, report.ratio, report.bound), (4, 1.0, 4))
        self.assertTrue(report.ok)
        self.assertGreater(trace.rounds, 0)

    def test_single_terminal_components(self):
        inst = path_instance(5, {1: 0, 5: 1})
        solution, _ = gsf_solve(inst, 1)
        self.assertEqual(solution.edges, frozenset())
        report = gsf_verify(inst, solution, 1)
        self.assertTrue(report.ok)
        self.assertEqual(report.optimum, 0)

    def test_infeasible_solution_is_reported(self):
        inst = path_instance(5, {1: 0, 5: 0})
        report = gsf_verify(inst, GsfSolution(edges=frozenset({(1, 2)}), weight=1, feasible=False), 1)
        self.assertFalse(report.feasible)
        self.assertFalse(report.ok)
        self.assertEqual(report.unmet, ((1, 5),))

    def test_error_carries_unmet_pairs(self):
        error = InfeasibleSolutionError([(1, 5)])
        self.assertEqual(error.unmet, [(1, 5)])
        self.assertIn('1-5', str(error))

    def test_random_small_instances(self):
        for seed in range(5):
            graph = generate('random_weighted', {'n': 12}, seed=seed)
            rng = np.random.default_rng(seed)
            terminals = sorted(int(t) for t in rng.choice(np.arange(1, 13), size=6, replace=False))
            inst = GsfInstance(graph=graph, components={t: index % 2 for index, t in enumerate(terminals)})
            solution, _ = gsf_solve(inst, 1, seed=seed)
            report = gsf_verify(inst, solution, 1)
            with self.subTest(seed=seed):
                self.assertTrue(report.feasible)
                self.assertLessEqual(solution.weight, 4 * report.optimum)
                self.assertLessEqual(report.closure_optimum, 2 * report.optimum)
                self.assertTrue(report.ok)

    def test_closure_optimum_is_part_of_the_verdict(self):
        report = GsfReport(feasible=True, weight=4, bound=4, unmet=(), optimum=4, closure_optimum=9)
        self.assertFalse(report.closure_ok)
        self.assertFalse(report.ok)
        self.assertFalse(report.to_dict()['closure_ok'])
        report = GsfReport(feasible=True, weight=4, bound=4, unmet=(), optimum=4, closure_optimum=Fraction(8))
        self.assertTrue(report.ok)

    def test_verify_reports_the_closure_check(self):
        inst = path_instance(5, {1: 0, 3: 0, 5: 1, 4: 1})
        solution, _ = gsf_solve(inst, 1)
        report = gsf_verify(inst, solution, 1)
        self.assertEqual((report.optimum, report.closure_optimum), (3, 3))
        self.assertTrue(report.closure_ok)
        self.assertTrue(report.to_dict()['closure_ok'])

    def test_metric_closure_of_a_star(self):
        graph = WeightedGraph.from_edges(4, [(1, 2, 1), (1, 3, 1), (1, 4, 1)])
        components = {2: 0, 3: 0, 4: 0}
        self.assertEqual(forest_optimum(graph.to_networkx(), components), 3)
        self.assertEqual(forest_optimum(metric_graph(exact_metric(graph, components)), components), 4)

    def test_verify_needs_small_instances(self):
        inst = GsfInstance(graph=generate('path', {'n': 20}), components={1: 0, 20: 0})
        solution, _ = gsf_solve(inst, 1)
        with self.assertRaises(ValueError):
            gsf_verify(inst, solution, 1)
        self.assertTrue(gsf_verify(inst, solution, 1, oracle=False).ok)


class InstanceFileTests(SimpleTestCase):

    def test_parse(self):
        inst = GsfInstance.parse("3 2\n1 2 1\n2 3 4\nT 1 0\nT 3 0\n")
        self.assertEqual(inst.components, {1: 0, 3: 0})
        self.assertEqual(inst.pairs(), [(1, 3)])
        self.assertEqual(GsfInstance.parse(inst.to_text()), inst)

    def test_parse_errors(self):
        with self.assertRaises(GraphParseError):
            GsfInstance.parse("2 1\n1 2 1\nX 1 0\n")
        with self.assertRaises(GraphParseError):
            GsfInstance.parse("2 1\n1 2 1\n")
        with self.assertRaises(GraphParseError):
            GsfInstance.parse("2 1\n1 2 1\nT 1 0\nT 1 1\n")
        with self.assertRaises(ValueError):
            GsfInstance(graph=generate('path', {'n': 2}), components={3: 0})
