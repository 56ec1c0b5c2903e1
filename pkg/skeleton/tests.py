import math

import networkx as nx
from django.test import SimpleTestCase

from bsp.protocol import bsp_prime
from congest.config import SimConfig
from graphs.generators import generate
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle
from shortrange.hierarchy import sample_levels

from .paths import Pointer, reverse_paths
from .reference import reference_spanner, skeleton_distances, skeleton_graph
from .spanner import (EdgeOrigin, SkeletonParams, SkeletonSpanner, SpannerEdge, build_spanner, detect_edges,
                      edge_bound, make_edge, skeleton_parameters)

G1 = WeightedGraph.from_edges(5, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (1, 5, 10)])
# Light path 1-2-3-4 with heavy chords: spanner edges {1,3} and {1,4} share physical edges.
K4 = WeightedGraph.from_edges(4, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (1, 3, 5), (2, 4, 5), (1, 4, 5)])


def sampled_skeleton(n, seed):
    return sorted(sample_levels(n, 1, seed=seed).members(1)) or [1]


def without_oracle(n):
    return SimConfig.for_graph(n, oracle=False)


class ParameterTests(SimpleTestCase):

    def test_hop_range_from_sample(self):
        params = skeleton_parameters(1000, range(1, 41), sample=range(1, 33), k=2, c=1.0)
        self.assertEqual(params.h, math.ceil(1000 * math.log2(1000) / 32))
        self.assertEqual(params.delta, 40)

    def test_clamps(self):
        params = skeleton_parameters(64, range(1, 9), k=2)
        self.assertEqual(params.h, 63)
        self.assertEqual(params.delta, 8)
        single = skeleton_parameters(1, [1])
        self.assertEqual((single.h, single.delta), (1, 1))

    def test_invalid(self):
        with self.assertRaises(ValueError):
            skeleton_parameters(10, [])
        with self.assertRaises(ValueError):
            skeleton_parameters(10, [1, 2], sample=[3])
        with self.assertRaises(ValueError):
            skeleton_parameters(10, [1, 2], k=0)


class EdgeDetectionTests(SimpleTestCase):

    def test_edge_between_two_clusters(self):
        announcement, _ = detect_edges(G1, {1: 1, 5: 5}, set(), h=4, delta=2)
        self.assertIn(SpannerEdge(1, 5, 4, 1), announcement.edges)
        self.assertEqual(announcement.joined, {1: None, 5: None})
        for view in announcement.received.values():
            self.assertEqual(sorted(view), [(1, 5, 4), (5, 1, 4)])

    def test_singleton_skeleton(self):
        announcement, _ = detect_edges(G1, {3: 3}, set(), h=4, delta=1)
        self.assertEqual(announcement.edges, [])

    def test_stops_at_closest_marked_cluster(self):
        graph = generate('path', {'n': 6})
        announcement, _ = detect_edges(graph, {1: 1, 3: 3, 4: 4, 6: 6}, {4}, h=5, delta=4)
        self.assertEqual([edge.key for edge, _ in announcement.added[1]], [(1, 3), (1, 4)])
        self.assertEqual(announcement.joined[1], 4)
        self.assertEqual(announcement.joined[3], 4)
        self.assertNotIn(4, announcement.added)


class SpannerTests(SimpleTestCase):

    def test_single_phase_keeps_every_skeleton_edge(self):
        params = skeleton_parameters(G1.n, G1.nodes, k=1)
        spanner, _ = build_spanner(G1, params)
        oracle = DistanceOracle(G1)
        for s in G1.nodes:
            for t in G1.nodes:
                self.assertEqual(spanner.wd(s, t), oracle.wd(s, t))
        self.assertEqual(len(spanner.edges), skeleton_graph(G1, G1.nodes, params.h).number_of_edges())

    def test_stretch_three_for_two_phases(self):
        graph = generate('random_weighted', {'n': 64}, seed=4)
        S = sampled_skeleton(64, 4)
        spanner, trace = build_spanner(graph, skeleton_parameters(64, S, k=2), seed=4)
        oracle = DistanceOracle(graph)
        for s in S:
            for t in S:
                self.assertLessEqual(spanner.wd(s, t), 3 * oracle.wd(s, t))
        self.assertLessEqual(len(spanner.edges), edge_bound(64, len(S), 2))
        self.assertLessEqual(trace.retries, 5)

    def test_skeleton_distances_are_preserved(self):
        for seed in range(3):
            graph = generate('random_weighted', {'n': 32}, seed=seed)
            S = sampled_skeleton(32, seed)
            params = skeleton_parameters(32, S)
            oracle = DistanceOracle(graph)
            skeleton = skeleton_graph(graph, S, params.h)
            for s in S:
                for t in S:
                    self.assertEqual(nx.dijkstra_path_length(skeleton, s, t), oracle.wd(s, t))

    def test_edge_weights_are_hop_bounded_distances(self):
        graph = generate('random_weighted', {'n': 40}, seed=1)
        S = list(range(1, 41, 3))
        params = skeleton_parameters(40, S, k=2)
        spanner, _ = build_spanner(graph, params, seed=1)
        exact = skeleton_distances(graph, S, params.h)
        for edge in spanner.edges:
            self.assertEqual(edge.w, exact[edge.s][edge.t])
            self.assertIn(edge.owner, (edge.s, edge.t))

    def test_mark_sizes(self):
        graph = generate('random_weighted', {'n': 64}, seed=9)
        params = skeleton_parameters(64, range(1, 28), k=3)
        spanner, _ = build_spanner(graph, params, cfg=without_oracle(64), seed=9)
        self.assertEqual([len(marked) for marked in spanner.marks], [9, 3, 0])
        self.assertLessEqual(spanner.marks[1], spanner.marks[0])

    def test_matches_sequential_baswana_sen(self):
        for seed, (n, k, delta) in enumerate(((24, 2, 2), (36, 2, None), (48, 3, 3))):
            graph = generate('random_weighted', {'n': n}, seed=seed)
            params = skeleton_parameters(n, range(1, n + 1, 2), k=k)
            if delta is not None:
                params = SkeletonParams(S=params.S, sample=params.sample, k=k, h=params.h, delta=delta)
            spanner, _ = build_spanner(graph, params, cfg=without_oracle(n), seed=seed)
            expected = reference_spanner(graph, params.S, k, params.h, params.delta, spanner.marks)
            with self.subTest(n=n, k=k, delta=params.delta):
                self.assertEqual({(edge.s, edge.t, edge.w) for edge in spanner.edges}, expected)

    def test_sequential_baswana_sen_on_skeleton_graph(self):
        self.assertEqual(skeleton_distances(G1, {1, 3, 5}, 4), {1: {3: 2, 5: 4}, 3: {1: 2, 5: 2}, 5: {1: 4, 3: 2}})
        self.assertEqual(skeleton_distances(G1, {1, 5}, 1), {1: {5: 10}, 5: {1: 10}})
        # 1 and 3 both reach marked cluster 5; node 3 ranks the tied clusters 1 and 5 by id.
        self.assertEqual(reference_spanner(G1, {1, 3, 5}, 2, 4, 3, [{5}]), {(1, 3, 2), (1, 5, 4), (3, 5, 2)})
        # With two clusters in view neither node sees cluster 5.
        self.assertEqual(reference_spanner(G1, {1, 3, 5}, 2, 4, 2, [{5}]), {(1, 3, 2)})

    def test_dump(self):
        spanner, _ = build_spanner(G1, SkeletonParams(S=frozenset({1, 5}), sample=frozenset({1, 5}), k=1, h=4, delta=2))
        self.assertEqual(spanner.dump(), [[1, 5, 4, 1]])
        self.assertEqual(spanner.to_dict()['marks'], [[]])


class ReversePathTests(SimpleTestCase):

    def build(self, graph, S, h):
        params = SkeletonParams(S=frozenset(S), sample=frozenset(S), k=1, h=h, delta=len(S))
        spanner, _ = build_spanner(graph, params)
        paths, _ = reverse_paths(graph, spanner)
        return spanner, paths

    def test_pointers_in_both_directions(self):
        _, paths = self.build(G1, {1, 5}, 4)
        self.assertEqual(paths.pointer(3, 1, 5, toward=5), Pointer(4, 2))
        self.assertEqual(paths.pointer(3, 1, 5, toward=1), Pointer(2, 2))
        self.assertEqual(paths.pointer(1, 1, 5, toward=1), Pointer(1, 0))
        self.assertEqual(paths.pointer(5, 1, 5, toward=1), Pointer(4, 4))
        self.assertEqual(paths.path(5, 1), [5, 4, 3, 2, 1])

    def test_single_hop_edge(self):
        _, paths = self.build(G1, {1, 2}, 1)
        self.assertEqual(paths.pointer(1, 1, 2, toward=2), Pointer(2, 1))
        self.assertEqual(paths.pointer(2, 1, 2, toward=1), Pointer(1, 1))

    def test_shared_physical_edges(self):
        spanner, paths = self.build(K4, {1, 3, 4}, 3)
        self.assertEqual(spanner.dump(), [[1, 3, 2, 1], [1, 4, 3, 1], [3, 4, 1, 3]])
        self.assertEqual(paths.pointers[2][(1, 3)], {3: Pointer(3, 1), 1: Pointer(1, 1)})
        self.assertEqual(paths.pointers[2][(1, 4)], {4: Pointer(3, 2), 1: Pointer(1, 1)})
        self.assertEqual(paths.reachable(2)[1], Pointer(1, 1))
        self.assertEqual(paths.dump()['2']['1-4'], {'1': [1, 1], '4': [3, 2]})

    def test_paths_realize_edge_weights(self):
        graph = generate('random_weighted', {'n': 48}, seed=3)
        S = sampled_skeleton(48, 3)
        params = skeleton_parameters(48, S, k=2)
        spanner, _ = build_spanner(graph, params, seed=3)
        paths, trace = reverse_paths(graph, spanner)
        for edge in spanner.edges:
            for start, end in ((edge.s, edge.t), (edge.t, edge.s)):
                nodes = paths.path(start, end)
                self.assertLessEqual(len(nodes) - 1, params.h)
                self.assertEqual(sum(graph.weight(a, b) for a, b in zip(nodes, nodes[1:])), edge.w)
                for position, x in enumerate(nodes):
                    rest = nodes[position:]
                    remaining = sum(graph.weight(a, b) for a, b in zip(rest, rest[1:]))
                    self.assertEqual(paths.pointer(x, edge.s, edge.t, toward=end).rem, remaining)
        self.assertLessEqual(trace.max_bits_edge_round, SimConfig.for_graph(48).bits)

    def test_follows_the_endpoint_of_a_tied_cluster_entry(self):
        # Cluster {2, 7}: node 10 reaches 2 in two hops and 7 in three, both at weight 3,
        # and switches to 7 at level 3 (smaller next hop). Node 11 keeps endpoint 2.
        graph = WeightedGraph.from_edges(11, [
            (10, 9, 1), (9, 2, 2), (10, 3, 1), (3, 4, 1), (4, 7, 1), (11, 10, 1),
            (1, 2, 50), (5, 2, 50), (6, 2, 50), (8, 2, 50),
        ])
        lists, _ = bsp_prime(graph, 4, 11, {2: (2, 0), 7: (2, 0)})
        self.assertEqual(lists.final(11)[0].endpoint, 2)
        self.assertEqual(lists.lookup(10, 3, (2, 0)).endpoint, 7)

        edge = make_edge(11, 2, 4)
        spanner = SkeletonSpanner(
            params=SkeletonParams(S=frozenset({2, 7, 11}), sample=frozenset({2, 7, 11}), k=1, h=4, delta=11),
            edges=(edge,),
            marks=(frozenset(),),
            origins={edge.key: EdgeOrigin(0, (2, 0))},
            lists=(lists,),
        )
        paths, _ = reverse_paths(graph, spanner)
        self.assertEqual(paths.path(2, 11), [2, 9, 10, 11])
        self.assertEqual(paths.path(11, 2), [11, 10, 9, 2])
        self.assertEqual(paths.pointers[10], {(2, 11): {2: Pointer(9, 3), 11: Pointer(11, 1)}})
        self.assertEqual(paths.pointer(2, 2, 11, toward=11), Pointer(9, 4))
