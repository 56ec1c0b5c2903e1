from collections import Counter

import networkx as nx
import numpy as np
from django.test import SimpleTestCase, override_settings

from graphs.generators import generate
from graphs.graph import WeightedGraph
from graphs.oracles import metrics

from .broadcast import aggregate_max, broadcast_all, build_bfs_tree
from .codec import decode, encode, layout, message_bits, word_bits
from .config import SimConfig
from .engine import Protocol, RoundTrace, run, with_retries
from .exceptions import BudgetViolation, EncodingError, RetryBudgetExhausted, RoundCapExceeded, SimulationError

G1 = WeightedGraph.from_edges(5, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1), (1, 5, 10)])


class FloodToken(Protocol):
    name = 'flood-token'

    def setup(self, node):
        return {'has': node.id == 1, 'sent': False}

    def step(self, node, state, inbox, round_no):
        if inbox:
            state['has'] = True
        if state['has'] and not state['sent']:
            state['sent'] = True
            senders = {sender for sender, _ in inbox}
            return [(u, (1,)) for u in node.neighbors if u not in senders]
        return ()

    def finished(self, node, state):
        return state['sent']


class Shout(Protocol):
    """Node 1 puts `words` one-word fields on the edge to its first neighbor."""

    def __init__(self, words, target=None):
        self.words = words
        self.target = target

    def setup(self, node):
        return {'done': False}

    def step(self, node, state, inbox, round_no):
        state['done'] = True
        if node.id != 1:
            return ()
        target = self.target or min(node.neighbors)
        return [(target, (0,) * self.words)]

    def finished(self, node, state):
        return state['done']


class Gossip(Protocol):
    """Random values spread for a fixed number of rounds; output the maximum seen."""

    name = 'gossip'
    ROUNDS = 5

    def setup(self, node):
        return {'best': int(node.rng.random() * 1000), 'rounds': 0}

    def step(self, node, state, inbox, round_no):
        for _, fields in inbox:
            state['best'] = max(state['best'], fields[0])
        if state['rounds'] == self.ROUNDS:
            return ()
        state['rounds'] += 1
        if node.rng.bernoulli(0.5):
            return [(u, (state['best'],)) for u in node.neighbors]
        return ()

    def finished(self, node, state):
        return state['rounds'] == self.ROUNDS

    def output(self, node, state):
        return state['best']


class Forever(Protocol):
    def setup(self, node):
        return None

    def step(self, node, state, inbox, round_no):
        return ()

    def finished(self, node, state):
        return False


class EngineTests(SimpleTestCase):

    def test_flood_on_path_takes_four_rounds(self):
        p5 = generate('path', {'n': 5})
        outputs, trace = run(p5, FloodToken(), SimConfig.for_graph(5))
        self.assertEqual(trace.rounds, 4)
        self.assertEqual(trace.messages, 4)
        self.assertTrue(all(state['has'] for state in outputs.values()))

    def test_budget_violation(self):
        cfg = SimConfig.for_graph(5)
        with self.assertRaises(BudgetViolation) as ctx:
            run(G1, Shout(2 * cfg.bits // cfg.word), cfg)
        self.assertEqual(ctx.exception.bits, 2 * cfg.bits)
        self.assertEqual((ctx.exception.sender, ctx.exception.receiver), (1, 2))

    def test_exact_budget_is_allowed(self):
        cfg = SimConfig.for_graph(5)
        _, trace = run(G1, Shout(cfg.bits // cfg.word), cfg)
        self.assertEqual(trace.max_bits_edge_round, cfg.bits)

    def test_non_neighbor_rejected(self):
        with self.assertRaisesMessage(SimulationError, 'non-neighbor 3'):
            run(G1, Shout(1, target=3), SimConfig.for_graph(5))

    def test_seeded_runs_are_identical(self):
        graph = generate('random_weighted', {'n': 24}, seed=2)
        cfg = SimConfig.for_graph(graph.n, record_digest=True)
        first = run(graph, Gossip(), cfg, seed=7)
        second = run(graph, Gossip(), cfg, seed=7)
        self.assertEqual(first[0], second[0])
        self.assertEqual(first[1].digest, second[1].digest)
        self.assertEqual(first[1].to_dict(), second[1].to_dict())
        self.assertNotEqual(run(graph, Gossip(), cfg, seed=8)[1].digest, first[1].digest)

    def test_round_cap(self):
        with self.assertRaises(RoundCapExceeded):
            run(G1, Forever(), SimConfig.for_graph(5, max_rounds=10))

    def test_trace_export_keys(self):
        _, trace = run(G1, FloodToken(), SimConfig.for_graph(5))
        self.assertEqual(set(trace.to_dict()), {'rounds', 'messages', 'max_bits_edge_round', 'retries'})

    def test_absorb_adds_rounds(self):
        total = RoundTrace()
        total.absorb(RoundTrace(rounds=3, messages=5, max_bits_edge_round=9), 'a')
        total.absorb(RoundTrace(rounds=2, messages=1, max_bits_edge_round=4), 'b')
        self.assertEqual((total.rounds, total.messages, total.max_bits_edge_round), (5, 6, 9))
        self.assertEqual(total.phases, [('a', 3), ('b', 2)])


class RetryHookTests(SimpleTestCase):

    def test_retries_are_counted(self):
        trace = RoundTrace()
        result = with_retries(lambda index: index, lambda value: [] if value == 2 else ['too small'],
                              budget=5, trace=trace, what='counter')
        self.assertEqual(result, 2)
        self.assertEqual(trace.retries, 2)

    def test_budget_exhausted(self):
        with self.assertRaises(RetryBudgetExhausted) as ctx:
            with_retries(lambda index: index, lambda value: ['never'], budget=2, trace=RoundTrace(), what='x')
        self.assertEqual(ctx.exception.attempts, 3)
        self.assertEqual(ctx.exception.problems, ['never'])


class BfsTreeTests(SimpleTestCase):

    def test_path(self):
        tree, trace = build_bfs_tree(generate('path', {'n': 5}))
        self.assertEqual(tree.root, 1)
        self.assertEqual(tree.depth[5], 4)
        self.assertEqual(tree.parent[5], 4)
        self.assertLessEqual(trace.rounds, 2 * 4 + 3)

    def test_star(self):
        tree, _ = build_bfs_tree(generate('star', {'n': 5}))
        self.assertEqual({tree.depth[v] for v in range(2, 6)}, {1})
        self.assertEqual(tree.children[1], (2, 3, 4, 5))

    def test_g1(self):
        tree, _ = build_bfs_tree(G1)
        self.assertEqual(tree.depth[4], 2)
        self.assertEqual(tree.parent[4], 5)
        self.assertEqual(tree.parent[3], 2)
        self.assertIsNone(tree.parent[1])

    def test_depth_is_hop_distance(self):
        graph = generate('random_weighted', {'n': 40}, seed=4)
        tree, _ = build_bfs_tree(graph)
        self.assertEqual(tree.depth, nx.single_source_shortest_path_length(graph.to_networkx(), 1))
        for v, parent in tree.parent.items():
            if parent is not None:
                self.assertTrue(graph.has_edge(v, parent))
                self.assertIn(v, tree.children[parent])

    def test_single_node(self):
        tree, _ = build_bfs_tree(WeightedGraph.from_edges(1, []))
        self.assertEqual(tree.depth, {1: 0})


class BroadcastTests(SimpleTestCase):

    def test_single_message_on_path(self):
        p5 = generate('path', {'n': 5})
        outputs, trace = broadcast_all(p5, {3: [(7,)]})
        self.assertEqual(set(outputs.values()), {((7,),)})
        self.assertLessEqual(trace.rounds, 1 + 4 * 4 + 8)

    def test_no_messages(self):
        p5 = generate('path', {'n': 5})
        outputs, trace = broadcast_all(p5, {})
        self.assertEqual(set(outputs.values()), {()})
        self.assertLessEqual(trace.rounds, 4 * 4 + 8)

    def test_all_nodes_hold_every_message(self):
        graph = generate('random_weighted', {'n': 32}, seed=9)
        rng = np.random.default_rng(1)
        items = {}
        for index in range(10):
            owner = int(rng.integers(1, graph.n + 1))
            items.setdefault(owner, []).append((index, int(rng.integers(0, 1000))))
        outputs, trace = broadcast_all(graph, items)
        expected = Counter(item for messages in items.values() for item in messages)
        for v in graph.nodes:
            self.assertEqual(Counter(outputs[v]), expected)
        self.assertEqual(len(set(outputs.values())), 1)
        self.assertLessEqual(trace.rounds, 10 + 4 * metrics(graph).HD + 8)
        self.assertLessEqual(trace.max_bits_edge_round, SimConfig.for_graph(graph.n).bits)

    def test_bound_with_many_messages_at_one_node(self):
        graph = generate('grid', {'rows': 4, 'cols': 5})
        items = {20: [(i,) for i in range(30)]}
        outputs, trace = broadcast_all(graph, items)
        self.assertEqual(outputs[1], tuple((i,) for i in range(30)))
        self.assertLessEqual(trace.rounds, 30 + 4 * metrics(graph).HD + 8)

    def test_oversized_item_rejected(self):
        cfg = SimConfig.for_graph(5)
        with self.assertRaises(EncodingError):
            broadcast_all(G1, {1: [(0,) * (cfg.bits // cfg.word)]}, cfg)

    def test_reuses_prebuilt_tree(self):
        tree, tree_trace = build_bfs_tree(G1)
        _, with_tree = broadcast_all(G1, {2: [(1,)]}, tree=tree)
        _, without = broadcast_all(G1, {2: [(1,)]})
        self.assertEqual(without.rounds, with_tree.rounds + tree_trace.rounds)

    def test_aggregate_max(self):
        graph = generate('random_weighted', {'n': 20}, seed=1)
        value, trace = aggregate_max(graph, {v: (v * 37) % 23 for v in graph.nodes})
        self.assertEqual(value, 22)
        self.assertLessEqual(trace.rounds, 4 * metrics(graph).HD + 8)


class CodecTests(SimpleTestCase):

    def test_word_size(self):
        self.assertEqual(word_bits(5), 3)
        self.assertEqual(word_bits(8), 4)
        self.assertEqual(word_bits(1), 1)

    def test_layout_and_bits(self):
        self.assertEqual(layout((0, 7, 8, 4095), 3), (1, 1, 2, 4))
        self.assertEqual(message_bits((0, 7, 8), 3), 12)

    def test_encode_decode(self):
        fields = (3, 250, 0, 1)
        data = encode(fields, 4)
        self.assertEqual(decode(data, layout(fields, 4), 4), fields)

    def test_negative_rejected(self):
        with self.assertRaises(EncodingError):
            message_bits((1, -2), 4)


class SimConfigTests(SimpleTestCase):

    def test_defaults(self):
        cfg = SimConfig.for_graph(64)
        self.assertEqual(cfg.word, 7)
        self.assertEqual(cfg.bits, 56)

    def test_entry_must_fit(self):
        with self.assertRaises(ValueError):
            SimConfig.for_graph(64, bits=20)

    @override_settings(ROUTINGLAB={
        'BITS_FACTOR': 6, 'ENTRY_WORDS': 4, 'MAX_ROUNDS': 100, 'RETRY_BUDGET': 1, 'HIERARCHY_C': 2.0,
        'HIERARCHY_C_PRIME': 2.0, 'SKELETON_C': 2.0, 'WEIGHT_EXPONENT': 3, 'ORACLE': False,
    })
    def test_settings_drive_defaults(self):
        cfg = SimConfig.for_graph(16)
        self.assertEqual((cfg.bits, cfg.max_rounds, cfg.oracle), (30, 100, False))
        self.assertEqual(SimConfig.for_graph(16, retry_budget=None).retry_budget, 1)
