"""
Synchronous round engine enforcing the CONGEST(B) contract.

Each step every node (in id order) receives the messages sent to it in the
previous step, updates its state and emits an outbox. Step r delivers what
round r-1 sent, so a run of R steps uses R-1 communication rounds. Outboxes are
double-buffered, so the sequential loop behaves like simultaneous execution.
The per-edge bit budget is checked on every message.
"""
from __future__ import annotations

import hashlib
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence, TypeVar

import numpy as np

from graphs.graph import WeightedGraph

from .codec import encode, message_bits
from .config import SimConfig
from .exceptions import BudgetViolation, RetryBudgetExhausted, RoundCapExceeded, SimulationError

logger = logging.getLogger(__name__)

Message = tuple[int, ...]
Outbox = Iterable[tuple[int, Message]]
T = TypeVar('T')


class RandomStream:
    """Per-node pseudorandom bits seeded from (global seed, node id)."""

    def __init__(self, seed: int, node: int):
        self.seed = seed
        self.node = node
        self._rng = np.random.default_rng([seed, node])

    def random(self) -> float:
        return float(self._rng.random())

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def sample(self, population: Sequence[int], k: int) -> list[int]:
        """k distinct elements, returned in population order."""
        chosen = self._rng.choice(len(population), size=k, replace=False)
        return [population[i] for i in sorted(int(i) for i in chosen)]


@dataclass
class NodeContext:
    """What a node knows locally: its id, incident edges, n and its random stream."""
    id: int
    neighbors: dict[int, int]
    n: int
    cfg: SimConfig
    rng: RandomStream


@dataclass
class RoundTrace:
    rounds: int = 0
    messages: int = 0
    max_bits_edge_round: int = 0
    retries: int = 0
    digest: str | None = None
    phases: list[tuple[str, int]] = field(default_factory=list)

    def absorb(self, other: 'RoundTrace', label: str | None = None) -> 'RoundTrace':
        """Append a later, sequential execution to this one."""
        self.rounds += other.rounds
        self.messages += other.messages
        self.max_bits_edge_round = max(self.max_bits_edge_round, other.max_bits_edge_round)
        self.retries += other.retries
        if other.digest is not None:
            combined = hashlib.sha256(((self.digest or '') + other.digest).encode())
            self.digest = combined.hexdigest()
        if label:
            self.phases.append((label, other.rounds))
        else:
            self.phases.extend(other.phases)
        return self

    def to_dict(self) -> dict:
        return {
            'rounds': self.rounds,
            'messages': self.messages,
            'max_bits_edge_round': self.max_bits_edge_round,
            'retries': self.retries,
        }


class Protocol(ABC):
    """A per-node program: state initializer, round handler, termination predicate."""

    name = 'protocol'

    @abstractmethod
    def setup(self, node: NodeContext) -> Any:
        """Initial state of one node."""

    @abstractmethod
    def step(self, node: NodeContext, state: Any, inbox: list[tuple[int, Message]], round_no: int) -> Outbox:
        """Consume this round's inbox (sender, fields) pairs; return (neighbor, fields) pairs to send."""

    @abstractmethod
    def finished(self, node: NodeContext, state: Any) -> bool:
        """True once the node has nothing left to do."""

    def output(self, node: NodeContext, state: Any) -> Any:
        return state


class Simulator:
    """Runs one protocol on one graph. Single-threaded and deterministic."""

    def __init__(self, g: WeightedGraph, protocol: Protocol, cfg: SimConfig, seed: int = 0):
        self.graph = g
        self.protocol = protocol
        self.cfg = cfg
        self.seed = seed

    def run(self) -> tuple[dict[int, Any], RoundTrace]:
        g, protocol, cfg = self.graph, self.protocol, self.cfg
        nodes = list(g.nodes)
        contexts = {
            v: NodeContext(id=v, neighbors=g.neighbors(v), n=g.n, cfg=cfg, rng=RandomStream(self.seed, v))
            for v in nodes
        }
        states = {v: protocol.setup(contexts[v]) for v in nodes}
        inbox: dict[int, list] = {v: [] for v in nodes}
        trace = RoundTrace()
        digest = hashlib.sha256() if cfg.record_digest else None
        budget, word = cfg.bits, cfg.word
        in_flight = 0
        round_no = 0

        while in_flight or not all(protocol.finished(contexts[v], states[v]) for v in nodes):
            round_no += 1
            if round_no > cfg.max_rounds:
                raise RoundCapExceeded(protocol.name, cfg.max_rounds)
            outbox: dict[int, list] = {v: [] for v in nodes}
            in_flight = 0
            for v in nodes:
                ctx = contexts[v]
                sent = protocol.step(ctx, states[v], inbox[v], round_no)
                if not sent:
                    continue
                load: dict[int, int] = {}
                for target, fields in sent:
                    if target not in ctx.neighbors:
                        raise SimulationError(f"round {round_no}: node {v} addressed non-neighbor {target}")
                    bits = load.get(target, 0) + message_bits(fields, word)
                    if bits > budget:
                        raise BudgetViolation(round_no, v, target, bits, budget)
                    load[target] = bits
                    outbox[target].append((v, fields))
                    in_flight += 1
                    if digest is not None:
                        digest.update(f"{round_no}:{v}>{target}:".encode())
                        digest.update(encode(fields, word))
                if load:
                    trace.max_bits_edge_round = max(trace.max_bits_edge_round, max(load.values()))
            trace.messages += in_flight
            inbox = outbox

        # The final step only consumes what the previous round delivered.
        trace.rounds = max(0, round_no - 1)
        if digest is not None:
            trace.digest = digest.hexdigest()
        logger.debug("%s finished: %d rounds, %d messages", protocol.name, trace.rounds, trace.messages)
        outputs = {v: protocol.output(contexts[v], states[v]) for v in nodes}
        return outputs, trace


def run(g: WeightedGraph, protocol: Protocol, cfg: SimConfig, seed: int = 0) -> tuple[dict[int, Any], RoundTrace]:
    """Execute protocol on g in lock-step rounds; returns per-node outputs and the trace."""
    return Simulator(g, protocol, cfg, seed).run()


def with_retries(attempt: Callable[[int], T], validate: Callable[[T], list[str]], budget: int,
                 trace: RoundTrace, what: str) -> T:
    """
    Validate-and-retry hook for constructions that succeed only w.h.p.

    attempt(index) builds a candidate (charging its rounds to trace itself);
    validate returns a list of problems, empty when the candidate is accepted.
    Each rejected candidate counts as one retry.
    """
    problems: list[str] = []
    for index in range(budget + 1):
        candidate = attempt(index)
        problems = validate(candidate)
        if not problems:
            return candidate
        trace.retries += 1
        logger.warning("%s: attempt %d rejected (%s)", what, index + 1, problems[0])
    raise RetryBudgetExhausted(what, budget + 1, problems)
