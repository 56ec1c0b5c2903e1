"""
Runs one scheme on one graph and condenses it into a MetricsRecord.

With the oracle on, every ordered pair is checked against Dijkstra: routes
and estimates for routing, tight-label routes, sketch estimates; the
diameter estimate against WD and the Steiner forest against the exact
optimum when the instance is small enough. Sweeps run the same thing over a
matrix of (n, alpha or k, seed), optionally in worker processes, and keep
the matrix order.
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Any, Callable, Iterable

import numpy as np
import pandas as pd

from bsp.exceptions import MissingEntryError
from congest.config import SimConfig
from congest.engine import RoundTrace
from congest.exceptions import SimulationError
from extensions.diameter import approx_diameter
from extensions.exceptions import ExtensionError
from extensions.sketches import build_sketches, sketch_estimate
from extensions.steiner import GsfInstance, brute_force_feasible, gsf_solve, gsf_verify
from graphs.graph import WeightedGraph, load_graph, parse_graph
from graphs.generators import generate
from graphs.oracles import DistanceOracle, GraphMetrics, metrics
from routing.decide import route
from routing.exceptions import RoutingError
from routing.tables import build_tables
from routing.tight import assign_tight_labels, tight_route
from shortrange.exceptions import ShortRangeError

from .config import INTEGER_FIELDS, RECORD_FIELDS, ExperimentConfig, MetricsRecord
from .exceptions import ExperimentError

logger = logging.getLogger(__name__)

# Failures that end one run but not a sweep.
RUN_ERRORS = (
    ValueError, KeyError, MissingEntryError, SimulationError, ShortRangeError,
    RoutingError, ExtensionError, ExperimentError,
)


@dataclass
class Evaluation:
    """What a scheme contributes to the record, plus its JSON dumps."""
    trace: RoundTrace
    fields: dict[str, Any] = field(default_factory=dict)
    stretches: list[float] = field(default_factory=list)
    problems: list[str] = field(default_factory=list)
    artifacts: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RunContext:
    config: ExperimentConfig
    g: WeightedGraph
    sim: SimConfig
    oracle: DistanceOracle | None
    shape: GraphMetrics
    instance: GsfInstance | None = None


@dataclass
class RunResult:
    config: ExperimentConfig
    record: MetricsRecord
    trace: RoundTrace | None = None
    artifacts: dict[str, Any] = field(default_factory=dict)


def load_source(config: ExperimentConfig) -> tuple[WeightedGraph, GsfInstance | None]:
    """The graph of a run; Steiner runs also get their instance."""
    if config.graph:
        text = Path(config.graph).read_text()
        if config.scheme != 'gsf':
            return load_graph(config.graph), None
        g, extra = parse_graph(text)
        if extra:
            instance = GsfInstance.parse(text)
            return instance.graph, instance
    else:
        g = generate(config.family, config.params, config.seed)
    if config.scheme == 'gsf':
        instance = random_instance(g, config.terminals, config.components, config.seed)
        return g, instance
    return g, None


def random_instance(g: WeightedGraph, terminals: int, components: int, seed: int) -> GsfInstance:
    """Terminals drawn uniformly, dealt round-robin into components."""
    rng = np.random.default_rng([seed, g.n, terminals])
    chosen = sorted(int(v) for v in rng.choice(np.arange(1, g.n + 1), size=min(terminals, g.n), replace=False))
    return GsfInstance(graph=g, components={t: i % components for i, t in enumerate(chosen)})


def ordered_pairs(g: WeightedGraph) -> Iterable[tuple[int, int]]:
    return ((v, w) for v in g.nodes for w in g.nodes if v != w)


# --- Schemes ---

def evaluate_routing(run: RunContext) -> Evaluation:
    g, config, sim, oracle = run.g, run.config, run.sim, run.oracle
    labels, tables, trace = build_tables(g, config.alpha, sim, config.seed)
    params = tables.params
    result = Evaluation(trace=trace)
    result.fields = {
        'alpha': str(params.alpha), 'k': params.k, 'L': params.L,
        'max_table_bits': tables.size_report(sim.word)['max_table_bits'],
        'label_bits': max(label.bits(sim.word) for label in labels.values()),
    }
    result.artifacts = {
        'params': params.to_dict(),
        'hierarchy': tables.hierarchy.to_dict(),
        'short_range': tables.short_range.dump(),
        'spanner': tables.spanner.to_dict(),
        'labels': {str(v): label.to_dict() for v, label in sorted(labels.items())},
    }
    if oracle is None:
        return result
    for v, w in ordered_pairs(g):
        wd = oracle.wd(v, w)
        routed = route(g, tables.tables, labels, v, w, oracle)
        result.stretches.append(routed.stretch)
        if routed.stretch > params.stretch:
            result.problems.append(f"route {v}->{w} has stretch {routed.stretch:.3f} > {params.stretch}")
        if not wd <= routed.estimate <= params.stretch * wd:
            result.problems.append(f"estimate {v}->{w} is {routed.estimate}, wd is {wd}")
    return result


def evaluate_tight(run: RunContext) -> Evaluation:
    g, config, sim, oracle = run.g, run.config, run.sim, run.oracle
    labels, tables, trace = build_tables(g, config.alpha, sim, config.seed)
    labeling, label_trace = assign_tight_labels(g, tables, sim, config.seed)
    trace.absorb(label_trace, 'tight labels')
    params = tables.params
    result = Evaluation(trace=trace)
    result.fields = {
        'alpha': str(params.alpha), 'k': params.k, 'L': params.L,
        'max_table_bits': tables.size_report(sim.word)['max_table_bits'],
        'label_bits': sim.word,
    }
    result.artifacts = {'params': params.to_dict(), 'labeling': labeling.to_dict()}
    if sorted(labeling.labels.values()) != list(g.nodes):
        result.problems.append("tight labels are not a permutation of 1..n")
        return result
    if oracle is None:
        return result
    for v, w in ordered_pairs(g):
        routed = tight_route(g, tables, labeling, v, labeling.labels[w], oracle)
        result.stretches.append(routed.stretch)
        if routed.stretch > params.tight_stretch:
            result.problems.append(f"route {v}->{w} has stretch {routed.stretch:.3f} > {params.tight_stretch}")
    return result


def evaluate_sketch(run: RunContext) -> Evaluation:
    g, config, sim, oracle = run.g, run.config, run.sim, run.oracle
    sketches, labels, trace = build_sketches(g, config.k, sim, config.seed)
    report = sketches.size_report(sim.word)
    result = Evaluation(trace=trace)
    result.fields = {
        'k': config.k, 'L': config.k,
        'max_table_bits': report['max_sketch_bits'],
        'label_bits': max(label.bits(sim.word) for label in labels.values()),
    }
    result.artifacts = {
        'sketches': sketches.to_dict(),
        'labels': {str(v): label.to_dict() for v, label in sorted(labels.items())},
    }
    if oracle is None:
        return result
    bound = sketches.stretch_bound
    for v, w in ordered_pairs(g):
        wd = oracle.wd(v, w)
        estimate = sketch_estimate(sketches[v], labels[w])
        result.stretches.append(estimate / wd)
        if not wd <= estimate <= bound * wd:
            result.problems.append(f"sketch estimate {v}->{w} is {estimate}, wd is {wd}, bound {bound}")
    return result


def evaluate_diameter(run: RunContext) -> Evaluation:
    config = run.config
    estimate, trace = approx_diameter(run.g, config.k, run.sim, config.seed)
    result = Evaluation(trace=trace)
    result.fields = {'k': config.k}
    result.artifacts = {'diameter': estimate.to_dict()}
    if run.oracle is None:
        return result
    wd = run.shape.WD
    ratio = estimate.estimate / wd if wd else 1.0
    result.stretches.append(ratio)
    if not wd <= estimate.estimate <= estimate.bound * wd:
        result.problems.append(f"diameter estimate {estimate.estimate} outside [{wd}, {estimate.bound * wd}]")
    return result


def evaluate_gsf(run: RunContext) -> Evaluation:
    config, instance = run.config, run.instance
    solution, trace = gsf_solve(instance, config.k, run.sim, config.seed)
    exact = run.oracle is not None and brute_force_feasible(instance)
    report = gsf_verify(instance, solution, config.k, oracle=exact)
    result = Evaluation(trace=trace)
    result.fields = {'k': config.k}
    result.artifacts = {'instance': instance.to_text(), 'solution': solution.to_dict(run.g), 'report': report.to_dict()}
    if report.ratio is not None:
        result.stretches.append(report.ratio)
    if not report.ok:
        result.problems.append(f"forest of weight {report.weight} fails: feasible={report.feasible}, "
                               f"optimum={report.optimum}, bound={report.bound}, closure_ok={report.closure_ok}")
    return result


EVALUATORS: dict[str, Callable[[RunContext], Evaluation]] = {
    'routing': evaluate_routing,
    'tight': evaluate_tight,
    'sketch': evaluate_sketch,
    'diameter': evaluate_diameter,
    'gsf': evaluate_gsf,
}


def execute(config: ExperimentConfig) -> RunResult:
    """Build, evaluate and summarize; domain errors propagate."""
    g, instance = load_source(config)
    sim = config.sim_config(g.n)
    run = RunContext(config=config, g=g, sim=sim, oracle=DistanceOracle(g) if sim.oracle else None,
                     shape=metrics(g), instance=instance)
    logger.info("running %s (%s) on %s, n=%d seed=%d", config.scheme, config.parameter, config.source,
                g.n, config.seed)

    evaluation = EVALUATORS[config.scheme](run)

    trace = evaluation.trace
    stretches = evaluation.stretches
    record = MetricsRecord(
        n=g.n, HD=run.shape.HD, WD=run.shape.WD, scheme=config.scheme, seed=config.seed,
        rounds=trace.rounds, messages=trace.messages, retries=trace.retries,
        max_stretch=max(stretches) if stretches else None,
        mean_stretch=fmean(stretches) if stretches else None,
        status='violated' if evaluation.problems else 'ok',
        detail='; '.join(evaluation.problems[:5]),
        **evaluation.fields,
    )
    if evaluation.problems:
        logger.warning("%s on %s: %d violations, first: %s", config.scheme, config.source,
                       len(evaluation.problems), evaluation.problems[0])
    artifacts = {'config': config.to_dict(), 'trace': trace.to_dict(), **evaluation.artifacts}
    return RunResult(config=config, record=record, trace=trace, artifacts=artifacts)


def failed_record(config: ExperimentConfig, exc: Exception) -> MetricsRecord:
    return MetricsRecord(
        n=config.n, scheme=config.scheme, seed=config.seed,
        alpha=None if config.alpha is None else str(config.alpha), k=config.k,
        status='failed', detail=f"{type(exc).__name__}: {exc}",
    )


def execute_record(config: ExperimentConfig) -> MetricsRecord:
    """execute() for sweeps: a failing run becomes a 'failed' row."""
    try:
        return execute(config).record
    except (*RUN_ERRORS, OSError) as exc:
        logger.warning("run %s %s seed=%d failed: %s", config.scheme, config.parameter, config.seed, exc)
        return failed_record(config, exc)


def _init_worker():
    import django

    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'routinglab.settings')
    django.setup()


def run_matrix(configs: list[ExperimentConfig], jobs: int = 1) -> list[MetricsRecord]:
    """Records in the order of configs, whatever order the workers finish in."""
    if jobs <= 1 or len(configs) <= 1:
        return [execute_record(config) for config in configs]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker) as executor:
        return list(executor.map(execute_record, configs))


def records_frame(records: Iterable[MetricsRecord]) -> pd.DataFrame:
    """CSV layout: RECORD_FIELDS columns, nullable integer columns."""
    frame = pd.DataFrame([record.to_row() for record in records], columns=list(RECORD_FIELDS))
    for name in INTEGER_FIELDS:
        frame[name] = frame[name].astype('Int64')
    for name in ('max_stretch', 'mean_stretch'):
        frame[name] = pd.to_numeric(frame[name]).astype('float64')
    return frame
