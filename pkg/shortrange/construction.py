"""
Stage-by-stage construction of the short-range tables.

Stage i runs BSP with the members of S_(i-1) as sources (id = (node, level)),
range h_i and overlap delta_i. From its final list every node reads its
closest landmark Y_v(i) in S_i, the set H_v(i) of sources no farther than
Y_v(i), and the tree parent towards Y_v(i). A stage that fails validation
is resampled and rerun; earlier stages are kept.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

from bsp.lists import LevelLists
from bsp.protocol import bsp
from congest.config import SimConfig
from congest.engine import RoundTrace, with_retries
from graphs.graph import WeightedGraph
from graphs.oracles import DistanceOracle

from .exceptions import ValidationFailure
from .hierarchy import Hierarchy
from .trees import TreeLabel, TreeTable, VoronoiForest, build_trees, singleton_tables

logger = logging.getLogger(__name__)


class HEntry(NamedTuple):
    u: int
    d: int
    next: int


@dataclass(frozen=True)
class StageTable:
    """Node v's view of one stage."""
    Y: int
    dY: int
    hops: int
    parent: int | None
    H: dict[int, HEntry]


@dataclass(frozen=True)
class StageResult:
    index: int
    hierarchy: Hierarchy
    tables: dict[int, StageTable]
    missing: tuple[int, ...]
    full: tuple[int, ...]


def _hop_level(lists: LevelLists, v: int, entry) -> tuple[int, int]:
    """First level at which the entry's distance is reached, and the next hop recorded there."""
    for t in range(lists.h + 1):
        found = lists.lookup(v, t, entry.s)
        if found is not None and found.d == entry.d:
            return t, found.next
    return lists.h, entry.next


def run_stage(g: WeightedGraph, hier: Hierarchy, i: int, cfg: SimConfig, seed: int = 0) -> tuple[StageResult, RoundTrace]:
    sources = hier.stage_sources(i)
    lists, trace = bsp(g, hier.h[i], hier.delta[i], sources, cfg, seed)
    # A full list whose entries are all within d(Y) may have lost members of H.
    may_truncate = hier.delta[i] < len(sources)
    tables, missing, full = {}, [], []
    for v in g.nodes:
        entries = lists.final(v)
        landmarks = [entry for entry in entries if entry.s[1] >= i]
        if not landmarks:
            missing.append(v)
            continue
        d_min = min(entry.d for entry in landmarks)
        ranked = []
        for entry in landmarks:
            if entry.d == d_min:
                hops, parent = _hop_level(lists, v, entry)
                ranked.append((hops, entry.s[0], parent))
        hops, y, parent = min(ranked)
        H = {entry.s[0]: HEntry(entry.s[0], entry.d, entry.next) for entry in entries if entry.d <= d_min}
        if may_truncate and len(entries) == hier.delta[i] and max(entry.d for entry in entries) <= d_min:
            full.append(v)
        tables[v] = StageTable(Y=y, dY=d_min, hops=hops, parent=None if y == v else parent, H=H)
    return StageResult(i, hier, tables, tuple(missing), tuple(full)), trace


def validate_stage(g: WeightedGraph, stage: StageResult, oracle: DistanceOracle | None) -> list[str]:
    """Everything that must hold after stage i; an empty list means accepted."""
    hier, i = stage.hierarchy, stage.index
    landmarks = hier.members(i)
    problems = []
    if not landmarks:
        return [f"S_{i} is empty"]
    problems.extend(f"node {v} found no landmark of S_{i}" for v in stage.missing)
    problems.extend(f"node {v}: H_{v}({i}) may be truncated" for v in stage.full)
    if problems:
        return problems

    for v, table in stage.tables.items():
        if table.parent is not None and stage.tables[table.parent].Y != table.Y:
            problems.append(f"node {v}: parent {table.parent} lies in another cell")

    if oracle is None:
        return problems

    sources = hier.members(i - 1)
    clamped = hier.h[i] >= g.n - 1
    for v, table in stage.tables.items():
        ranked = min((oracle.wd(v, u), oracle.hops(v, u), u) for u in landmarks)
        if (ranked[2], ranked[0]) != (table.Y, table.dY):
            problems.append(f"node {v}: Y={table.Y} at {table.dY}, expected {ranked[2]} at {ranked[0]}")
            continue
        expected = {u for u in sources if oracle.wd(v, u) <= table.dY}
        if set(table.H) != expected:
            problems.append(f"node {v}: H_{v}({i}) differs from the exact set")
            continue
        if len(table.H) > hier.delta[i]:
            problems.append(f"node {v}: |H| = {len(table.H)} exceeds delta_{i} = {hier.delta[i]}")
        for u, entry in table.H.items():
            if entry.d != oracle.wd(v, u):
                problems.append(f"node {v}: d({u}) = {entry.d}, exact {oracle.wd(v, u)}")
            elif not clamped and not oracle.in_ball(v, u, hier.h[i]):
                problems.append(f"node {v}: {u} is outside ball({hier.h[i]})")
            elif u == v and entry.next != v:
                problems.append(f"node {v}: own entry points to {entry.next}")
            elif u != v and g.weight(v, entry.next) + oracle.wd(entry.next, u) != entry.d:
                problems.append(f"node {v}: next hop {entry.next} towards {u} is not on a shortest path")
    return problems


@dataclass(frozen=True)
class ShortRangeTables:
    """
    stages[v][i] for i = 0..L. Stage 0 is trivial: Y_v(0) = v and H is empty.
    """
    hierarchy: Hierarchy
    stages: dict[int, tuple[StageTable, ...]]
    trees: VoronoiForest

    @property
    def L(self) -> int:
        return self.hierarchy.L

    def stage(self, v: int, i: int) -> StageTable:
        return self.stages[v][i]

    def tree_label(self, v: int, i: int) -> TreeLabel:
        return self.trees.table(v, i).label()

    def tree_table(self, v: int, i: int) -> TreeTable:
        return self.trees.table(v, i)

    def dump(self) -> dict[str, dict]:
        result = {}
        for v, stages in sorted(self.stages.items()):
            result[str(v)] = {
                'level': self.hierarchy.levels[v],
                'stages': [
                    {
                        'Y': stage.Y,
                        'dY': stage.dY,
                        'H': [[u, entry.d, entry.next] for u, entry in sorted(stage.H.items())],
                        'tree_label': [self.trees.table(v, i).enter, self.trees.table(v, i).exit],
                    }
                    for i, stage in enumerate(stages)
                ],
            }
        return result


def build_short_range(g: WeightedGraph, hier: Hierarchy, cfg: SimConfig | None = None,
                      seed: int = 0) -> tuple[ShortRangeTables, VoronoiForest, RoundTrace]:
    """
    Run stages 1..L with validation. Returns the tables (hierarchy possibly
    resampled), the Voronoi forest of every stage and the total trace.
    """
    cfg = cfg or SimConfig.for_graph(g.n)
    oracle = DistanceOracle(g) if cfg.oracle else None
    trace = RoundTrace()
    stage_tables = [{v: StageTable(Y=v, dY=0, hops=0, parent=None, H={}) for v in g.nodes}]
    forest = [singleton_tables(g.nodes)]

    for i in range(1, hier.L + 1):
        current = hier

        def attempt(index, i=i):
            nonlocal current
            if index > 0:
                current = current.resample(i, index)
            stage, stage_trace = run_stage(g, current, i, cfg, seed)
            trace.absorb(stage_trace, f'stage {i} bsp')
            return stage

        if hier.forced:
            stage = attempt(0)
            problems = validate_stage(g, stage, oracle)
            if problems:
                raise ValidationFailure(i, problems)
        else:
            stage = with_retries(attempt, lambda s: validate_stage(g, s, oracle), cfg.retry_budget,
                                 trace, f'short-range stage {i}')
        hier = stage.hierarchy

        tables, tree_trace = build_trees(
            g,
            parent={v: t.parent for v, t in stage.tables.items()},
            root={v: t.Y for v, t in stage.tables.items()},
            dist={v: t.dY for v, t in stage.tables.items()},
            cfg=cfg, seed=seed,
        )
        trace.absorb(tree_trace, f'stage {i} trees')
        stage_tables.append(stage.tables)
        forest.append(tables)
        logger.info("short-range stage %d validated: |S_%d| = %d, max |H| = %d",
                    i, i, len(hier.members(i)), max(len(t.H) for t in stage.tables.values()))

    voronoi = VoronoiForest(tuple(forest))
    result = ShortRangeTables(
        hierarchy=hier,
        stages={v: tuple(tables[v] for tables in stage_tables) for v in g.nodes},
        trees=voronoi,
    )
    return result, voronoi, trace
