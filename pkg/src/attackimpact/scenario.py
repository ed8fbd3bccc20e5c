"""What-if engine: vulnerability fixes, node monitoring, link-weight changes.

Actions never mutate the input model; they build a derived model whose
exploit factors and network weights differ. A delta report runs the whole
pipeline (reliability, resolution, propagation, metrics) on both models and
reports relative changes with the 0/0 -> 0 convention.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

from .combiner import ResolvedVector, needed_pairs, resolve_vectors
from .metrics import METRIC_NAMES, MetricsReport, compute_metrics
from .model import CombinedModel, NetworkGraph, _natural_key
from .propagation import PropagationResult, propagate
from .reliability import EngineConfig, ReliabilityTable, reliability_table


class UnknownVulnerability(KeyError):
    pass


class UnknownNode(KeyError):
    pass


class UnknownEdge(KeyError):
    pass


@dataclass(frozen=True)
class FixVulnerability:
    """Set exploitability to zero on every vector carrying the vulnerability."""

    vulnerability: str


@dataclass(frozen=True)
class MonitorNode:
    """Scale exploitability of the node's inbound and outbound vectors by f.

    Vectors internal to the node are untouched. Vectors from the start state
    count as inbound, vectors into an end state as outbound.
    """

    node: str
    factor: float

    def __post_init__(self):
        if not 0.0 <= self.factor <= 1.0:
            raise ValueError(f"monitor factor {self.factor} outside [0, 1]")


@dataclass(frozen=True)
class SetAllLinkWeights:
    weight: float

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"link weight {self.weight} outside [0, 1]")


@dataclass(frozen=True)
class SetLinkWeight:
    a: str
    b: str
    weight: float

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"link weight {self.weight} outside [0, 1]")


ScenarioAction = Union[FixVulnerability, MonitorNode,
                       SetAllLinkWeights, SetLinkWeight]


def apply(model: CombinedModel,
          actions: Sequence[ScenarioAction]) -> CombinedModel:
    """A new model with every action applied; the input stays untouched."""
    factors = dict(model.exploit_factors)
    network = model.network
    known_vulns = {v.id for v in model.attack.catalog}
    for action in actions:
        if isinstance(action, FixVulnerability):
            if action.vulnerability not in known_vulns:
                raise UnknownVulnerability(action.vulnerability)
            for vec in model.attack.vectors:
                if vec.vulnerability == action.vulnerability:
                    factors[vec.id] = 0.0
        elif isinstance(action, MonitorNode):
            if action.node not in network.nodes:
                raise UnknownNode(action.node)
            group = model.grouping.states_of(action.node)
            for vec in model.attack.vectors:
                inbound = vec.target in group and vec.source not in group
                outbound = vec.source in group and vec.target not in group
                if inbound or outbound:
                    factors[vec.id] = factors.get(vec.id, 1.0) * action.factor
        elif isinstance(action, SetAllLinkWeights):
            network = network.with_weights(action.weight)
        elif isinstance(action, SetLinkWeight):
            key = frozenset((action.a, action.b))
            if not any(frozenset((a, b)) == key for a, b, _ in network.edges):
                raise UnknownEdge(f"{action.a}-{action.b}")
            network = network.with_weights({(action.a, action.b): action.weight})
        else:
            raise TypeError(f"unknown scenario action {action!r}")
    return CombinedModel(model.attack, network, model.grouping, factors)


@dataclass(frozen=True)
class Evaluation:
    """One full pipeline run, kept together for provenance."""

    model: CombinedModel
    table: ReliabilityTable
    resolved: list[ResolvedVector]
    propagation: PropagationResult
    metrics: MetricsReport


def evaluate(model: CombinedModel,
             engine: EngineConfig = EngineConfig()) -> Evaluation:
    """Reliability table, vector resolution, propagation and metrics."""
    table = reliability_table(model.network, needed_pairs(model), engine)
    resolved = resolve_vectors(model, table)
    prop = propagate(model, resolved)
    metrics = compute_metrics(prop, resolved, model)
    return Evaluation(model, table, resolved, prop, metrics)


def relative_change(before: float, after: float) -> float | None:
    """(after - before) / before with 0/0 -> 0; None flags 0 -> nonzero."""
    if before == 0.0:
        return 0.0 if after == 0.0 else None
    return (after - before) / before


@dataclass(frozen=True)
class DeltaReport:
    """Baseline and scenario metrics plus per-entry relative changes.

    ``anomalies`` lists (metric, subject) pairs that moved off an exact zero
    baseline; their relative change is undefined (None). Pure mitigations
    never produce them.
    """

    baseline: MetricsReport
    scenario: MetricsReport
    relative: Mapping[str, Mapping[str, float | None]]
    anomalies: tuple[tuple[str, str], ...]

    def relative_of(self, metric: str, subject: str) -> float | None:
        return self.relative[metric][subject]


def _build_delta(baseline: MetricsReport, scenario: MetricsReport) -> DeltaReport:
    relative: dict[str, dict[str, float | None]] = {}
    anomalies: list[tuple[str, str]] = []
    for name in METRIC_NAMES:
        before_map = baseline.metric(name)
        after_map = scenario.metric(name)
        entry: dict[str, float | None] = {}
        for subject, before in before_map.items():
            change = relative_change(before, after_map[subject])
            entry[subject] = change
            if change is None:
                anomalies.append((name, subject))
        relative[name] = entry
    return DeltaReport(baseline, scenario, relative, tuple(anomalies))


def delta(model: CombinedModel, actions: Sequence[ScenarioAction],
          engine: EngineConfig = EngineConfig(),
          baseline: Evaluation | None = None) -> DeltaReport:
    """Full-pipeline comparison of the model with and without the actions."""
    base = baseline if baseline is not None else evaluate(model, engine)
    changed = evaluate(apply(model, actions), engine)
    return _build_delta(base.metrics, changed.metrics)


@dataclass(frozen=True)
class SweepPoint:
    axis_value: str
    actions: tuple[ScenarioAction, ...]
    delta: DeltaReport


def sweep_vulnerabilities(model: CombinedModel,
                          engine: EngineConfig = EngineConfig(),
                          vulnerabilities: Iterable[str] | None = None,
                          workers: int = 1) -> list[SweepPoint]:
    """One single-fix delta per vulnerability, ordered by id."""
    if vulnerabilities is None:
        ids = sorted((v.id for v in model.attack.catalog), key=_natural_key)
    else:
        ids = list(vulnerabilities)
    actions = [(v, (FixVulnerability(v),)) for v in ids]
    return _run_sweep(model, engine, actions, workers)


def sweep_monitoring(model: CombinedModel, factor: float = 0.2,
                     engine: EngineConfig = EngineConfig(),
                     nodes: Iterable[str] | None = None,
                     workers: int = 1) -> list[SweepPoint]:
    """One single-node monitoring delta per grouped node, ordered by node."""
    if nodes is None:
        ids = sorted(model.grouping.groups, key=_natural_key)
    else:
        ids = list(nodes)
    actions = [(n, (MonitorNode(n, factor),)) for n in ids]
    return _run_sweep(model, engine, actions, workers)


def sweep_weights(model: CombinedModel, weights: Sequence[float],
                  engine: EngineConfig = EngineConfig(),
                  workers: int = 1) -> list[SweepPoint]:
    """One delta per global link-weight value, in the given order."""
    actions = [(format(w, "g"), (SetAllLinkWeights(w),)) for w in weights]
    return _run_sweep(model, engine, actions, workers)


def _run_sweep(model: CombinedModel, engine: EngineConfig,
               labelled_actions: list[tuple[str, tuple[ScenarioAction, ...]]],
               workers: int) -> list[SweepPoint]:
    baseline = evaluate(model, engine)

    def run(item: tuple[str, tuple[ScenarioAction, ...]]) -> SweepPoint:
        label, actions = item
        report = delta(model, actions, engine, baseline=baseline)
        return SweepPoint(label, actions, report)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, labelled_actions))
    return [run(item) for item in labelled_actions]
