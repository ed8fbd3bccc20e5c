"""Expected-impact metrics for states and service nodes.

Per state: expected impact (inbound steps weighted by traversal probability)
and expected cumulative impact (adding every ancestor on feasible paths).
Per service node: cumulative inbound, cumulative outbound, and node-wise
impact. The ancestor sets are taken over feasible paths only, so mitigation
scenarios that cut a path also remove its stranded contributions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .combiner import ResolvedVector
from .model import CombinedModel, StateKind, _natural_key
from .propagation import (
    PropagationResult,
    UnknownState,
    on_feasible_path_to,
    reachable_from_start,
)


class UnknownNode(KeyError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    """All five metrics for one resolved model."""

    expected_impact: Mapping[str, float]
    cumulative_impact: Mapping[str, float]
    inbound: Mapping[str, float]
    outbound: Mapping[str, float]
    node_wise: Mapping[str, float]

    def metric(self, name: str) -> Mapping[str, float]:
        return getattr(self, name)


METRIC_NAMES = ("expected_impact", "cumulative_impact",
                "inbound", "outbound", "node_wise")


def immediate_predecessors(model: CombinedModel, state_id: str) -> set[str]:
    """The set A: states one inbound vector away."""
    return {v.source for v in model.attack.vectors if v.target == state_id}


def cumulative_ancestors(model: CombinedModel, resolved: list[ResolvedVector],
                         state_id: str) -> set[str]:
    """The set B: states on some feasible start-to-state path, state excluded."""
    return on_feasible_path_to(model, resolved, {state_id})


def inbound_ancestors(model: CombinedModel, resolved: list[ResolvedVector],
                      node: str) -> set[str]:
    """The set C: non-group states on feasible paths into the node's group."""
    group = model.grouping.states_of(node)
    if not group:
        raise UnknownNode(node)
    return on_feasible_path_to(model, resolved, set(group))


def outbound_frontier(model: CombinedModel, node: str) -> set[str]:
    """The set D: states immediately following the group, internals included."""
    group = model.grouping.states_of(node)
    if not group:
        raise UnknownNode(node)
    return {v.target for v in model.attack.vectors if v.source in group}


def expected_impact(prop: PropagationResult, resolved: list[ResolvedVector],
                    i: str) -> float:
    """Sum of traversal probability times impact over inbound vectors."""
    if i not in prop.state_prob:
        raise UnknownState(i)
    total = 0.0
    for vec in resolved:
        if vec.target == i:
            total += prop.edge_prob.get((vec.source, vec.target), 0.0) * vec.impact
    return total


def _expected_impacts(prop: PropagationResult,
                      resolved: list[ResolvedVector],
                      model: CombinedModel) -> dict[str, float]:
    table = {s.id: 0.0 for s in model.attack.states}
    for vec in resolved:
        step = prop.edge_prob.get((vec.source, vec.target), 0.0)
        table[vec.target] += step * vec.impact
    return table


def cumulative_impact(prop: PropagationResult, resolved: list[ResolvedVector],
                      model: CombinedModel, i: str) -> float:
    """Expected impact of the state plus that of every feasible ancestor."""
    if i not in prop.state_prob:
        raise UnknownState(i)
    impacts = _expected_impacts(prop, resolved, model)
    reachable = reachable_from_start(model, resolved)
    if i not in reachable:
        return 0.0
    ancestors = cumulative_ancestors(model, resolved, i)
    return impacts[i] + sum(impacts[j] for j in ancestors)


def inbound_impact(prop: PropagationResult, resolved: list[ResolvedVector],
                   model: CombinedModel, n: str) -> float:
    """Impact accumulated up to and including the steps into the node."""
    group = model.grouping.states_of(n)
    if not group:
        raise UnknownNode(n)
    impacts = _expected_impacts(prop, resolved, model)
    ancestors = inbound_ancestors(model, resolved, n)
    total = sum(impacts[i] for i in ancestors)
    for vec in resolved:
        if vec.source in ancestors and vec.target in group:
            total += prop.edge_prob.get((vec.source, vec.target), 0.0) * vec.impact
    return total


def outbound_impact(prop: PropagationResult, resolved: list[ResolvedVector],
                    model: CombinedModel, n: str) -> float:
    """Inbound impact plus the steps leaving the group (internals included)."""
    group = model.grouping.states_of(n)
    if not group:
        raise UnknownNode(n)
    total = inbound_impact(prop, resolved, model, n)
    frontier = outbound_frontier(model, n)
    for vec in resolved:
        if vec.source in group and vec.target in frontier:
            total += prop.edge_prob.get((vec.source, vec.target), 0.0) * vec.impact
    return total


def node_wise_impact(prop: PropagationResult, resolved: list[ResolvedVector],
                     model: CombinedModel, n: str) -> float:
    """Sum of expected impacts of the node's own states."""
    group = model.grouping.states_of(n)
    if not group:
        raise UnknownNode(n)
    impacts = _expected_impacts(prop, resolved, model)
    return sum(impacts[i] for i in group)


def compute_metrics(prop: PropagationResult, resolved: list[ResolvedVector],
                    model: CombinedModel) -> MetricsReport:
    """The full report, state and node maps in natural id order."""
    impacts = _expected_impacts(prop, resolved, model)
    reachable = reachable_from_start(model, resolved)
    state_ids = sorted((s.id for s in model.attack.states), key=_natural_key)

    cumulative: dict[str, float] = {}
    for state_id in state_ids:
        if state_id not in reachable:
            cumulative[state_id] = 0.0
            continue
        ancestors = cumulative_ancestors(model, resolved, state_id)
        cumulative[state_id] = impacts[state_id] + sum(
            impacts[j] for j in ancestors)

    nodes = sorted(model.grouping.groups, key=_natural_key)
    inbound = {n: inbound_impact(prop, resolved, model, n) for n in nodes}
    outbound = {n: outbound_impact(prop, resolved, model, n) for n in nodes}
    node_wise = {n: node_wise_impact(prop, resolved, model, n) for n in nodes}
    ordered_impacts = {s: impacts[s] for s in state_ids}
    return MetricsReport(ordered_impacts, cumulative, inbound, outbound, node_wise)
