"""Combining the attack graph with the network graph.

Exploit states are grouped onto the network nodes running their services;
start and end states are wired to entry/exit nodes with probability-1 links.
Each attack vector then resolves to an overall success probability: the
network-level connection probability between the two service nodes times
the exploitability of the vulnerability.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    AttackGraph,
    CombinedModel,
    NetworkGraph,
    ServiceGrouping,
    StateKind,
    Severity,
    validate,
)
from .reliability import ReliabilityTable


class UngroupedState(Exception):
    def __init__(self, state_id: str):
        super().__init__(f"exploit state {state_id} has no service grouping")
        self.state_id = state_id


class UnknownServiceNode(Exception):
    def __init__(self, node: str):
        super().__init__(f"grouping references node {node} absent from the network")
        self.node = node


class InvalidModel(Exception):
    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = list(violations)


class MissingReliabilityEntry(Exception):
    def __init__(self, pair: tuple[str, str]):
        super().__init__(f"reliability table lacks entry for node pair {pair}")
        self.pair = pair


@dataclass(frozen=True)
class ResolvedVector:
    """One attack vector with its network, exploit and overall probabilities."""

    vector_id: str
    source: str
    target: str
    vulnerability: str
    p_net: float
    p_exploit: float
    impact: float

    @property
    def p_overall(self) -> float:
        return self.p_net * self.p_exploit


def combine(attack: AttackGraph, network: NetworkGraph,
            grouping: ServiceGrouping) -> CombinedModel:
    """Build a validated combined model; raises on structural errors."""
    for state in attack.states:
        if state.kind is StateKind.EXPLOIT:
            node = grouping.service_of(state.id)
            if node is None:
                raise UngroupedState(state.id)
            if node not in network.nodes:
                raise UnknownServiceNode(node)
    model = CombinedModel(attack, network, grouping)
    errors = [v for v in validate(model) if v.severity is Severity.ERROR]
    if errors:
        raise InvalidModel(errors)
    return model


def needed_pairs(model: CombinedModel) -> set[tuple[str, str]]:
    """Unordered service-node pairs whose reliability the model actually uses.

    Vectors touching start/end and vectors inside one node need no network
    traversal, so their pairs are never requested.
    """
    start_ids = {s.id for s in model.attack.states if s.kind is StateKind.START}
    end_ids = {s.id for s in model.attack.states if s.kind is StateKind.END}
    pairs: set[tuple[str, str]] = set()
    for vec in model.attack.vectors:
        if vec.source in start_ids or vec.target in end_ids:
            continue
        m = model.grouping.service_of(vec.source)
        n = model.grouping.service_of(vec.target)
        if m is None or n is None or m == n:
            continue
        pairs.add((m, n) if m <= n else (n, m))
    return pairs


def resolve_vectors(model: CombinedModel,
                    table: ReliabilityTable) -> list[ResolvedVector]:
    """Per-vector probabilities: p_net from the table, p_exploit from the catalog.

    p_net is exactly 1.0 for vectors leaving the start state, entering an end
    state, or joining two states on the same service node.
    """
    start_ids = {s.id for s in model.attack.states if s.kind is StateKind.START}
    end_ids = {s.id for s in model.attack.states if s.kind is StateKind.END}
    resolved = []
    for vec in model.attack.vectors:
        vuln = model.attack.vulnerability(vec.vulnerability)
        if vec.source in start_ids or vec.target in end_ids:
            p_net = 1.0
        else:
            m = model.grouping.service_of(vec.source)
            n = model.grouping.service_of(vec.target)
            if m == n:
                p_net = 1.0
            else:
                if (m, n) not in table:
                    raise MissingReliabilityEntry((m, n))
                p_net = table.probability(m, n)
        resolved.append(ResolvedVector(
            vector_id=vec.id,
            source=vec.source,
            target=vec.target,
            vulnerability=vec.vulnerability,
            p_net=p_net,
            p_exploit=model.effective_exploitability(vec),
            impact=vuln.impact,
        ))
    return resolved


def resolve_bare(model: CombinedModel) -> list[ResolvedVector]:
    """Resolution ignoring the network entirely (every p_net = 1.0).

    Equivalent to analysing the bare attack graph; also what resolution
    degenerates to on a connected network with all link weights 1.0.
    """
    resolved = []
    for vec in model.attack.vectors:
        vuln = model.attack.vulnerability(vec.vulnerability)
        resolved.append(ResolvedVector(
            vector_id=vec.id,
            source=vec.source,
            target=vec.target,
            vulnerability=vec.vulnerability,
            p_net=1.0,
            p_exploit=model.effective_exploitability(vec),
            impact=vuln.impact,
        ))
    return resolved
