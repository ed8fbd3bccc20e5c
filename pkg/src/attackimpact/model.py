"""Core domain types: vulnerabilities, attack graphs, networks, groupings.

All types are immutable after construction and safe to share between
threads. Scenario evaluation never mutates a model; it builds derived
copies instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Iterable, Mapping

from .cvss import CvssV2Base

# Catalog values rounded to 5-6 decimals must round-trip against their CVSS
# vectors, so the agreement gate sits just above that rounding error.
SCORE_TOLERANCE = 5e-6


class StateKind(str, Enum):
    START = "start"
    END = "end"
    EXPLOIT = "exploit"


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Vulnerability:
    """A named weakness with an exploitability probability and an impact score.

    ``exploitability`` is stored normalized to [0, 1] (CVSS v2 exploitability
    subscore divided by ten); ``impact`` uses the raw CVSS scale (0..10.41).
    """

    id: str
    exploitability: float
    impact: float
    cvss_vector: CvssV2Base | None = None

    def __post_init__(self):
        if not 0.0 <= self.exploitability <= 1.0:
            raise ValueError(
                f"{self.id}: exploitability {self.exploitability} outside [0, 1]")
        if self.impact < 0.0:
            raise ValueError(f"{self.id}: impact {self.impact} must be >= 0")


@dataclass(frozen=True)
class AttackState:
    """A state reached by the attacker; exploit states belong to a service."""

    id: str
    kind: StateKind
    service: str | None = None

    def __post_init__(self):
        if self.kind is StateKind.EXPLOIT and self.service is None:
            raise ValueError(f"{self.id}: exploit states need a service")
        if self.kind is not StateKind.EXPLOIT and self.service is not None:
            raise ValueError(f"{self.id}: start/end states carry no service")


@dataclass(frozen=True)
class AttackVector:
    """A directed edge between attack states realizing one vulnerability."""

    id: str
    source: str
    target: str
    vulnerability: str


@dataclass(frozen=True)
class AttackGraph:
    states: tuple[AttackState, ...]
    vectors: tuple[AttackVector, ...]
    catalog: tuple[Vulnerability, ...]

    def __post_init__(self):
        object.__setattr__(self, "_states_by_id",
                           {s.id: s for s in self.states})
        object.__setattr__(self, "_vulns_by_id",
                           {v.id: v for v in self.catalog})

    def state(self, state_id: str) -> AttackState:
        return self._states_by_id[state_id]

    def vulnerability(self, vuln_id: str) -> Vulnerability:
        return self._vulns_by_id[vuln_id]

    @property
    def start(self) -> AttackState:
        return next(s for s in self.states if s.kind is StateKind.START)

    @property
    def ends(self) -> tuple[AttackState, ...]:
        return tuple(s for s in self.states if s.kind is StateKind.END)

    def predecessors(self, state_id: str) -> list[AttackVector]:
        return [v for v in self.vectors if v.target == state_id]

    def successors(self, state_id: str) -> list[AttackVector]:
        return [v for v in self.vectors if v.source == state_id]


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected weighted communication network.

    Edge weights are per-link success probabilities; at most one edge per
    unordered node pair, no self-loops.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, float], ...]

    def __post_init__(self):
        adjacency: dict[str, dict[str, float]] = {n: {} for n in self.nodes}
        for a, b, w in self.edges:
            if a in adjacency and b in adjacency and a != b:
                adjacency[a][b] = w
                adjacency[b][a] = w
        object.__setattr__(self, "_adjacency", adjacency)

    def weight(self, a: str, b: str) -> float:
        return self._adjacency[a][b]

    def neighbors(self, node: str) -> dict[str, float]:
        return dict(self._adjacency[node])

    def with_weights(self, overrides: Mapping[tuple[str, str], float] | float
                     ) -> "NetworkGraph":
        """New graph with some (or all) edge weights replaced."""
        if isinstance(overrides, (int, float)):
            new_edges = tuple((a, b, float(overrides)) for a, b, _ in self.edges)
            return NetworkGraph(self.nodes, new_edges)
        keyed = {frozenset(k): w for k, w in overrides.items()}
        new_edges = tuple(
            (a, b, keyed.get(frozenset((a, b)), w)) for a, b, w in self.edges)
        return NetworkGraph(self.nodes, new_edges)


@dataclass(frozen=True)
class ServiceGrouping:
    """Assignment of exploit states to the network node running their service."""

    groups: Mapping[str, frozenset[str]]

    def __post_init__(self):
        object.__setattr__(
            self, "groups",
            MappingProxyType({n: frozenset(states)
                              for n, states in dict(self.groups).items()}))
        service_of: dict[str, str] = {}
        for node, states in self.groups.items():
            for s in states:
                service_of.setdefault(s, node)
        object.__setattr__(self, "_service_of", service_of)

    def service_of(self, state_id: str) -> str | None:
        return self._service_of.get(state_id)

    def states_of(self, node: str) -> frozenset[str]:
        return self.groups.get(node, frozenset())


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by :func:`validate`. Data, not an exception."""

    severity: Severity
    code: str
    subject: str
    message: str

    def __str__(self):
        return f"[{self.severity.value}] {self.code}({self.subject}): {self.message}"


@dataclass(frozen=True)
class CombinedModel:
    """Attack graph grouped onto a network, with start/end wiring derived.

    ``exploit_factors`` is a per-vector multiplier on exploitability used by
    scenario overlays (monitoring, fixes); the base model leaves it empty.
    """

    attack: AttackGraph
    network: NetworkGraph
    grouping: ServiceGrouping
    exploit_factors: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "exploit_factors",
                           MappingProxyType(dict(self.exploit_factors)))

    @property
    def entry_nodes(self) -> frozenset[str]:
        """Network nodes of exploit states directly following the start state."""
        start_ids = {s.id for s in self.attack.states if s.kind is StateKind.START}
        nodes = set()
        for v in self.attack.vectors:
            if v.source in start_ids:
                service = self.grouping.service_of(v.target)
                if service is not None:
                    nodes.add(service)
        return frozenset(nodes)

    @property
    def exit_nodes(self) -> frozenset[str]:
        """Network nodes of exploit states directly preceding an end state."""
        end_ids = {s.id for s in self.attack.states if s.kind is StateKind.END}
        nodes = set()
        for v in self.attack.vectors:
            if v.target in end_ids:
                service = self.grouping.service_of(v.source)
                if service is not None:
                    nodes.add(service)
        return frozenset(nodes)

    def effective_exploitability(self, vector: AttackVector) -> float:
        base = self.attack.vulnerability(vector.vulnerability).exploitability
        return base * self.exploit_factors.get(vector.id, 1.0)


def _natural_key(text: str) -> tuple:
    """Sort "S9" before "S10" and "2" before "11"."""
    key: list = []
    digits = ""
    for ch in text:
        if ch.isdigit():
            digits += ch
        else:
            if digits:
                key.append((1, int(digits)))
                digits = ""
            key.append((0, ch))
    if digits:
        key.append((1, int(digits)))
    return tuple(key)


def topological_order(graph: AttackGraph) -> list[str] | None:
    """Kahn's algorithm; ``None`` when the vector set contains a cycle."""
    indegree = {s.id: 0 for s in graph.states}
    succ: dict[str, list[str]] = {s.id: [] for s in graph.states}
    for v in graph.vectors:
        if v.source in indegree and v.target in indegree:
            indegree[v.target] += 1
            succ[v.source].append(v.target)
    ready = sorted((s for s, d in indegree.items() if d == 0), key=_natural_key)
    order: list[str] = []
    while ready:
        current = ready.pop(0)
        order.append(current)
        for nxt in succ[current]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                # insertion keeps the ready list sorted, for determinism
                key = _natural_key(nxt)
                at = 0
                while at < len(ready) and _natural_key(ready[at]) < key:
                    at += 1
                ready.insert(at, nxt)
    if len(order) != len(indegree):
        return None
    return order


def _reachable(starts: Iterable[str], succ: Mapping[str, list[str]]) -> set[str]:
    seen = set(starts)
    stack = list(seen)
    while stack:
        for nxt in succ.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def validate(model: CombinedModel) -> list[Violation]:
    """All invariant violations, ordered by severity (errors first) then id.

    An empty list means the model is valid. Violations are data: callers
    decide whether warnings are acceptable.
    """
    found: list[Violation] = []
    attack, network, grouping = model.attack, model.network, model.grouping
    err = lambda code, subject, msg: found.append(
        Violation(Severity.ERROR, code, subject, msg))
    warn = lambda code, subject, msg: found.append(
        Violation(Severity.WARNING, code, subject, msg))

    state_ids = [s.id for s in attack.states]
    dup_states = {s for s in state_ids if state_ids.count(s) > 1}
    for s in sorted(dup_states, key=_natural_key):
        err("DuplicateState", s, "state id appears more than once")

    vuln_ids = [v.id for v in attack.catalog]
    for v in sorted({i for i in vuln_ids if vuln_ids.count(i) > 1}, key=_natural_key):
        err("DuplicateVulnerability", v, "vulnerability id appears more than once")

    starts = [s for s in attack.states if s.kind is StateKind.START]
    ends = [s for s in attack.states if s.kind is StateKind.END]
    if len(starts) != 1:
        err("StartCount", "attack-graph",
            f"expected exactly one start state, found {len(starts)}")
    if not ends:
        err("EndCount", "attack-graph", "expected at least one end state")

    known_states = set(state_ids)
    known_vulns = set(vuln_ids)
    start_ids = {s.id for s in starts}
    end_ids = {s.id for s in ends}
    seen_pairs: set[tuple[str, str]] = set()
    for vec in sorted(attack.vectors, key=lambda v: _natural_key(v.id)):
        if vec.source == vec.target:
            err("SelfLoop", vec.id, f"vector loops on state {vec.source}")
        if vec.source not in known_states:
            err("UnknownState", vec.id, f"unknown source state {vec.source}")
        if vec.target not in known_states:
            err("UnknownState", vec.id, f"unknown target state {vec.target}")
        if vec.vulnerability not in known_vulns:
            err("UnknownVulnerability", vec.id,
                f"unresolved vulnerability {vec.vulnerability}")
        if vec.target in start_ids:
            err("EdgeIntoStart", vec.id, "vectors must not enter the start state")
        if vec.source in end_ids:
            err("EdgeOutOfEnd", vec.id, "vectors must not leave an end state")
        pair = (vec.source, vec.target)
        if pair in seen_pairs:
            err("ParallelVectors", vec.id,
                f"second vector for state pair {vec.source}->{vec.target}")
        seen_pairs.add(pair)

    if topological_order(attack) is None:
        err("Cycle", "attack-graph", "attack vectors form a cycle")

    for vuln in attack.catalog:
        if vuln.cvss_vector is not None:
            recomputed_e = vuln.cvss_vector.exploitability()
            recomputed_i = vuln.cvss_vector.impact()
            if abs(recomputed_e - vuln.exploitability) > SCORE_TOLERANCE:
                err("ScoreMismatch", vuln.id,
                    f"stored exploitability {vuln.exploitability} != "
                    f"recomputed {recomputed_e:.7f}")
            if abs(recomputed_i - vuln.impact) > SCORE_TOLERANCE:
                err("ScoreMismatch", vuln.id,
                    f"stored impact {vuln.impact} != recomputed {recomputed_i:.7f}")

    net_nodes = set(network.nodes)
    pair_seen: set[frozenset[str]] = set()
    for a, b, w in network.edges:
        edge_name = f"{a}-{b}"
        if a == b:
            err("NetworkSelfLoop", edge_name, "network edges must join distinct nodes")
        if a not in net_nodes or b not in net_nodes:
            err("UnknownNode", edge_name, "edge references a node not in the graph")
        if not 0.0 <= w <= 1.0:
            err("WeightRange", edge_name, f"weight {w} outside [0, 1]")
        key = frozenset((a, b))
        if key in pair_seen and a != b:
            err("ParallelEdges", edge_name, "duplicate edge for node pair")
        pair_seen.add(key)

    membership: dict[str, list[str]] = {}
    for node, states in grouping.groups.items():
        if node not in net_nodes:
            err("UnknownServiceNode", node,
                "grouping references a node absent from the network")
        for s in states:
            membership.setdefault(s, []).append(node)
    for s, nodes in sorted(membership.items(), key=lambda kv: _natural_key(kv[0])):
        if len(nodes) > 1:
            err("DuplicateGrouping", s,
                f"state grouped to multiple nodes: {sorted(nodes)}")
        if s not in known_states:
            err("UnknownState", s, "grouping references an unknown state")
    for state in attack.states:
        if state.kind is StateKind.EXPLOIT and state.id not in membership:
            err("UngroupedState", state.id, "exploit state missing from grouping")
        if state.kind is not StateKind.EXPLOIT and state.id in membership:
            err("GroupedTerminal", state.id, "start/end states must not be grouped")
        if state.kind is StateKind.EXPLOIT and state.service is not None:
            grouped_to = membership.get(state.id, [None])[0]
            if grouped_to is not None and grouped_to != state.service:
                err("ServiceMismatch", state.id,
                    f"state declares service {state.service} but is grouped "
                    f"to {grouped_to}")

    succ: dict[str, list[str]] = {}
    pred: dict[str, list[str]] = {}
    for vec in attack.vectors:
        succ.setdefault(vec.source, []).append(vec.target)
        pred.setdefault(vec.target, []).append(vec.source)
    reachable = _reachable(start_ids, succ)
    co_reachable = _reachable(end_ids, pred)
    for state in sorted(attack.states, key=lambda s: _natural_key(s.id)):
        if state.kind is not StateKind.EXPLOIT:
            continue
        if state.id not in reachable:
            warn("Unreachable", state.id, "exploit state unreachable from start")
        if state.id not in co_reachable:
            warn("DeadEnd", state.id, "no path from exploit state to an end state")

    severity_rank = {Severity.ERROR: 0, Severity.WARNING: 1}
    found.sort(key=lambda v: (severity_rank[v.severity], v.code,
                              _natural_key(v.subject)))
    return found
