"""Probability propagation over the resolved attack DAG.

Alternative routes into a state are treated as disjunctive: the probability
of reaching a state is the probability that at least one inbound step is
taken, combined with the noisy-or product over immediate predecessors.
Paths sharing a prefix are still combined this way; that is the model's
definition, not an approximation to world-enumeration semantics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .combiner import ResolvedVector
from .model import CombinedModel, StateKind, topological_order, _natural_key


class CycleDetected(Exception):
    def __init__(self):
        super().__init__("attack vectors form a cycle; propagation needs a DAG")


class UnknownState(KeyError):
    pass


@dataclass(frozen=True)
class PropagationResult:
    """P(i) per state and P(i, j) per vector (source-reach times step)."""

    state_prob: Mapping[str, float]
    edge_prob: Mapping[tuple[str, str], float]

    def probability(self, state_id: str) -> float:
        try:
            return self.state_prob[state_id]
        except KeyError:
            raise UnknownState(state_id) from None


def propagate(model: CombinedModel,
              resolved: list[ResolvedVector]) -> PropagationResult:
    """One topological pass computing every P(i) and P(i, j).

    The start state has probability 1 (the attacker is ready); a state with
    no operative inbound step keeps probability 0.
    """
    order = topological_order(model.attack)
    if order is None:
        raise CycleDetected()
    inbound: dict[str, list[ResolvedVector]] = {}
    for vec in resolved:
        inbound.setdefault(vec.target, []).append(vec)

    start_id = model.attack.start.id
    state_prob: dict[str, float] = {}
    edge_prob: dict[tuple[str, str], float] = {}
    for state_id in order:
        if state_id == start_id:
            state_prob[state_id] = 1.0
            continue
        miss = 1.0
        for vec in inbound.get(state_id, ()):
            p_step = state_prob[vec.source] * vec.p_overall
            edge_prob[(vec.source, vec.target)] = p_step
            miss *= 1.0 - p_step
        state_prob[state_id] = 1.0 - miss
    return PropagationResult(state_prob, edge_prob)


@dataclass(frozen=True)
class AttackPath:
    """A feasible simple path from the start state, listed two ways."""

    states: tuple[str, ...]
    vectors: tuple[str, ...]


def feasible_edges(resolved: list[ResolvedVector]) -> list[ResolvedVector]:
    return [v for v in resolved if v.p_overall > 0.0]


def feasible_paths(model: CombinedModel, resolved: list[ResolvedVector],
                   to: str) -> list[AttackPath]:
    """All start-to-``to`` simple paths whose every step has p_overall > 0.

    Deterministic ordering: depth-first with successors in natural id order.
    """
    if topological_order(model.attack) is None:
        raise CycleDetected()
    known = {s.id for s in model.attack.states}
    if to not in known:
        raise UnknownState(to)
    succ: dict[str, list[ResolvedVector]] = {}
    for vec in feasible_edges(resolved):
        succ.setdefault(vec.source, []).append(vec)
    for vecs in succ.values():
        vecs.sort(key=lambda v: _natural_key(v.target))

    start_id = model.attack.start.id
    paths: list[AttackPath] = []
    state_trail = [start_id]
    vector_trail: list[str] = []

    def walk(node: str):
        if node == to:
            paths.append(AttackPath(tuple(state_trail), tuple(vector_trail)))
            return
        for vec in succ.get(node, ()):
            state_trail.append(vec.target)
            vector_trail.append(vec.vector_id)
            walk(vec.target)
            state_trail.pop()
            vector_trail.pop()

    walk(start_id)
    return paths


def goal_paths(model: CombinedModel,
               resolved: list[ResolvedVector]) -> list[AttackPath]:
    """Feasible paths from start to every end state, in end-id order."""
    paths: list[AttackPath] = []
    for end in sorted(model.attack.ends, key=lambda s: _natural_key(s.id)):
        paths.extend(feasible_paths(model, resolved, end.id))
    return paths


def _feasible_successors(resolved: list[ResolvedVector]) -> dict[str, set[str]]:
    succ: dict[str, set[str]] = {}
    for vec in feasible_edges(resolved):
        succ.setdefault(vec.source, set()).add(vec.target)
    return succ


def _feasible_predecessors(resolved: list[ResolvedVector]) -> dict[str, set[str]]:
    pred: dict[str, set[str]] = {}
    for vec in feasible_edges(resolved):
        pred.setdefault(vec.target, set()).add(vec.source)
    return pred


def _closure(seeds: set[str], step: Mapping[str, set[str]]) -> set[str]:
    seen = set(seeds)
    stack = list(seeds)
    while stack:
        for nxt in step.get(stack.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def reachable_from_start(model: CombinedModel,
                         resolved: list[ResolvedVector]) -> set[str]:
    """States with a feasible path from the start state (start included)."""
    return _closure({model.attack.start.id}, _feasible_successors(resolved))


def on_feasible_path_to(model: CombinedModel, resolved: list[ResolvedVector],
                        targets: set[str]) -> set[str]:
    """States lying on some feasible start-to-target path, targets excluded.

    A state qualifies when it is feasibly reachable from start and some
    target is feasibly reachable from it.
    """
    forward = reachable_from_start(model, resolved)
    backward = _closure(set(targets), _feasible_predecessors(resolved))
    return (forward & backward) - set(targets)
