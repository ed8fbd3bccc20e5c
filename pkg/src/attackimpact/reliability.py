"""Two-terminal network reliability engines.

The quantity computed everywhere is the probability that at least one
fully-operative self-avoiding path joins two nodes when links fail
independently, each succeeding with its edge weight.

Engines:

* ``exact_reliability`` - factoring (deletion/contraction) with
  series-parallel and dangling-node reduction. Exact; cost grows
  exponentially with edge count, guarded by ``exact_limit``.
* ``brute_force_reliability`` - enumeration of all 2^|E| link states.
  Independent of the factoring code on purpose; it is the oracle the
  exact engine is tested against.
* ``monte_carlo_reliability`` - sampled worlds, deterministic for a fixed
  seed regardless of worker count (per-block seeds).
* ``path_approx_reliability`` - inclusion-exclusion over enumerated simple
  paths; exact only when every path is enumerated, documented approximate.

The arithmetic is duck-typed: edge weights may be floats or
``fractions.Fraction`` (the acceptance suite runs both engines on Fractions
so "equal" means equal, not nearly-equal).
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import sqrt
from typing import Hashable, Iterable, Mapping

import numpy as np

from .model import NetworkGraph

try:
    from ._connectivity import count_connected_worlds as _count_worlds
    USING_COMPILED_KERNEL = True
except ImportError:  # extension not built; numpy fallback
    from ._connectivity_py import count_connected_worlds as _count_worlds
    USING_COMPILED_KERNEL = False

DEFAULT_EXACT_LIMIT = 24
BRUTE_FORCE_LIMIT = 20
_MC_BLOCK = 1 << 16

Edge = tuple[Hashable, Hashable, object]


class ExactLimitExceeded(Exception):
    """Exact engine refused: edge count above the configured limit."""

    def __init__(self, n_edges: int, limit: int):
        super().__init__(
            f"network has {n_edges} edges, exact engine limited to {limit}; "
            "use the Monte Carlo engine")
        self.n_edges = n_edges
        self.limit = limit


def mc_backend_name() -> str:
    return "compiled" if USING_COMPILED_KERNEL else "pure-python"


# ---------------------------------------------------------------------------
# exact engine: factoring with reductions


def _simplify(adj: dict, s, t):
    """In-place dangling/series/parallel reduction. Returns a scalar factor
    (always 1 here; kept for clarity of the factoring identity)."""
    changed = True
    while changed:
        changed = False
        for node in list(adj):
            if node == s or node == t or node not in adj:
                continue
            degree = len(adj[node])
            if degree == 0:
                del adj[node]
                changed = True
            elif degree == 1:
                (nbr,) = adj[node]
                del adj[nbr][node]
                del adj[node]
                changed = True
            elif degree == 2:
                (a, pa), (b, pb) = adj[node].items()
                del adj[a][node]
                del adj[b][node]
                del adj[node]
                p_series = pa * pb
                if b in adj[a]:  # parallel merge
                    adj[a][b] = 1 - (1 - adj[a][b]) * (1 - p_series)
                    adj[b][a] = adj[a][b]
                else:
                    adj[a][b] = p_series
                    adj[b][a] = p_series
                changed = True


def _bfs_path(adj: dict, s, t) -> list | None:
    if s == t:
        return [s]
    parent = {s: None}
    queue = deque([s])
    while queue:
        node = queue.popleft()
        for nbr in adj.get(node, ()):
            if nbr not in parent:
                parent[nbr] = node
                if nbr == t:
                    path = [t]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return path[::-1]
                queue.append(nbr)
    return None


def _contract(adj: dict, keep, drop):
    """Merge ``drop`` into ``keep``; parallel edges collapse by union."""
    for nbr, p in list(adj[drop].items()):
        del adj[nbr][drop]
        if nbr == keep:
            continue
        if nbr in adj[keep]:
            merged = 1 - (1 - adj[keep][nbr]) * (1 - p)
            adj[keep][nbr] = merged
            adj[nbr][keep] = merged
        else:
            adj[keep][nbr] = p
            adj[nbr][keep] = p
    del adj[drop]


def _factor(adj: dict, s, t):
    """Factoring recursion. ``adj`` is consumed (callers pass copies)."""
    if s == t:
        return 1
    _simplify(adj, s, t)
    path = _bfs_path(adj, s, t)
    if path is None:
        return 0
    # factor on the first edge of a shortest s-t path; u is s itself
    u, v = path[0], path[1]
    p = adj[u][v]
    deleted = {node: dict(nbrs) for node, nbrs in adj.items()}
    del deleted[u][v]
    del deleted[v][u]
    skipped = _factor(deleted, s, t)
    if v == t:
        taken = 1  # contracting the edge merges the two terminals
    else:
        contracted = {node: dict(nbrs) for node, nbrs in adj.items()}
        del contracted[u][v]
        del contracted[v][u]
        _contract(contracted, u, v)
        taken = _factor(contracted, s, t)
    return p * taken + (1 - p) * skipped


def _adjacency(edges: Iterable[Edge]) -> dict:
    adj: dict = {}
    for u, v, p in edges:
        adj.setdefault(u, {})
        adj.setdefault(v, {})
        if v in adj[u]:
            merged = 1 - (1 - adj[u][v]) * (1 - p)
            adj[u][v] = merged
            adj[v][u] = merged
        else:
            adj[u][v] = p
            adj[v][u] = p
    return adj


def exact_reliability_edges(edges: list[Edge], s, t,
                            exact_limit: int = DEFAULT_EXACT_LIMIT):
    """Exact two-terminal reliability from an explicit edge list.

    Weights may be any field-like numeric type (float, Fraction).
    """
    if len(edges) > exact_limit:
        raise ExactLimitExceeded(len(edges), exact_limit)
    if s == t:
        return 1
    adj = _adjacency(edges)
    if s not in adj or t not in adj:
        return 0
    return _factor(adj, s, t)


def exact_reliability(net: NetworkGraph, m: str, n: str,
                      exact_limit: int = DEFAULT_EXACT_LIMIT) -> float:
    """Exact probability that at least one operative path joins m and n."""
    if m not in net.nodes or n not in net.nodes:
        raise KeyError(f"unknown node in pair ({m}, {n})")
    value = exact_reliability_edges(list(net.edges), m, n, exact_limit)
    return float(value)


# ---------------------------------------------------------------------------
# brute-force oracle: full 2^|E| enumeration (kept independent of _factor)


def brute_force_reliability_edges(edges: list[Edge], s, t,
                                  limit: int = BRUTE_FORCE_LIMIT):
    if len(edges) > limit:
        raise ValueError(f"{len(edges)} edges is too many for enumeration")
    if s == t:
        return 1
    nodes: list = sorted({u for u, _, _ in edges} | {v for _, v, _ in edges}
                         | {s, t}, key=str)
    index = {node: i for i, node in enumerate(nodes)}
    total = 0
    n_edges = len(edges)
    for mask in range(1 << n_edges):
        parent = list(range(len(nodes)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        prob = 1
        for i, (u, v, p) in enumerate(edges):
            if mask >> i & 1:
                prob = prob * p
                ru, rv = find(index[u]), find(index[v])
                if ru != rv:
                    parent[ru] = rv
            else:
                prob = prob * (1 - p)
        if find(index[s]) == find(index[t]):
            total = total + prob
    return total


def brute_force_reliability(net: NetworkGraph, m: str, n: str) -> float:
    if m not in net.nodes or n not in net.nodes:
        raise KeyError(f"unknown node in pair ({m}, {n})")
    return float(brute_force_reliability_edges(list(net.edges), m, n))


# ---------------------------------------------------------------------------
# Monte Carlo engine


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    samples: int
    seed: int


def _mc_blocks(samples: int) -> list[tuple[int, int]]:
    blocks = []
    index = 0
    remaining = samples
    while remaining > 0:
        size = min(_MC_BLOCK, remaining)
        blocks.append((index, size))
        index += 1
        remaining -= size
    return blocks


def monte_carlo_reliability(net: NetworkGraph, m: str, n: str,
                            samples: int, seed: int,
                            workers: int = 1) -> McEstimate:
    """Sampled fraction of worlds connecting m and n, with its standard error.

    Deterministic for a fixed seed: uniforms are drawn in fixed-size blocks,
    each block seeded from (seed, block index), so the result is independent
    of worker count and completion order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if m not in net.nodes or n not in net.nodes:
        raise KeyError(f"unknown node in pair ({m}, {n})")
    nodes = list(net.nodes)
    index = {node: i for i, node in enumerate(nodes)}
    edges = list(net.edges)
    weights = np.array([w for _, _, w in edges], dtype=np.float64)
    edge_u = np.array([index[u] for u, _, _ in edges], dtype=np.int32)
    edge_v = np.array([index[v] for _, v, _ in edges], dtype=np.int32)
    src, dst = index[m], index[n]

    if not edges:
        hit = float(src == dst)
        return McEstimate(hit, 0.0, samples, seed)

    def run_block(block: tuple[int, int]) -> int:
        block_index, block_samples = block
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence([seed, block_index])))
        uniforms = rng.random((block_samples, len(edges)))
        return _count_worlds(uniforms, weights, edge_u, edge_v,
                             len(nodes), src, dst)

    blocks = _mc_blocks(samples)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run_block, blocks))
    else:
        hits = sum(map(run_block, blocks))
    p_hat = hits / samples
    std_error = sqrt(p_hat * (1.0 - p_hat) / samples)
    return McEstimate(p_hat, std_error, samples, seed)


# ---------------------------------------------------------------------------
# path-approximation engine (cross-check only)


def _simple_paths_edges(net: NetworkGraph, s: str, t: str,
                        max_length: int) -> list[frozenset]:
    """Edge sets of self-avoiding s-t paths with at most max_length edges."""
    paths: list[frozenset] = []
    adjacency = {node: sorted(net.neighbors(node)) for node in net.nodes}

    def walk(node: str, visited: set[str], edges_used: list[frozenset]):
        if len(edges_used) > max_length:
            return
        if node == t:
            paths.append(frozenset(edges_used))
            return
        if len(edges_used) == max_length:
            return
        for nbr in adjacency[node]:
            if nbr not in visited:
                visited.add(nbr)
                edges_used.append(frozenset((node, nbr)))
                walk(nbr, visited, edges_used)
                edges_used.pop()
                visited.remove(nbr)

    walk(s, {s}, [])
    return paths


def path_approx_reliability(net: NetworkGraph, m: str, n: str,
                            max_length: int = 10,
                            max_paths: int = 16) -> float:
    """Inclusion-exclusion over enumerated simple paths.

    Exact when every simple path fits under both limits; otherwise a lower
    bound computed from the shortest ``max_paths`` paths.
    """
    if m == n:
        return 1.0
    weight_of = {frozenset((a, b)): w for a, b, w in net.edges}
    paths = _simple_paths_edges(net, m, n, max_length)
    if not paths:
        return 0.0
    paths.sort(key=lambda p: (len(p), sorted(tuple(sorted(e)) for e in p)))
    paths = paths[:max_paths]
    total = 0.0
    for subset in range(1, 1 << len(paths)):
        union: set = set()
        bits = 0
        for i in range(len(paths)):
            if subset >> i & 1:
                union |= paths[i]
                bits += 1
        prob = 1.0
        for edge in union:
            prob *= weight_of[edge]
        total += prob if bits % 2 == 1 else -prob
    return total


# ---------------------------------------------------------------------------
# table construction


@dataclass(frozen=True)
class EngineConfig:
    """How p values are computed; echoed in reports for provenance."""

    kind: str = "exact"  # "exact" | "monte-carlo" | "path-approx"
    exact_limit: int = DEFAULT_EXACT_LIMIT
    samples: int = 1_000_000
    seed: int = 0
    mc_fallback: bool = False
    path_length_limit: int = 10
    max_paths: int = 16
    workers: int = 1

    def describe(self) -> dict:
        if self.kind == "monte-carlo":
            return {"kind": self.kind, "samples": self.samples, "seed": self.seed}
        if self.kind == "exact":
            return {"kind": self.kind, "exact_limit": self.exact_limit,
                    "mc_fallback": self.mc_fallback}
        return {"kind": self.kind, "path_length_limit": self.path_length_limit,
                "max_paths": self.max_paths}


@dataclass(frozen=True)
class ReliabilityTable:
    """Symmetric (m, n) -> p lookup for the pairs a combined model needs."""

    entries: Mapping[frozenset, float]
    engine: EngineConfig
    fallback_pairs: frozenset = field(default_factory=frozenset)

    def probability(self, m: str, n: str) -> float:
        if m == n:
            return 1.0
        key = frozenset((m, n))
        if key not in self.entries:
            raise KeyError(f"no reliability entry for pair ({m}, {n})")
        return self.entries[key]

    def __contains__(self, pair: tuple[str, str]) -> bool:
        m, n = pair
        return m == n or frozenset((m, n)) in self.entries


def reliability_table(net: NetworkGraph,
                      pairs: Iterable[tuple[str, str]],
                      engine: EngineConfig = EngineConfig()) -> ReliabilityTable:
    """Compute p for exactly the requested pairs (lazy: nothing else)."""
    entries: dict[frozenset, float] = {}
    fallback: set[frozenset] = set()
    for m, n in pairs:
        if m == n:
            continue
        key = frozenset((m, n))
        if key in entries:
            continue
        if engine.kind == "exact":
            try:
                entries[key] = exact_reliability(net, m, n, engine.exact_limit)
            except ExactLimitExceeded:
                if not engine.mc_fallback:
                    raise
                estimate = monte_carlo_reliability(
                    net, m, n, engine.samples, engine.seed, engine.workers)
                entries[key] = estimate.value
                fallback.add(key)
        elif engine.kind == "monte-carlo":
            estimate = monte_carlo_reliability(
                net, m, n, engine.samples, engine.seed, engine.workers)
            entries[key] = estimate.value
        elif engine.kind == "path-approx":
            entries[key] = path_approx_reliability(
                net, m, n, engine.path_length_limit, engine.max_paths)
        else:
            raise ValueError(f"unknown engine kind {engine.kind!r}")
    return ReliabilityTable(entries, engine, frozenset(fallback))
