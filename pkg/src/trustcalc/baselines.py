"""Comparison algorithms: TidalTrust, EigenTrust, and TrustRank.

TidalTrust computes an absolute source-to-sink trust value; EigenTrust
and TrustRank are random-walk rankers that assign every node a relative
score.  All three consume scalar edge values in [0, 1]; by default an
edge's value is its opinion's positive-evidence share
positive / (positive + negative + uncertain).

The two rankers share one personalized power iteration

    t ← (1 − d) · p + d · (Wᵀ t + dangling_mass · p)

over the row-normalized edge-value matrix W, with teleport vector p
uniform over a chosen node set: every node (or an explicit pre-trusted
set) for EigenTrust, the seed set for TrustRank.  Mass from dangling
nodes is redistributed through p, so scores always sum to 1.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .graph import TrustGraph, UnknownNodeError
from .opinions import Opinion

__all__ = [
    "RankScores",
    "UnreachableError",
    "eigen_trust",
    "positive_share",
    "tidal_trust",
    "trust_rank",
]

RankScores = dict[str, float]

EdgeValue = Callable[[Opinion], float]


class UnreachableError(ValueError):
    """The sink cannot be reached from the source within the horizon."""


def positive_share(opinion: Opinion) -> float:
    """Default edge value: the positive share of the total evidence."""
    total = opinion.total()
    return opinion.positive / total if total > 0.0 else 0.0


def tidal_trust(
    graph: TrustGraph,
    source: str,
    sink: str,
    edge_value: EdgeValue = positive_share,
    max_depth: int | None = None,
) -> float:
    """Source-to-sink trust along strongest shortest paths.

    The search is restricted to the breadth-first level structure from
    the source (only shortest paths count), bounded by `max_depth`
    hops when given.  A forward pass finds the threshold: the largest
    over source→sink paths of the smallest edge value along the path.
    A backward pass then averages, at each node, the trust of the
    downstream nodes it rates at or above the threshold, weighted by
    those ratings; nodes adjacent to the sink contribute their direct
    rating of it.

    Raises:
        UnreachableError: no path within the horizon.
    """
    if source == sink:
        raise ValueError("trust queries require distinct endpoints")
    for node in (source, sink):
        if not graph.has_node(node):
            raise UnknownNodeError(node)

    # Forward BFS: depth of every node on a shortest path, stopping at
    # the sink's level.
    depth = {source: 0}
    frontier = [source]
    level = 0
    while frontier and sink not in depth:
        level += 1
        if max_depth is not None and level > max_depth:
            break
        next_frontier = []
        for node in frontier:
            for succ in graph.successors(node):
                if succ not in depth:
                    depth[succ] = level
                    next_frontier.append(succ)
        frontier = next_frontier
    if sink not in depth:
        raise UnreachableError(f"no path from {source!r} to {sink!r} within horizon")
    sink_depth = depth[sink]

    # Level-respecting children that can still reach the sink.
    def level_children(node: str) -> list[str]:
        return [
            succ
            for succ in graph.successors(node)
            if depth.get(succ, -1) == depth[node] + 1 and depth[node] + 1 <= sink_depth
        ]

    reaches: set[str] = {sink}
    order = sorted(
        (n for n in depth if depth[n] < sink_depth), key=lambda n: -depth[n]
    )
    children: dict[str, list[str]] = {}
    parents: dict[str, list[str]] = {}
    for node in order:
        kids = [c for c in level_children(node) if c in reaches]
        children[node] = kids
        if kids:
            reaches.add(node)
            for c in kids:
                parents.setdefault(c, []).append(node)
    if source not in reaches:
        raise UnreachableError(f"no path from {source!r} to {sink!r} within horizon")

    value = {
        (u, v): edge_value(graph.edge(u, v))
        for u in children
        for v in children[u]
    }

    # Forward pass: strongest bottleneck strength per node.
    strength: dict[str, float] = {source: float("inf")}
    for node in sorted(reaches - {source}, key=lambda n: depth[n]):
        strength[node] = max(
            min(strength[u], value[(u, node)])
            for u in parents.get(node, ())
            if u in strength
        )
    threshold = strength[sink]

    # Backward pass: threshold-filtered weighted averages.
    trust: dict[str, float] = {}
    for node in sorted(children, key=lambda n: -depth[n]):
        numerator = 0.0
        denominator = 0.0
        for child in children[node]:
            rating = value[(node, child)]
            if rating < threshold:
                continue
            child_trust = rating if child == sink else trust.get(child)
            if child_trust is None:
                continue
            numerator += rating * child_trust
            denominator += rating
        if denominator > 0.0:
            trust[node] = numerator / denominator
    if source not in trust:
        raise UnreachableError(
            f"no path from {source!r} to {sink!r} survives the threshold"
        )
    return trust[source]


def _personalized_power_iteration(
    graph: TrustGraph,
    teleport_nodes: Iterable[str],
    damping: float,
    tol: float,
    max_iter: int,
    edge_value: EdgeValue,
) -> RankScores:
    if graph.num_nodes == 0:
        raise ValueError("ranking requires a nonempty graph")
    if not 0.0 < damping < 1.0:
        raise ValueError(f"damping must be in (0, 1), got {damping}")
    nodes = sorted(graph.nodes)
    index = {node: i for i, node in enumerate(nodes)}
    teleport = sorted(set(teleport_nodes))
    if not teleport:
        raise ValueError("teleport set must be nonempty")
    for node in teleport:
        if node not in index:
            raise UnknownNodeError(node)

    n = len(nodes)
    p = np.zeros(n)
    p[[index[t] for t in teleport]] = 1.0 / len(teleport)

    # Row-normalized adjacency, kept as per-source index/weight arrays.
    rows: list[tuple[int, np.ndarray, np.ndarray]] = []
    for src in nodes:
        succ = graph.successors(src)
        if not succ:
            continue
        weights = np.array([edge_value(graph.edge(src, d)) for d in succ], dtype=float)
        if np.any(weights < 0.0):
            raise ValueError("edge values must be nonnegative")
        out_sum = weights.sum()
        if out_sum <= 0.0:
            continue  # all-zero rows behave like dangling nodes
        targets = np.array([index[d] for d in succ], dtype=int)
        rows.append((index[src], targets, weights / out_sum))

    ranked_sources = np.array([i for i, _, _ in rows], dtype=int)
    dangling_mask = np.ones(n, dtype=bool)
    dangling_mask[ranked_sources] = False

    scores = p.copy()
    for _ in range(max_iter):
        spread = np.zeros(n)
        for src_i, targets, weights in rows:
            spread[targets] += scores[src_i] * weights
        dangling_mass = scores[dangling_mask].sum()
        new_scores = (1.0 - damping) * p + damping * (spread + dangling_mass * p)
        delta = np.abs(new_scores - scores).sum()
        scores = new_scores
        if delta < tol:
            break
    total = scores.sum()
    if total > 0.0:
        scores = scores / total
    return {node: float(scores[index[node]]) for node in nodes}


def eigen_trust(
    graph: TrustGraph,
    pretrusted: Iterable[str] | None = None,
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
    edge_value: EdgeValue = positive_share,
) -> RankScores:
    """Global trust ranking by power iteration.

    `pretrusted` nodes absorb the teleport probability; all nodes do by
    default.  Returns a score per node, summing to 1.  With
    max_iter = 0 the start vector (the teleport distribution) is
    returned unchanged.
    """
    teleport = list(pretrusted) if pretrusted is not None else sorted(graph.nodes)
    return _personalized_power_iteration(graph, teleport, damping, tol, max_iter, edge_value)


def trust_rank(
    graph: TrustGraph,
    seeds: Iterable[str],
    damping: float = 0.85,
    tol: float = 1e-10,
    max_iter: int = 1000,
    edge_value: EdgeValue = positive_share,
) -> RankScores:
    """Seed-personalized trust ranking.

    Identical iteration to `eigen_trust` with the teleport restricted
    to the seed set, which must be nonempty.
    """
    seed_list = list(seeds)
    if not seed_list:
        raise ValueError("trust_rank requires a nonempty seed set")
    return _personalized_power_iteration(graph, seed_list, damping, tol, max_iter, edge_value)
