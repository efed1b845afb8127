"""Shared fixtures: canonical topologies and deterministic generators."""

from __future__ import annotations

import random

import pytest

from trustcalc import AssessQuery, Opinion, TrustGraph


@pytest.fixture
def series_graph() -> TrustGraph:
    """A -> B -> C with the canonical worked-example opinions."""
    return TrustGraph(
        {
            ("A", "B"): Opinion(5, 3, 2),
            ("B", "C"): Opinion(4, 4, 2),
        }
    )


BRIDGE_EDGES = {
    ("A", "B"): Opinion(5, 3, 2),
    ("A", "C"): Opinion(4, 2, 2),
    ("B", "C"): Opinion(3, 1, 1),
    ("B", "D"): Opinion(6, 2, 2),
    ("C", "D"): Opinion(4, 4, 2),
}


@pytest.fixture
def bridge_graph() -> TrustGraph:
    """The five-edge bridge: two branches into D sharing recommender B."""
    return TrustGraph(dict(BRIDGE_EDGES))


@pytest.fixture
def cyclic_bridge_graph() -> TrustGraph:
    """The bridge with B->D reversed, forming the cycle D->B->C->D."""
    edges = dict(BRIDGE_EDGES)
    edges[("D", "B")] = edges.pop(("B", "D"))
    return TrustGraph(edges)


@pytest.fixture
def bridge_query() -> AssessQuery:
    return AssessQuery("A", "D", 3)


def random_opinion(rng: random.Random, base_rate: float | None = None) -> Opinion:
    """A positive-evidence opinion with uniformly random components."""
    return Opinion(
        rng.uniform(0.0, 10.0),
        rng.uniform(0.0, 10.0),
        rng.uniform(0.0, 10.0),
        rng.random() if base_rate is None else base_rate,
    )


def random_dag(rng: random.Random, max_nodes: int = 8) -> tuple[TrustGraph, AssessQuery]:
    """A random DAG over a topological node order, plus an end-to-end query."""
    n = rng.randint(3, max_nodes)
    names = [f"n{i}" for i in range(n)]
    density = rng.uniform(0.3, 0.8)
    edges = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                edges[(names[i], names[j])] = random_opinion(rng, base_rate=0.5)
    graph = TrustGraph(edges, names)
    return graph, AssessQuery(names[0], names[-1], rng.randint(2, 4))


def chord_level_lines(num_nodes: int, seed: int, num_levels: int = 4) -> str:
    """Deterministic level TSV for a ring with 2-, 3-, and 4-step chords.

    Every chord edge has an alternative path of at most 3 hops, and every
    node has at least 3 out-neighbors with alternatives, so both the
    leave-one-out and the ranking experiments find ample samples.
    """
    rng = random.Random(seed)
    lines = ["#src\tdst\tlevel"]
    for i in range(num_nodes):
        for step in (1, 2, 3, 4):
            level = rng.randrange(num_levels)
            lines.append(f"u{i:04d}\tu{(i + step) % num_nodes:04d}\t{level}")
    return "\n".join(lines) + "\n"
