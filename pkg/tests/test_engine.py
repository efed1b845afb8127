"""Tests for the recursive assessment engine and its brute-force oracle."""

from __future__ import annotations

import random

import pytest

from conftest import random_dag
from trustcalc.engine import (
    AssessQuery,
    CombineNode,
    DiscountNode,
    EdgeLeaf,
    GraphTooLargeError,
    assess,
    assess_sl,
    assess_with_trace,
    evaluate_expression,
    oracle_assess,
)
from trustcalc.graph import TrustGraph, UnknownNodeError
from trustcalc.opinions import Opinion, combine, discount
from trustcalc.sl import SlOpinion, sl_combine, sl_discount


def assert_opinions_close(a: Opinion, b: Opinion, tol: float = 1e-9) -> None:
    assert a.positive == pytest.approx(b.positive, abs=tol)
    assert a.negative == pytest.approx(b.negative, abs=tol)
    assert a.uncertain == pytest.approx(b.uncertain, abs=tol)


class TestAssessQuery:
    def test_rejects_self_assessment(self):
        with pytest.raises(ValueError):
            AssessQuery("A", "A", 3)

    def test_rejects_nonpositive_depth(self):
        with pytest.raises(ValueError):
            AssessQuery("A", "B", 0)


class TestAssessBasics:
    def test_single_edge_returned_unchanged(self):
        graph = TrustGraph({("A", "C"): Opinion(5, 3, 2)})
        assert assess(graph, AssessQuery("A", "C", 1)) == Opinion(5, 3, 2)

    def test_series_worked_example(self, series_graph):
        result = assess(series_graph, AssessQuery("A", "C", 2))
        assert result.evidence() == (2.0, 2.0, 6.0)

    def test_depth_one_distorts_two_hop_path_to_pure_uncertainty(self, series_graph):
        # The branch through B is cut off by the depth budget, so its
        # evidence arrives fully distorted: no certain evidence, total kept.
        result = assess(series_graph, AssessQuery("A", "C", 1))
        assert result.evidence() == (0.0, 0.0, 10.0)

    def test_unreachable_is_vacuous(self, series_graph):
        assert assess(series_graph, AssessQuery("C", "A", 4)).is_vacuous

    def test_unknown_node_rejected(self, series_graph):
        with pytest.raises(UnknownNodeError):
            assess(series_graph, AssessQuery("A", "Z", 2))

    def test_series_fold_equivalence(self):
        rng = random.Random(11)
        opinions = [
            Opinion(rng.uniform(0, 9), rng.uniform(0, 9), rng.uniform(0, 9))
            for _ in range(4)
        ]
        names = ["n0", "n1", "n2", "n3", "n4"]
        graph = TrustGraph(
            {(names[i], names[i + 1]): opinions[i] for i in range(4)}
        )
        expected = opinions[0]
        for op in opinions[1:]:
            expected = discount(expected, op)
        result = assess(graph, AssessQuery("n0", "n4", 4))
        assert_opinions_close(result, expected, tol=1e-12)

    def test_parallel_branches_combine(self):
        graph = TrustGraph(
            {("A", "C"): Opinion(3, 1, 1), ("A", "B"): Opinion(5, 3, 2), ("B", "C"): Opinion(4, 4, 2)}
        )
        result = assess(graph, AssessQuery("A", "C", 2))
        expected = combine(
            discount(Opinion(5, 3, 2), Opinion(4, 4, 2)), Opinion(3, 1, 1)
        )
        assert_opinions_close(result, expected, tol=1e-12)

    def test_exhausted_branch_contributes_pure_uncertainty(self):
        # X -> B is beyond the depth budget, so the B branch enters as
        # total distorted evidence while the direct branch is unaffected.
        graph = TrustGraph(
            {
                ("A", "C"): Opinion(3, 1, 1),
                ("X", "B"): Opinion(9, 1, 0),
                ("B", "C"): Opinion(4, 4, 2),
            }
        )
        result = assess(graph, AssessQuery("A", "C", 2))
        expected = combine(Opinion(0, 0, 10), Opinion(3, 1, 1))
        assert_opinions_close(result, expected, tol=1e-12)


class TestBridge:
    def test_matches_hand_formula(self, bridge_graph, bridge_query):
        w_ab = bridge_graph.edge("A", "B")
        w_ac = bridge_graph.edge("A", "C")
        w_bc = bridge_graph.edge("B", "C")
        w_bd = bridge_graph.edge("B", "D")
        w_cd = bridge_graph.edge("C", "D")
        expected = combine(
            discount(w_ab, w_bd),
            discount(combine(discount(w_ab, w_bc), w_ac), w_cd),
        )
        result = assess(bridge_graph, bridge_query)
        assert_opinions_close(result, expected, tol=1e-12)

    def test_exactly_four_invocations(self, bridge_graph, bridge_query):
        _, trace = assess_with_trace(bridge_graph, bridge_query)
        assert [(t, e) for t, e, _ in trace.calls] == [
            ("A", "D"),
            ("A", "B"),
            ("A", "C"),
            ("A", "B"),
        ]

    def test_distorting_opinion_reused_original_edges_once(self, bridge_graph, bridge_query):
        _, trace = assess_with_trace(bridge_graph, bridge_query)

        def edge_leaves(node):
            if isinstance(node, EdgeLeaf):
                yield (node.src, node.dst)
            elif isinstance(node, DiscountNode):
                yield from edge_leaves(node.distorting)
                yield from edge_leaves(node.original)
            elif isinstance(node, CombineNode):
                for branch in node.branches:
                    yield from edge_leaves(branch)

        leaves = list(edge_leaves(trace.expression))
        assert leaves.count(("A", "B")) == 2  # distorting reuse is allowed
        assert leaves.count(("B", "D")) == 1  # originals enter once
        assert leaves.count(("C", "D")) == 1
        assert leaves.count(("B", "C")) == 1
        assert leaves.count(("A", "C")) == 1


class TestTrace:
    def test_single_edge_one_invocation(self):
        graph = TrustGraph({("A", "C"): Opinion(5, 3, 2)})
        _, trace = assess_with_trace(graph, AssessQuery("A", "C", 1))
        assert trace.calls == [("A", "C", 1)]

    def test_series_two_invocations(self, series_graph):
        _, trace = assess_with_trace(series_graph, AssessQuery("A", "C", 2))
        assert trace.calls == [("A", "C", 2), ("A", "B", 1)]

    def test_expression_evaluates_to_result(self, bridge_graph, bridge_query):
        result, trace = assess_with_trace(bridge_graph, bridge_query)
        evaluated = evaluate_expression(trace.expression)
        assert_opinions_close(evaluated, result, tol=1e-12)
        assert evaluated.base_rate == result.base_rate

    def test_depth_bound_respected(self, bridge_graph):
        for depth in (1, 2, 3, 5):
            _, trace = assess_with_trace(bridge_graph, AssessQuery("A", "D", depth))
            assert all(1 <= d <= depth for _, _, d in trace.calls)

    def test_deterministic(self, bridge_graph, bridge_query):
        first, first_trace = assess_with_trace(bridge_graph, bridge_query)
        second, second_trace = assess_with_trace(bridge_graph, bridge_query)
        assert first == second
        assert first_trace.calls == second_trace.calls
        assert first_trace.expression == second_trace.expression

    def test_trace_matches_plain_assess(self, bridge_graph, bridge_query):
        with_trace, _ = assess_with_trace(bridge_graph, bridge_query)
        assert with_trace == assess(bridge_graph, bridge_query)

    def test_independent_of_edge_insertion_order(self, bridge_query):
        from conftest import BRIDGE_EDGES

        forward = TrustGraph(dict(BRIDGE_EDGES))
        backward = TrustGraph(dict(reversed(list(BRIDGE_EDGES.items()))))
        assert assess(forward, bridge_query) == assess(backward, bridge_query)
        assert (
            assess_with_trace(forward, bridge_query)[1].calls
            == assess_with_trace(backward, bridge_query)[1].calls
        )


class TestCycles:
    def test_cyclic_bridge_matches_hand_evaluation(self, cyclic_bridge_graph):
        w_ab = cyclic_bridge_graph.edge("A", "B")
        w_ac = cyclic_bridge_graph.edge("A", "C")
        w_bc = cyclic_bridge_graph.edge("B", "C")
        w_cd = cyclic_bridge_graph.edge("C", "D")
        # The only way into D is through C; the cycle D->B->C->D cannot
        # re-enter D because the trustee is removed before recursing.
        expected = discount(combine(discount(w_ab, w_bc), w_ac), w_cd)
        result = assess(cyclic_bridge_graph, AssessQuery("A", "D", 3))
        assert_opinions_close(result, expected, tol=1e-12)

    def test_two_cycle_terminates(self):
        graph = TrustGraph(
            {("A", "B"): Opinion(5, 3, 2), ("B", "A"): Opinion(4, 4, 2),
             ("B", "C"): Opinion(3, 3, 3)}
        )
        result = assess(graph, AssessQuery("A", "C", 10))
        expected = discount(Opinion(5, 3, 2), Opinion(3, 3, 3))
        assert_opinions_close(result, expected, tol=1e-12)

    def test_feedback_edge_into_recommender_is_cut(self):
        # C rates B, but C is removed before B is assessed, so that edge
        # never feeds back into the result.
        graph = TrustGraph(
            {
                ("A", "B"): Opinion(5, 3, 2),
                ("B", "C"): Opinion(4, 4, 2),
                ("C", "B"): Opinion(6, 1, 1),
            }
        )
        result = assess(graph, AssessQuery("A", "C", 6))
        expected = discount(Opinion(5, 3, 2), Opinion(4, 4, 2))
        assert_opinions_close(result, expected, tol=1e-12)


class TestSlVariant:
    def test_single_edge_keeps_certain_evidence(self):
        graph = TrustGraph({("A", "C"): Opinion(5, 3, 2)})
        result = assess_sl(graph, AssessQuery("A", "C", 1))
        assert (result.positive, result.negative) == (5.0, 3.0)

    def test_series_worked_example(self, series_graph):
        result = assess_sl(series_graph, AssessQuery("A", "C", 2))
        assert result.positive == pytest.approx(2 / 3, abs=1e-12)
        assert result.negative == pytest.approx(2 / 3, abs=1e-12)

    def test_parallel_branches_use_sl_combine(self):
        graph = TrustGraph(
            {("A", "C"): Opinion(3, 1, 1), ("A", "B"): Opinion(5, 3, 2), ("B", "C"): Opinion(4, 4, 2)}
        )
        result = assess_sl(graph, AssessQuery("A", "C", 2))
        expected = sl_combine(
            sl_discount(SlOpinion(5, 3), SlOpinion(4, 4)), SlOpinion(3, 1)
        )
        assert result.positive == pytest.approx(expected.positive, abs=1e-12)
        assert result.negative == pytest.approx(expected.negative, abs=1e-12)

    def test_unreachable_is_zero_evidence(self, series_graph):
        result = assess_sl(series_graph, AssessQuery("C", "A", 3))
        assert result.certain_total() == 0.0


class TestOracle:
    def test_fixtures_agree(self, series_graph, bridge_graph, cyclic_bridge_graph):
        cases = [
            (series_graph, AssessQuery("A", "C", 2)),
            (bridge_graph, AssessQuery("A", "D", 3)),
            (cyclic_bridge_graph, AssessQuery("A", "D", 3)),
        ]
        for graph, query in cases:
            assert_opinions_close(oracle_assess(graph, query), assess(graph, query))

    def test_fifty_random_dags_agree(self):
        rng = random.Random(20260810)
        for _ in range(50):
            graph, query = random_dag(rng)
            assert_opinions_close(oracle_assess(graph, query), assess(graph, query))

    def test_random_cyclic_graphs_agree(self):
        rng = random.Random(99)
        for _ in range(20):
            graph, query = random_dag(rng, max_nodes=6)
            nodes = sorted(graph.nodes)
            # add a couple of back edges to create cycles
            for _ in range(2):
                i, j = rng.sample(range(len(nodes)), 2)
                src, dst = nodes[max(i, j)], nodes[min(i, j)]
                if not graph.has_edge(src, dst):
                    graph = graph.with_edge(
                        src, dst, Opinion(rng.uniform(0, 9), rng.uniform(0, 9), rng.uniform(0, 9))
                    )
            assert_opinions_close(oracle_assess(graph, query), assess(graph, query))

    def test_large_graph_rejected(self):
        edges = {(f"n{i}", f"n{i + 1}"): Opinion(1, 0, 0) for i in range(12)}
        graph = TrustGraph(edges)  # 13 nodes
        with pytest.raises(GraphTooLargeError):
            oracle_assess(graph, AssessQuery("n0", "n12", 3))


class TestRuntimeSmoke:
    def test_depth_two_growth_stays_quadratic(self):
        # Light companion to the depth-3 acceptance check: on complete
        # digraphs the work at H=2 should track n^2 within a generous
        # constant.
        import time

        def complete(n):
            names = [f"v{i:02d}" for i in range(n)]
            edges = {
                (u, v): Opinion(4, 2, 1)
                for u in names
                for v in names
                if u != v
            }
            return TrustGraph(edges), names

        def best_time(n, repeats=40):
            graph, names = complete(n)
            query = AssessQuery(names[0], names[-1], 2)
            assess(graph, query)
            best = float("inf")
            for _ in range(repeats):
                start = time.perf_counter()
                assess(graph, query)
                best = min(best, time.perf_counter() - start)
            return best

        times = {n: best_time(n) for n in (4, 6, 8)}
        reference = times[4] / 4**2
        for n in (6, 8):
            assert times[n] / n**2 <= 8.0 * reference, times
