"""Recursive indirect-trust assessment over arbitrary graph topologies.

To compute the trustor A's opinion of a trustee C, the engine walks the
graph backwards from C.  For every predecessor c_i of C it forms one
branch opinion:

    c_i == A   the direct edge opinion ω(A, C) is used as-is;
    c_i != A   A's opinion of c_i is computed recursively on the graph
               with C removed, then discounted into the edge opinion:
               Δ(assess(A, c_i), ω(c_i, C)).

Branches are fused with the combining operator.  Removing the trustee
node (not just the visited edge) before recursing is what eliminates
cycles: once C has been consumed, no path may route trust back through
it, so the recursion terminates on any finite graph.  A search-depth
budget caps the recursion; exhausted branches evaluate to the vacuous
opinion and propagate as pure uncertainty.

Reusing A's opinion of a shared recommender in several branches is
sound (a distorting opinion never adds evidence), whereas each edge
into the trustee is consumed exactly once per level.  That is the
structural guarantee that combined branches carry independent evidence.

The same control flow runs with the classic two-valued operators
(`assess_sl`) to form the SL* baseline, and `oracle_assess` recomputes
the recursion naively over explicit subgraph copies as an independent
cross-check for small graphs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from . import opinions as _ops
from .graph import TrustGraph, UnknownNodeError
from .opinions import Opinion
from .sl import SlOpinion, sl_combine, sl_discount

__all__ = [
    "AssessQuery",
    "AssessTrace",
    "CombineNode",
    "DiscountNode",
    "EdgeLeaf",
    "GraphTooLargeError",
    "VacuousLeaf",
    "assess",
    "assess_sl",
    "assess_with_trace",
    "evaluate_expression",
    "oracle_assess",
]

_ORACLE_MAX_NODES = 12

_VACUOUS = Opinion.vacuous()


class GraphTooLargeError(ValueError):
    """The brute-force oracle is restricted to small graphs."""


@dataclass(frozen=True)
class AssessQuery:
    """A trust question: how much should `trustor` trust `trustee`?

    `depth_h` is the maximum searching depth in hops; deeper paths are
    cut off and contribute pure uncertainty.
    """

    trustor: str
    trustee: str
    depth_h: int

    def __post_init__(self) -> None:
        if self.trustor == self.trustee:
            raise ValueError("a user never assesses its own trust")
        if self.depth_h < 1:
            raise ValueError(f"depth_h must be >= 1, got {self.depth_h}")


# Expression-tree nodes describing how a result was assembled.


@dataclass(frozen=True)
class EdgeLeaf:
    """A direct edge opinion consumed by the computation."""

    src: str
    dst: str
    opinion: Opinion


@dataclass(frozen=True)
class VacuousLeaf:
    """A depth-exhausted branch; evaluates to the vacuous opinion."""


@dataclass(frozen=True)
class DiscountNode:
    """Δ(distorting, original): propagation into an edge."""

    distorting: "ExprNode"
    original: EdgeLeaf


@dataclass(frozen=True)
class CombineNode:
    """Θ over two or more independent branch expressions."""

    branches: tuple["ExprNode", ...]


ExprNode = Union[EdgeLeaf, VacuousLeaf, DiscountNode, CombineNode]


def evaluate_expression(node: ExprNode) -> Opinion:
    """Evaluate an expression tree with the opinion algebra."""
    if isinstance(node, EdgeLeaf):
        return node.opinion
    if isinstance(node, VacuousLeaf):
        return Opinion.vacuous()
    if isinstance(node, DiscountNode):
        return _ops.discount(evaluate_expression(node.distorting), node.original.opinion)
    if isinstance(node, CombineNode):
        return _ops.combine_many(evaluate_expression(b) for b in node.branches)
    raise TypeError(f"not an expression node: {node!r}")


@dataclass
class AssessTrace:
    """Record of one assessment run.

    `calls` lists every recursive invocation as (trustor, trustee,
    remaining_depth) in call order; depth-exhausted cut-offs are not
    invocations and do not appear.  `expression` is the operator tree
    whose evaluation reproduces the returned opinion.
    """

    calls: list[tuple[str, str, int]] = field(default_factory=list)
    expression: ExprNode = VacuousLeaf()


def _check_query(graph: TrustGraph, query: AssessQuery) -> None:
    for node in (query.trustor, query.trustee):
        if not graph.has_node(node):
            raise UnknownNodeError(node)


def assess(graph: TrustGraph, query: AssessQuery) -> Opinion:
    """The trustor's indirect opinion of the trustee.

    Deterministic: branches are explored in sorted predecessor order,
    so identical inputs give bit-identical outputs.  Returns the
    vacuous opinion when the trustee is unreachable within the depth
    budget.
    """
    _check_query(graph, query)
    result, _ = _assess_3vsl(
        graph, frozenset(), query.trustor, query.trustee, query.depth_h, None
    )
    return result


def assess_with_trace(graph: TrustGraph, query: AssessQuery) -> tuple[Opinion, AssessTrace]:
    """As `assess`, also returning the invocation log and operator tree."""
    _check_query(graph, query)
    trace = AssessTrace()
    result, expression = _assess_3vsl(
        graph, frozenset(), query.trustor, query.trustee, query.depth_h, trace.calls
    )
    trace.expression = expression
    return result, trace


def _assess_3vsl(
    graph: TrustGraph,
    removed: frozenset[str],
    trustor: str,
    trustee: str,
    depth: int,
    calls: list[tuple[str, str, int]] | None,
) -> tuple[Opinion, ExprNode]:
    """One recursion step on the graph view with `removed` nodes deleted."""
    if depth <= 0:
        return Opinion.vacuous(), VacuousLeaf()
    if calls is not None:
        calls.append((trustor, trustee, depth))
    branches: list[tuple[Opinion, ExprNode]] = []
    next_removed = removed | {trustee}
    for pred in graph.predecessors(trustee):
        if pred in removed:
            continue
        edge = graph.edge(pred, trustee)
        leaf = EdgeLeaf(pred, trustee, edge)
        if pred == trustor:
            branches.append((edge, leaf))
            continue
        if depth == 1:
            # The recursion below would be cut off at depth 0 and return
            # the vacuous opinion; discounting by it distorts the whole
            # edge into uncertainty.  Short-circuit that computation.
            branch = _ops.discount(_VACUOUS, edge)
            branches.append((branch, DiscountNode(VacuousLeaf(), leaf)))
            continue
        sub_opinion, sub_expr = _assess_3vsl(
            graph, next_removed, trustor, pred, depth - 1, calls
        )
        branches.append((_ops.discount(sub_opinion, edge), DiscountNode(sub_expr, leaf)))
    # Zero-evidence branches are additive identities of the combine
    # operator; dropping them keeps traces free of dead weight.
    branches = [(op, expr) for op, expr in branches if op.total() > 0.0]
    if not branches:
        return Opinion.vacuous(), VacuousLeaf()
    if len(branches) == 1:
        return branches[0]
    combined = _ops.combine_many(op for op, _ in branches)
    return combined, CombineNode(tuple(expr for _, expr in branches))


def assess_sl(graph: TrustGraph, query: AssessQuery) -> SlOpinion:
    """The SL* baseline: identical search, classic two-valued operators.

    Edge opinions enter as ⟨positive, negative⟩ with the uncertain
    evidence discarded into the model's fixed uncertainty mass.
    """
    _check_query(graph, query)
    return _assess_sl(graph, frozenset(), query.trustor, query.trustee, query.depth_h)


def _sl_view(edge: Opinion) -> SlOpinion:
    return SlOpinion(edge.positive, edge.negative, edge.base_rate)


def _assess_sl(
    graph: TrustGraph,
    removed: frozenset[str],
    trustor: str,
    trustee: str,
    depth: int,
) -> SlOpinion:
    if depth <= 0:
        return SlOpinion(0.0, 0.0)
    branches: list[SlOpinion] = []
    next_removed = removed | {trustee}
    for pred in graph.predecessors(trustee):
        if pred in removed:
            continue
        edge = _sl_view(graph.edge(pred, trustee))
        if pred == trustor:
            branches.append(edge)
            continue
        if depth == 1:
            continue  # discounting by the zero-evidence cut-off zeroes the branch
        sub = _assess_sl(graph, next_removed, trustor, pred, depth - 1)
        branches.append(sl_discount(sub, edge))
    branches = [b for b in branches if b.certain_total() > 0.0]
    if not branches:
        return SlOpinion(0.0, 0.0)
    result = branches[0]
    for branch in branches[1:]:
        result = sl_combine(result, branch)
    return result


def oracle_assess(graph: TrustGraph, query: AssessQuery) -> Opinion:
    """Brute-force reference assessment for small graphs.

    Recomputes the reduction directly from its two rules (a single
    predecessor gives one discounted branch, several give a combine of
    discounted branches), materializing an explicit subgraph copy for
    every recursive step instead of tracking a removal set.  Slow but
    simple; used to cross-check `assess`.

    Raises:
        GraphTooLargeError: for graphs above 12 nodes.
    """
    if graph.num_nodes > _ORACLE_MAX_NODES:
        raise GraphTooLargeError(
            f"oracle handles at most {_ORACLE_MAX_NODES} nodes, got {graph.num_nodes}"
        )
    _check_query(graph, query)
    return _oracle(graph, query.trustor, query.trustee, query.depth_h)


def _oracle(graph: TrustGraph, trustor: str, trustee: str, depth: int) -> Opinion:
    if depth <= 0:
        return Opinion.vacuous()
    branches: list[Opinion] = []
    for pred in graph.predecessors(trustee):
        edge = graph.edge(pred, trustee)
        if pred == trustor:
            branches.append(edge)
        else:
            subgraph = graph.without_node(trustee)
            branches.append(_ops.discount(_oracle(subgraph, trustor, pred, depth - 1), edge))
    branches = [b for b in branches if b.total() > 0.0]
    if not branches:
        return Opinion.vacuous()
    result = branches[0]
    for branch in branches[1:]:
        result = _ops.combine(result, branch)
    return result
