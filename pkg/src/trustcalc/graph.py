"""Directed trust graphs, edge-list ingestion, and ordinal level scales.

A trust dataset arrives as a TSV edge list with lines

    src<TAB>dst<TAB>level

where level is an ordinal trust level, by name or by integer index
(lowest first).  Lines starting with '#' are comments; blank lines are
skipped.  Ordinal levels are mapped to evidence fractions r_k in (0, 1)
by a normal-score transformation of the observed level frequencies
(`build_scale`), and each edge becomes an opinion with total evidence
λ:

    positive-negative style   ⟨λ·r, λ·(1 − r), 0⟩      (no uncertain evidence;
                                                         software-community data)
    positive-uncertain style  ⟨λ·r, 0, λ·(1 − r)⟩      (no negative evidence;
                                                         certification-web data)

Graphs are simple digraphs: at most one edge per ordered pair and no
self-loops (a user absolutely trusts itself, so a self-opinion is
meaningless).  `TrustGraph` values are immutable after construction;
mutating operations return new graphs, so concurrent readers are safe.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator, Mapping

from scipy import stats as _scipy_stats

from .opinions import Opinion

__all__ = [
    "EdgeListFormatError",
    "EvidenceStyle",
    "GraphStats",
    "LevelScale",
    "LoadWarnings",
    "MissingEdgeError",
    "TrustGraph",
    "UnknownNodeError",
    "build_scale",
    "dump_edge_list",
    "dump_opinion_edges",
    "load_edge_list",
    "load_opinion_edges",
]


class EdgeListFormatError(ValueError):
    """A malformed line in an edge-list stream; carries the line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class UnknownNodeError(KeyError):
    """A queried node is not present in the graph."""

    def __init__(self, node: str):
        super().__init__(node)
        self.node = node

    def __str__(self) -> str:
        return f"unknown node {self.node!r}"


class MissingEdgeError(KeyError):
    """A queried edge is not present in the graph."""

    def __init__(self, src: str, dst: str):
        super().__init__((src, dst))
        self.src, self.dst = src, dst

    def __str__(self) -> str:
        return f"no edge {self.src!r} -> {self.dst!r}"


class EvidenceStyle(enum.Enum):
    """How an ordinal level's non-positive evidence share is classified."""

    POSITIVE_NEGATIVE = "positive-negative"  # remainder counts as negative
    POSITIVE_UNCERTAIN = "positive-uncertain"  # remainder counts as uncertain

    def opinion_for_fraction(self, fraction: float, total_evidence: float) -> Opinion:
        """Build the edge opinion for a positive-evidence fraction."""
        positive = total_evidence * fraction
        remainder = total_evidence - positive
        if self is EvidenceStyle.POSITIVE_NEGATIVE:
            return Opinion(positive, remainder, 0.0)
        return Opinion(positive, 0.0, remainder)


@dataclass(frozen=True)
class LoadWarnings:
    """Counts of tolerated irregularities seen while loading an edge list."""

    duplicate_edges: int = 0
    self_loops: int = 0


@dataclass(frozen=True)
class LevelScale:
    """An ordered mapping from trust levels to positive-evidence fractions.

    `level_names` runs lowest to highest; `fractions` holds the matching
    r_k values, strictly increasing within (0, 1).
    """

    level_names: tuple[str, ...]
    fractions: tuple[float, ...]

    def __post_init__(self) -> None:
        names = tuple(str(n) for n in self.level_names)
        fractions = tuple(float(f) for f in self.fractions)
        if len(names) != len(fractions) or not names:
            raise ValueError("level names and fractions must align and be nonempty")
        if len(set(names)) != len(names):
            raise ValueError("level names must be unique")
        for f in fractions:
            if not 0.0 < f < 1.0:
                raise ValueError(f"fractions must lie in (0, 1), got {f}")
        if any(b <= a for a, b in zip(fractions, fractions[1:])):
            raise ValueError("fractions must be strictly increasing")
        object.__setattr__(self, "level_names", names)
        object.__setattr__(self, "fractions", fractions)

    def __len__(self) -> int:
        return len(self.level_names)

    def resolve(self, token: str) -> int:
        """Level index for a name or a decimal index string."""
        if token in self.level_names:
            return self.level_names.index(token)
        try:
            index = int(token, 10)
        except ValueError:
            raise ValueError(f"unknown trust level {token!r}") from None
        if not 0 <= index < len(self.level_names):
            raise ValueError(f"level index {index} out of range 0..{len(self) - 1}")
        return index

    def nearest_level(self, value: float) -> int:
        """Index of the fraction closest to `value`; ties round down."""
        best = 0
        best_distance = abs(value - self.fractions[0])
        for k in range(1, len(self.fractions)):
            distance = abs(value - self.fractions[k])
            if distance < best_distance:
                best, best_distance = k, distance
        return best


def build_scale(
    level_counts: Iterable[int],
    lowest_fraction: float,
    highest_fraction: float = 0.9,
    level_names: Iterable[str] | None = None,
) -> LevelScale:
    """Construct a level scale by normal-score transformation.

    Each level's observed count is turned into a z-score at the
    mid-rank cumulative probability of its occupants,

        z_k = Φ⁻¹((count_below_k + count_k / 2) / N),

    and intermediate fractions are interpolated linearly in z between
    the fixed endpoints:

        r_k = r_0 + (z_k − z_0) / (z_last − z_0) · (r_last − r_0).

    Raises:
        ValueError: fewer than two levels, a zero count (its z-score
            would be undefined), or endpoint fractions out of order.
    """
    counts = [int(c) for c in level_counts]
    if len(counts) < 2:
        raise ValueError("a scale needs at least two levels")
    if any(c <= 0 for c in counts):
        raise ValueError("every level needs a positive count; z-scores are undefined otherwise")
    if not 0.0 < lowest_fraction < highest_fraction < 1.0:
        raise ValueError(
            f"need 0 < lowest < highest < 1, got ({lowest_fraction}, {highest_fraction})"
        )
    total = sum(counts)
    z_scores = []
    below = 0
    for count in counts:
        z_scores.append(float(_scipy_stats.norm.ppf((below + count / 2.0) / total)))
        below += count
    if any(b <= a for a, b in zip(z_scores, z_scores[1:])):
        raise ValueError("z-scores are not strictly increasing")
    z_lo, z_hi = z_scores[0], z_scores[-1]
    span = highest_fraction - lowest_fraction
    fractions = [
        lowest_fraction + (z - z_lo) / (z_hi - z_lo) * span for z in z_scores
    ]
    fractions[0], fractions[-1] = lowest_fraction, highest_fraction
    names = (
        tuple(str(n) for n in level_names)
        if level_names is not None
        else tuple(str(i) for i in range(len(counts)))
    )
    return LevelScale(names, tuple(fractions))


@dataclass(frozen=True)
class GraphStats:
    """Size and degree summary of a trust graph.

    Both degree conventions are reported: `mean_out_degree` is edges
    per node (equal to the mean in-degree in a digraph), and
    `mean_total_degree` counts each edge at both endpoints.
    """

    num_nodes: int
    num_edges: int
    mean_out_degree: float
    mean_total_degree: float

    def to_dict(self) -> dict:
        return {
            "nodes": self.num_nodes,
            "edges": self.num_edges,
            "mean_out_degree": self.mean_out_degree,
            "mean_total_degree": self.mean_total_degree,
        }


class TrustGraph:
    """A simple directed graph with one opinion per edge.

    Instances are immutable: `with_edge`, `remove_edge`, and
    `without_node` return new graphs sharing no mutable state with the
    original.  Node ids are opaque strings.  Neighbor listings are
    sorted, so iteration order is reproducible everywhere.
    """

    __slots__ = ("_nodes", "_edges", "_outgoing", "_incoming", "load_warnings")

    def __init__(
        self,
        edges: Mapping[tuple[str, str], Opinion] | None = None,
        extra_nodes: Iterable[str] = (),
        load_warnings: LoadWarnings | None = None,
    ):
        edge_map: dict[tuple[str, str], Opinion] = {}
        outgoing: dict[str, dict[str, Opinion]] = {}
        incoming: dict[str, dict[str, Opinion]] = {}
        nodes: set[str] = set(str(n) for n in extra_nodes)
        for (src, dst), opinion in (edges or {}).items():
            src, dst = str(src), str(dst)
            if src == dst:
                raise ValueError(f"self-loop {src!r} -> {dst!r} not allowed")
            edge_map[(src, dst)] = opinion
            outgoing.setdefault(src, {})[dst] = opinion
            incoming.setdefault(dst, {})[src] = opinion
            nodes.add(src)
            nodes.add(dst)
        self._nodes = frozenset(nodes)
        self._edges = edge_map
        self._outgoing = outgoing
        self._incoming = incoming
        self.load_warnings = load_warnings or LoadWarnings()

    # -- queries ------------------------------------------------------

    @property
    def nodes(self) -> frozenset[str]:
        return self._nodes

    @property
    def num_nodes(self) -> int:
        return len(self._nodes)

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    def edges(self) -> Iterator[tuple[str, str, Opinion]]:
        """All edges as (src, dst, opinion), in sorted order."""
        for src, dst in sorted(self._edges):
            yield src, dst, self._edges[(src, dst)]

    def has_node(self, node: str) -> bool:
        return node in self._nodes

    def has_edge(self, src: str, dst: str) -> bool:
        return (src, dst) in self._edges

    def edge(self, src: str, dst: str) -> Opinion:
        try:
            return self._edges[(src, dst)]
        except KeyError:
            raise MissingEdgeError(src, dst) from None

    def successors(self, node: str) -> tuple[str, ...]:
        if node not in self._nodes:
            raise UnknownNodeError(node)
        return tuple(sorted(self._outgoing.get(node, ())))

    def predecessors(self, node: str) -> tuple[str, ...]:
        if node not in self._nodes:
            raise UnknownNodeError(node)
        return tuple(sorted(self._incoming.get(node, ())))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TrustGraph):
            return NotImplemented
        return self._nodes == other._nodes and self._edges == other._edges

    def __hash__(self) -> int:  # pragma: no cover - graphs are rarely hashed
        return hash((self._nodes, frozenset(self._edges)))

    def __repr__(self) -> str:
        return f"TrustGraph(nodes={self.num_nodes}, edges={self.num_edges})"

    # -- functional updates -------------------------------------------

    def with_edge(self, src: str, dst: str, opinion: Opinion) -> "TrustGraph":
        """A new graph with the edge added or replaced."""
        if src == dst:
            raise ValueError(f"self-loop {src!r} -> {dst!r} not allowed")
        edges = dict(self._edges)
        edges[(src, dst)] = opinion
        return TrustGraph(edges, self._nodes)

    def remove_edge(self, src: str, dst: str) -> "TrustGraph":
        """A new graph without the edge; the endpoints stay as nodes.

        Raises:
            MissingEdgeError: if the edge is not present.
        """
        if (src, dst) not in self._edges:
            raise MissingEdgeError(src, dst)
        edges = dict(self._edges)
        del edges[(src, dst)]
        return TrustGraph(edges, self._nodes)

    def without_node(self, node: str) -> "TrustGraph":
        """A new graph with the node and all its incident edges removed."""
        if node not in self._nodes:
            raise UnknownNodeError(node)
        edges = {
            (src, dst): op
            for (src, dst), op in self._edges.items()
            if src != node and dst != node
        }
        return TrustGraph(edges, self._nodes - {node})

    # -- analysis ------------------------------------------------------

    def path_exists(
        self,
        src: str,
        dst: str,
        max_hops: int,
        skip_edge: tuple[str, str] | None = None,
    ) -> bool:
        """Whether a directed path of at most `max_hops` edges exists.

        `skip_edge` ignores one edge during the search, which lets
        leave-one-out protocols test for an alternative path without
        materializing the reduced graph.
        """
        if src == dst:
            raise ValueError("path queries require distinct endpoints")
        for node in (src, dst):
            if node not in self._nodes:
                raise UnknownNodeError(node)
        if max_hops < 1:
            return False
        frontier = {src}
        seen = {src}
        for _ in range(max_hops):
            next_frontier = set()
            for node in frontier:
                for succ in self._outgoing.get(node, ()):
                    if skip_edge is not None and (node, succ) == skip_edge:
                        continue
                    if succ == dst:
                        return True
                    if succ not in seen:
                        seen.add(succ)
                        next_frontier.add(succ)
            if not next_frontier:
                return False
            frontier = next_frontier
        return False

    def stats(self) -> GraphStats:
        """Node/edge counts with mean degrees under both conventions."""
        n, e = self.num_nodes, self.num_edges
        if n == 0:
            return GraphStats(0, 0, 0.0, 0.0)
        return GraphStats(n, e, e / n, 2.0 * e / n)


# -- edge-list parsing -----------------------------------------------


def _iter_records(source: bytes | BinaryIO, fields: int) -> Iterator[tuple[int, list[str]]]:
    """Yield (line_number, field_list) for data lines of a TSV stream."""
    if isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = source.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EdgeListFormatError(0, f"stream is not valid UTF-8: {exc}") from None
    for line_number, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != fields:
            raise EdgeListFormatError(
                line_number, f"expected {fields} tab-separated fields, got {len(parts)}"
            )
        stripped = [p.strip() for p in parts]
        if any(not p for p in stripped[:2]):
            raise EdgeListFormatError(line_number, "empty node id")
        yield line_number, stripped


def _graph_from_records(
    records: Iterable[tuple[str, str, Opinion]],
) -> tuple[dict[tuple[str, str], Opinion], set[str], LoadWarnings]:
    edges: dict[tuple[str, str], Opinion] = {}
    nodes: set[str] = set()
    duplicates = 0
    self_loops = 0
    for src, dst, opinion in records:
        nodes.add(src)
        nodes.add(dst)
        if src == dst:
            self_loops += 1
            continue
        if (src, dst) in edges:
            duplicates += 1
        edges[(src, dst)] = opinion  # last occurrence wins
    return edges, nodes, LoadWarnings(duplicates, self_loops)


def load_edge_list(
    source: bytes | BinaryIO,
    scale: LevelScale,
    style: EvidenceStyle,
    total_evidence: float,
) -> TrustGraph:
    """Parse a level TSV stream into a trust graph.

    Every edge receives the opinion for its level's scale fraction with
    total evidence `total_evidence` and base rate 0.5.  Duplicate
    (src, dst) lines keep the last occurrence and self-loops are
    dropped; both are counted in the result's `load_warnings`.  An
    empty stream yields an empty graph.

    Raises:
        EdgeListFormatError: wrong field count or unknown level,
            reported with its line number.
    """
    if not total_evidence > 0.0:
        raise ValueError(f"total evidence must be positive, got {total_evidence}")

    def parse() -> Iterator[tuple[str, str, Opinion]]:
        for line_number, (src, dst, level_token) in _iter_records(source, 3):
            try:
                level = scale.resolve(level_token)
            except ValueError as exc:
                raise EdgeListFormatError(line_number, str(exc)) from None
            yield src, dst, style.opinion_for_fraction(scale.fractions[level], total_evidence)

    edges, nodes, warnings = _graph_from_records(parse())
    return TrustGraph(edges, nodes, warnings)


def load_opinion_edges(source: bytes | BinaryIO) -> TrustGraph:
    """Parse a raw-opinion TSV stream: src, dst, positive, negative, uncertain.

    The five-column format produced by `dump_opinion_edges` (and the
    CLI convert command); it carries explicit evidence values instead of
    ordinal levels.  Duplicate and self-loop handling matches
    `load_edge_list`.
    """

    def parse() -> Iterator[tuple[str, str, Opinion]]:
        for line_number, fields in _iter_records(source, 5):
            src, dst = fields[0], fields[1]
            try:
                values = [float(x) for x in fields[2:]]
                opinion = Opinion(*values)
            except ValueError as exc:
                raise EdgeListFormatError(line_number, f"bad evidence triple: {exc}") from None
            yield src, dst, opinion

    edges, nodes, warnings = _graph_from_records(parse())
    return TrustGraph(edges, nodes, warnings)


def _format_number(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() and abs(x) < 1e15 else repr(x)


def dump_edge_list(graph: TrustGraph, scale: LevelScale) -> str:
    """Serialize a graph back to level TSV text.

    Each edge's level is recovered as the scale fraction nearest its
    positive-evidence share, which is exact for graphs built by
    `load_edge_list` with the same scale.
    """
    lines = ["#src\tdst\tlevel"]
    for src, dst, opinion in graph.edges():
        total = opinion.total()
        if total <= 0.0:
            raise ValueError(f"edge {src!r} -> {dst!r} has no evidence; level undefined")
        level = scale.nearest_level(opinion.positive / total)
        lines.append(f"{src}\t{dst}\t{scale.level_names[level]}")
    return "\n".join(lines) + "\n"


def dump_opinion_edges(graph: TrustGraph) -> str:
    """Serialize a graph to the five-column raw-opinion TSV format."""
    lines = ["#src\tdst\tpositive\tnegative\tuncertain"]
    for src, dst, opinion in graph.edges():
        lines.append(
            "\t".join(
                (
                    src,
                    dst,
                    _format_number(opinion.positive),
                    _format_number(opinion.negative),
                    _format_number(opinion.uncertain),
                )
            )
        )
    return "\n".join(lines) + "\n"
