"""Command-line interface.

Successful invocations print one JSON document on stdout (stable key
order, so equal inputs give byte-identical output) and a short human
summary on stderr.  Exit codes: 0 success, 1 usage error, 2 data error.

Graph files are TSV.  Three columns (src, dst, level) hold ordinal
levels and require --style to say whether the non-positive evidence
share is negative or uncertain; five columns (src, dst, positive,
negative, uncertain) hold raw opinions and need no transformation
parameters.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .baselines import eigen_trust, tidal_trust, trust_rank
from .engine import AssessQuery, assess, assess_sl
from .graph import (
    EvidenceStyle,
    LevelScale,
    TrustGraph,
    build_scale,
    dump_opinion_edges,
    load_edge_list,
    load_opinion_edges,
)
from .harness import (
    Algorithm,
    ExperimentConfig,
    parameter_sweep,
    run_f1_experiment,
    run_ranking_experiment,
)
from .opinions import expected_belief
from .sl import sl_expected_belief

__all__ = ["main", "run"]

DEFAULT_DEPTH = 3
DEFAULT_LAMBDA = 30.0
DEFAULT_BASE_FRACTION = {
    EvidenceStyle.POSITIVE_NEGATIVE: 0.3,
    EvidenceStyle.POSITIVE_UNCERTAIN: 0.1,
}
DEFAULT_LEVELS = "0,1,2,3"


class UsageError(Exception):
    """Bad flags or arguments; maps to exit code 1."""


class DataError(Exception):
    """Bad input data or failed computation; maps to exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit(2); we want exit 1
        raise UsageError(message)


@dataclass
class LoadedGraph:
    graph: TrustGraph
    scale: LevelScale | None
    style: EvidenceStyle | None


def _parse_style(token: str | None) -> EvidenceStyle | None:
    if token is None:
        return None
    aliases = {
        "pn": EvidenceStyle.POSITIVE_NEGATIVE,
        "positive-negative": EvidenceStyle.POSITIVE_NEGATIVE,
        "pu": EvidenceStyle.POSITIVE_UNCERTAIN,
        "positive-uncertain": EvidenceStyle.POSITIVE_UNCERTAIN,
    }
    try:
        return aliases[token.lower()]
    except KeyError:
        raise UsageError(f"unknown style {token!r}; use positive-negative or positive-uncertain")


def _read_file(path: str) -> bytes:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"cannot read {path!r}: no such file")
    try:
        return p.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read {path!r}: {exc}")


def _detect_columns(raw: bytes) -> int:
    for line in raw.decode("utf-8", errors="replace").split("\n"):
        line = line.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        return len(line.split("\t"))
    return 0


def _scale_from_records(raw: bytes, level_names: list[str], lowest: float) -> LevelScale:
    """Build the level scale from the observed level frequencies.

    Counts run over the effective edge set (duplicates last-wins,
    self-loops dropped) so a later sweep over the loaded graph recovers
    the same distribution.
    """
    probe = LevelScale(
        tuple(level_names),
        tuple((i + 1) / (len(level_names) + 1) for i in range(len(level_names))),
    )
    from .graph import _iter_records  # shared TSV parsing rules

    level_per_edge: dict[tuple[str, str], int] = {}
    for line_number, (src, dst, token) in _iter_records(raw, 3):
        try:
            level = probe.resolve(token)
        except ValueError as exc:
            raise DataError(f"line {line_number}: {exc}")
        if src != dst:
            level_per_edge[(src, dst)] = level
    counts = [0] * len(level_names)
    for level in level_per_edge.values():
        counts[level] += 1
    if any(c == 0 for c in counts):
        missing = [level_names[i] for i, c in enumerate(counts) if c == 0]
        raise DataError(
            f"cannot build a scale: level(s) {missing} never occur in the file"
        )
    return build_scale(counts, lowest, 0.9, level_names)


def _load_graph(args: argparse.Namespace, path: str) -> LoadedGraph:
    raw = _read_file(path)
    columns = _detect_columns(raw)
    if columns == 5:
        try:
            return LoadedGraph(load_opinion_edges(raw), None, None)
        except ValueError as exc:
            raise DataError(str(exc))
    if columns in (0, 3):
        style = _parse_style(getattr(args, "style", None))
        if style is None:
            raise UsageError("--style is required for level edge lists")
        lowest = args.r0 if args.r0 is not None else DEFAULT_BASE_FRACTION[style]
        level_names = [s.strip() for s in args.levels.split(",") if s.strip()]
        if len(level_names) < 2:
            raise UsageError("--levels needs at least two comma-separated names")
        if columns == 0:  # empty file: no scale derivable, empty graph
            return LoadedGraph(TrustGraph(), None, style)
        try:
            scale = _scale_from_records(raw, level_names, lowest)
            graph = load_edge_list(raw, scale, style, args.lam)
        except ValueError as exc:
            raise DataError(str(exc))
        return LoadedGraph(graph, scale, style)
    raise DataError(f"unsupported edge list: expected 3 or 5 columns, found {columns}")


def _resolve_jobs(args: argparse.Namespace) -> int:
    env = os.environ.get("TRUSTCALC_JOBS")
    if env is not None:
        try:
            jobs = int(env)
        except ValueError:
            raise UsageError(f"TRUSTCALC_JOBS must be an integer, got {env!r}")
    elif args.jobs is not None:
        jobs = args.jobs
    else:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise UsageError(f"jobs must be >= 1, got {jobs}")
    return jobs


def _emit(payload: dict, summary: str) -> int:
    print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    print(summary, file=sys.stderr)
    return 0


# -- commands -----------------------------------------------------------


def _parse_algorithm(token: str) -> Algorithm:
    try:
        return Algorithm.parse(token)
    except ValueError as exc:
        raise UsageError(f"--algorithm: {exc}")


def _cmd_assess(args: argparse.Namespace) -> int:
    loaded = _load_graph(args, args.graph)
    algorithm = _parse_algorithm(args.algorithm)
    try:
        query = AssessQuery(args.trustor, args.trustee, args.depth)
    except ValueError as exc:
        raise UsageError(str(exc))
    try:
        if algorithm is Algorithm.AT:
            opinion = assess(loaded.graph, query)
            payload = {
                "algorithm": algorithm.value,
                "opinion": [opinion.positive, opinion.negative, opinion.uncertain],
                "expected_belief": expected_belief(opinion),
            }
        elif algorithm is Algorithm.SLSTAR:
            sl_opinion = assess_sl(loaded.graph, query)
            payload = {
                "algorithm": algorithm.value,
                "sl_opinion": [sl_opinion.positive, sl_opinion.negative],
                "expected_belief": sl_expected_belief(sl_opinion),
            }
        elif algorithm is Algorithm.TT:
            payload = {
                "algorithm": algorithm.value,
                "value": tidal_trust(loaded.graph, args.trustor, args.trustee, max_depth=args.depth),
            }
        elif algorithm is Algorithm.ET:
            scores = eigen_trust(loaded.graph, pretrusted=[args.trustor])
            payload = {"algorithm": algorithm.value, "score": scores[args.trustee]}
        else:
            scores = trust_rank(loaded.graph, seeds=[args.trustor])
            payload = {"algorithm": algorithm.value, "score": scores[args.trustee]}
    except (KeyError, ValueError) as exc:
        raise DataError(str(exc))
    summary = f"{args.trustor} -> {args.trustee} via {algorithm.value}"
    if "expected_belief" in payload:
        summary += f": expected belief {payload['expected_belief']:.4f}"
    return _emit(payload, summary)


def _cmd_convert(args: argparse.Namespace) -> int:
    loaded = _load_graph(args, args.input)
    if loaded.scale is None and loaded.graph.num_edges:
        raise DataError("input already holds raw opinions; nothing to convert")
    text = dump_opinion_edges(loaded.graph)
    try:
        Path(args.output).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write {args.output!r}: {exc}")
    payload = {
        "edges": loaded.graph.num_edges,
        "nodes": loaded.graph.num_nodes,
        "output": args.output,
        "scale": list(loaded.scale.fractions) if loaded.scale else [],
        "duplicates": loaded.graph.load_warnings.duplicate_edges,
        "self_loops": loaded.graph.load_warnings.self_loops,
    }
    return _emit(payload, f"wrote {loaded.graph.num_edges} opinion edges to {args.output}")


def _cmd_stats(args: argparse.Namespace) -> int:
    raw = _read_file(args.graph)
    columns = _detect_columns(raw)
    from .graph import _graph_from_records, _iter_records
    from .opinions import Opinion

    if columns == 0:
        graph = TrustGraph()
    elif columns in (3, 5):
        placeholder = Opinion(1.0, 0.0, 0.0)
        try:
            records = [
                (f[0], f[1], placeholder) for _, f in _iter_records(raw, columns)
            ]
        except ValueError as exc:
            raise DataError(str(exc))
        edges, nodes, warnings = _graph_from_records(records)
        graph = TrustGraph(edges, nodes, warnings)
    else:
        raise DataError(f"unsupported edge list: expected 3 or 5 columns, found {columns}")
    stats = graph.stats()
    payload = stats.to_dict()
    payload["duplicates"] = graph.load_warnings.duplicate_edges
    payload["self_loops"] = graph.load_warnings.self_loops
    return _emit(payload, f"{stats.num_nodes} nodes, {stats.num_edges} edges")


def _experiment_config(args: argparse.Namespace, style: EvidenceStyle | None) -> ExperimentConfig:
    lowest = args.r0
    if lowest is None:
        lowest = DEFAULT_BASE_FRACTION[style] if style else 0.3
    return ExperimentConfig(
        lambda_total=args.lam,
        base_fraction=lowest,
        depth_h=args.depth,
        algorithm=_parse_algorithm(args.algorithm),
        rng_seed=args.seed,
        num_pairs=args.pairs,
        num_ranking_seeds=getattr(args, "ranking_seeds", 100),
        jobs=_resolve_jobs(args),
    )


def _require_scaled(loaded: LoadedGraph, command: str) -> LevelScale:
    if loaded.scale is None:
        raise DataError(f"{command} requires a level edge list (3 columns) to define the scale")
    return loaded.scale


def _cmd_experiment_f1(args: argparse.Namespace) -> int:
    loaded = _load_graph(args, args.graph)
    scale = _require_scaled(loaded, "experiment-f1")
    cfg = _experiment_config(args, loaded.style)
    try:
        report = run_f1_experiment(loaded.graph, scale, cfg)
    except ValueError as exc:
        raise DataError(str(exc))
    payload = report.to_json_dict()
    summary = (
        f"{cfg.algorithm.value}: micro F1 {report.f1_micro:.4f}, "
        f"macro F1 {report.f1_macro:.4f} over {len(report.records)} pairs "
        f"in {report.elapsed_seconds:.2f}s"
    )
    return _emit(payload, summary)


def _cmd_experiment_rank(args: argparse.Namespace) -> int:
    loaded = _load_graph(args, args.graph)
    cfg = _experiment_config(args, loaded.style)
    try:
        report = run_ranking_experiment(loaded.graph, cfg)
    except ValueError as exc:
        raise DataError(str(exc))
    payload = report.to_json_dict()
    mean_tau = (
        sum(report.tau_samples) / len(report.tau_samples) if report.tau_samples else float("nan")
    )
    summary = (
        f"{cfg.algorithm.value}: mean tau {mean_tau:.4f} over "
        f"{len(report.tau_samples)} seeds in {report.elapsed_seconds:.2f}s"
    )
    return _emit(payload, summary)


def _cmd_sweep(args: argparse.Namespace) -> int:
    loaded = _load_graph(args, args.graph)
    scale = _require_scaled(loaded, "sweep")
    cfg = _experiment_config(args, loaded.style)
    try:
        lambdas = [float(x) for x in args.lambdas.split(",") if x.strip()]
        fractions = [float(x) for x in args.r0s.split(",") if x.strip()]
    except ValueError:
        raise UsageError("--lambdas and --r0s must be comma-separated numbers")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        results = parameter_sweep(loaded.graph, scale, loaded.style, lambdas, fractions, cfg)
    except ValueError as exc:
        raise DataError(str(exc))
    index = []
    for lam, fraction, report in results:
        name = f"report_lambda{lam:g}_r0{fraction:g}.json"
        (out_dir / name).write_text(report.to_json() + "\n", encoding="utf-8")
        index.append(
            {
                "lambda": lam,
                "r0": fraction,
                "f1_micro": report.f1_micro,
                "f1_macro": report.f1_macro,
                "file": str(out_dir / name),
            }
        )
    payload = {"reports": index}
    return _emit(payload, f"wrote {len(index)} reports to {out_dir}")


# -- argument parsing ----------------------------------------------------


def _add_graph_options(sub: argparse.ArgumentParser, graph_flag: str = "--graph") -> None:
    sub.add_argument(graph_flag, required=True, help="edge-list TSV path")
    sub.add_argument(
        "--style",
        help="evidence style for level files: positive-negative (pn) or positive-uncertain (pu)",
    )
    sub.add_argument("--levels", default=DEFAULT_LEVELS, help="comma-separated level names, lowest first")
    sub.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA, help="total evidence per edge")
    sub.add_argument("--r0", type=float, default=None, help="lowest level's positive fraction")


def _add_experiment_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--depth", type=int, default=DEFAULT_DEPTH, help="maximum search depth H")
    sub.add_argument("--algorithm", default="3vsl", help="3vsl, slstar, tidaltrust, eigentrust, trustrank")
    sub.add_argument("--seed", type=int, default=0, help="RNG seed for all sampling")
    sub.add_argument("--pairs", type=int, default=200, help="number of leave-one-out pairs")
    sub.add_argument("--jobs", type=int, default=None, help="worker processes (default: CPU count)")


def build_parser() -> _Parser:
    parser = _Parser(prog="trustcalc", description=__doc__)
    parser.add_argument("--version", action="version", version=f"trustcalc {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    assess_cmd = commands.add_parser("assess", help="compute one indirect trust value")
    _add_graph_options(assess_cmd)
    assess_cmd.add_argument("--from", dest="trustor", required=True, help="trustor node id")
    assess_cmd.add_argument("--to", dest="trustee", required=True, help="trustee node id")
    assess_cmd.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    assess_cmd.add_argument("--algorithm", default="3vsl")
    assess_cmd.set_defaults(func=_cmd_assess)

    convert_cmd = commands.add_parser("convert", help="materialize level TSV as opinion TSV")
    _add_graph_options(convert_cmd, "--input")
    convert_cmd.add_argument("--output", required=True, help="output opinion TSV path")
    convert_cmd.set_defaults(func=_cmd_convert)

    stats_cmd = commands.add_parser("stats", help="node/edge counts and degrees")
    stats_cmd.add_argument("--graph", required=True, help="edge-list TSV path")
    stats_cmd.set_defaults(func=_cmd_stats)

    f1_cmd = commands.add_parser("experiment-f1", help="leave-one-edge-out F1 experiment")
    _add_graph_options(f1_cmd)
    _add_experiment_options(f1_cmd)
    f1_cmd.set_defaults(func=_cmd_experiment_f1)

    rank_cmd = commands.add_parser("experiment-rank", help="neighbor-ranking tau experiment")
    _add_graph_options(rank_cmd)
    _add_experiment_options(rank_cmd)
    rank_cmd.add_argument("--ranking-seeds", type=int, default=100, help="number of seed nodes")
    rank_cmd.set_defaults(func=_cmd_experiment_rank)

    sweep_cmd = commands.add_parser("sweep", help="F1 experiment over a (lambda, r0) grid")
    _add_graph_options(sweep_cmd)
    _add_experiment_options(sweep_cmd)
    sweep_cmd.add_argument("--lambdas", default="10,20,30,40,50", help="comma-separated totals")
    sweep_cmd.add_argument("--r0s", default="0.1,0.2,0.3,0.4,0.5", help="comma-separated fractions")
    sweep_cmd.add_argument("--out-dir", required=True, help="directory for per-combination reports")
    sweep_cmd.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:  # console-script entry
    sys.exit(main())
