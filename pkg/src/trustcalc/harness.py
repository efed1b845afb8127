"""Experiment protocols: leave-one-edge-out F1, error fits, rank correlation.

The two experiment drivers follow the same leave-one-out discipline:
pick an existing edge (or a seed's out-neighborhood), remove one edge
at a time, recompute the removed relation with the configured
algorithm, and compare against the direct relation that was removed.

    run_f1_experiment       predicted values are rounded to the nearest
                            scale fraction and scored as a multi-class
                            confusion matrix with micro/macro F1; the
                            signed value errors are kept and summarized
                            by a normal fit.
    run_ranking_experiment  a seed's neighbors are re-ranked from the
                            recomputed values and compared to the
                            direct-opinion ranking with Kendall's tau-b.

Sampling is driven entirely by the configured RNG seed, so identical
configurations reproduce identical reports.  Edge removal is purely
functional; the input graph is never modified.
"""

from __future__ import annotations

import enum
import json
import math
import statistics
import time
from concurrent import futures
from dataclasses import dataclass, field, replace
from functools import partial
from random import Random
from typing import Callable, Iterable, Sequence

from scipy import stats as _scipy_stats

from . import baselines as _baselines
from .engine import AssessQuery, assess, assess_sl
from .graph import EvidenceStyle, LevelScale, TrustGraph, build_scale
from .opinions import Opinion, expected_belief
from .sl import SlOpinion, sl_expected_belief

__all__ = [
    "Algorithm",
    "EvalReport",
    "ExperimentConfig",
    "InsufficientSamplesError",
    "PairRecord",
    "confusion_matrix",
    "eligible_edges",
    "eligible_ranking_seeds",
    "f1_scores",
    "fit_error_distribution",
    "kendall_tau",
    "parameter_sweep",
    "run_f1_experiment",
    "run_ranking_experiment",
]


class InsufficientSamplesError(ValueError):
    """Not enough eligible edges or seeds for the requested sample size."""


class Algorithm(enum.Enum):
    """Which algorithm produces the recomputed trust value."""

    AT = "3vsl"
    SLSTAR = "slstar"
    TT = "tidaltrust"
    ET = "eigentrust"
    TR = "trustrank"

    @classmethod
    def parse(cls, token: str) -> "Algorithm":
        aliases = {
            "3vsl": cls.AT,
            "at": cls.AT,
            "sl": cls.SLSTAR,
            "slstar": cls.SLSTAR,
            "sl*": cls.SLSTAR,
            "tt": cls.TT,
            "tidaltrust": cls.TT,
            "et": cls.ET,
            "eigentrust": cls.ET,
            "tr": cls.TR,
            "trustrank": cls.TR,
        }
        try:
            return aliases[token.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown algorithm {token!r}") from None


#: Algorithms that compute an absolute trust value for a single target.
_ABSOLUTE = (Algorithm.AT, Algorithm.SLSTAR, Algorithm.TT)


@dataclass(frozen=True)
class ExperimentConfig:
    """Knobs shared by the experiment drivers.

    `lambda_total` is the per-edge total evidence and `base_fraction`
    the lowest level's positive-evidence share: the two dataset
    transformation parameters swept in the accuracy experiments.
    """

    lambda_total: float = 30.0
    base_fraction: float = 0.3
    depth_h: int = 3
    algorithm: Algorithm = Algorithm.AT
    rng_seed: int = 0
    num_pairs: int = 200
    num_ranking_seeds: int = 100
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.num_pairs < 1:
            raise ValueError("num_pairs must be >= 1")
        if self.num_ranking_seeds < 1:
            raise ValueError("num_ranking_seeds must be >= 1")
        if not self.lambda_total > 0.0:
            raise ValueError("lambda_total must be positive")
        if not 0.0 < self.base_fraction < 0.9:
            raise ValueError("base_fraction must lie in (0, 0.9)")
        if self.depth_h < 1:
            raise ValueError("depth_h must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass(frozen=True)
class PairRecord:
    """One leave-one-out prediction."""

    trustor: str
    trustee: str
    truth_level: int
    predicted_level: int
    truth_value: float
    predicted_value: float


@dataclass
class EvalReport:
    """Results of one experiment run.

    `elapsed_seconds` is informational and deliberately excluded from
    the canonical JSON so that reports are byte-identical across runs
    with the same seed.
    """

    algorithm: Algorithm
    lambda_total: float
    base_fraction: float
    depth_h: int
    rng_seed: int
    records: list[PairRecord] = field(default_factory=list)
    confusion: list[list[int]] | None = None
    f1_micro: float | None = None
    f1_macro: float | None = None
    errors: list[float] = field(default_factory=list)
    error_mean: float | None = None
    error_std: float | None = None
    tau_samples: list[float] = field(default_factory=list)
    tau_skipped_ties: int = 0
    elapsed_seconds: float = 0.0

    def tau_cdf(self) -> list[tuple[float, float]]:
        """Empirical CDF of the tau samples as (tau, fraction <= tau)."""
        ordered = sorted(self.tau_samples)
        n = len(ordered)
        return [(t, (i + 1) / n) for i, t in enumerate(ordered)]

    def to_json_dict(self) -> dict:
        data: dict = {
            "algorithm": self.algorithm.value,
            "lambda": self.lambda_total,
            "base_fraction": self.base_fraction,
            "depth_h": self.depth_h,
            "seed": self.rng_seed,
        }
        if self.records:
            data["pairs"] = [
                {
                    "trustor": r.trustor,
                    "trustee": r.trustee,
                    "truth_level": r.truth_level,
                    "predicted_level": r.predicted_level,
                    "truth_value": r.truth_value,
                    "predicted_value": r.predicted_value,
                }
                for r in self.records
            ]
        if self.confusion is not None:
            data["confusion"] = self.confusion
            data["f1_micro"] = self.f1_micro
            data["f1_macro"] = self.f1_macro
        if self.errors:
            data["errors"] = self.errors
            data["error_mean"] = self.error_mean
            data["error_std"] = self.error_std
        if self.tau_samples or self.tau_skipped_ties:
            data["tau_samples"] = self.tau_samples
            data["tau_cdf"] = [[t, f] for t, f in self.tau_cdf()]
            data["tau_skipped_ties"] = self.tau_skipped_ties
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    def errors_csv(self) -> str:
        return "error\n" + "".join(f"{e!r}\n" for e in self.errors)

    def tau_csv(self) -> str:
        return "tau\n" + "".join(f"{t!r}\n" for t in self.tau_samples)


# -- metric helpers ----------------------------------------------------


def confusion_matrix(
    truth: Sequence[int], predicted: Sequence[int], num_levels: int
) -> list[list[int]]:
    """num_levels × num_levels counts, rows = truth, columns = predicted."""
    if len(truth) != len(predicted):
        raise ValueError("truth and predictions must align")
    matrix = [[0] * num_levels for _ in range(num_levels)]
    for t, p in zip(truth, predicted):
        matrix[t][p] += 1
    return matrix


def f1_scores(matrix: Sequence[Sequence[int]]) -> tuple[float, float]:
    """(micro, macro) F1 of a confusion matrix.

    Micro-averaged F1 over single-label classes equals accuracy.  The
    macro average runs over classes that occur in the truth or the
    predictions; a class missing from both carries no information.
    """
    n = len(matrix)
    total = sum(sum(row) for row in matrix)
    if total == 0:
        raise ValueError("empty confusion matrix")
    diagonal = sum(matrix[i][i] for i in range(n))
    micro = diagonal / total

    per_class: list[float] = []
    for k in range(n):
        support = sum(matrix[k])
        predicted = sum(matrix[i][k] for i in range(n))
        if support == 0 and predicted == 0:
            continue
        if support == 0 or predicted == 0:
            per_class.append(0.0)
            continue
        recall = matrix[k][k] / support
        precision = matrix[k][k] / predicted
        per_class.append(
            0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
        )
    macro = sum(per_class) / len(per_class) if per_class else 0.0
    return micro, macro


def fit_error_distribution(errors: Sequence[float]) -> tuple[float, float]:
    """Sample mean and sample standard deviation (n − 1 denominator)."""
    if len(errors) < 2:
        raise ValueError("need at least two error samples to fit")
    return statistics.fmean(errors), statistics.stdev(errors)


def kendall_tau(truth: Sequence[float], predicted: Sequence[float]) -> float:
    """Kendall's tau-b between two aligned value sequences.

    NaN (every pair tied in one of the sequences) is returned as-is for
    the caller to handle.
    """
    result = _scipy_stats.kendalltau(list(truth), list(predicted))
    return float(result.statistic)


# -- eligibility and prediction ----------------------------------------


def eligible_edges(graph: TrustGraph, depth_h: int) -> list[tuple[str, str]]:
    """Edges (u, v) still connected u→v within depth_h after their removal."""
    return [
        (src, dst)
        for src, dst, _ in graph.edges()
        if graph.path_exists(src, dst, depth_h, skip_edge=(src, dst))
    ]


def eligible_ranking_seeds(
    graph: TrustGraph, depth_h: int, min_neighbors: int = 3
) -> dict[str, list[str]]:
    """Seeds with enough out-neighbors reachable by an alternative path.

    Returns seed → sorted list of its eligible neighbors.
    """
    seeds: dict[str, list[str]] = {}
    for node in sorted(graph.nodes):
        neighbors = [
            succ
            for succ in graph.successors(node)
            if graph.path_exists(node, succ, depth_h, skip_edge=(node, succ))
        ]
        if len(neighbors) >= min_neighbors:
            seeds[node] = neighbors
    return seeds


def _direct_value(edge: Opinion, algorithm: Algorithm) -> float:
    """The ground-truth scalar for a direct edge under an algorithm's value scale."""
    if algorithm is Algorithm.AT:
        return expected_belief(edge)
    if algorithm is Algorithm.SLSTAR:
        return sl_expected_belief(SlOpinion(edge.positive, edge.negative, edge.base_rate))
    return _baselines.positive_share(edge)


def _predict_absolute(
    pair: tuple[str, str],
    graph: TrustGraph,
    algorithm: Algorithm,
    depth_h: int,
) -> float:
    """Recompute the trust value of `pair` after removing its direct edge."""
    trustor, trustee = pair
    reduced = graph.remove_edge(trustor, trustee)
    if algorithm is Algorithm.AT:
        return expected_belief(assess(reduced, AssessQuery(trustor, trustee, depth_h)))
    if algorithm is Algorithm.SLSTAR:
        return sl_expected_belief(assess_sl(reduced, AssessQuery(trustor, trustee, depth_h)))
    if algorithm is Algorithm.TT:
        return _baselines.tidal_trust(reduced, trustor, trustee, max_depth=depth_h)
    raise ValueError(
        f"{algorithm.value} ranks relative trust and cannot predict absolute values"
    )


def _map_jobs(fn: Callable, items: Sequence, jobs: int) -> list:
    """Order-preserving map, optionally across processes."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with futures.ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


# -- experiment drivers -------------------------------------------------


def run_f1_experiment(
    graph: TrustGraph, scale: LevelScale, cfg: ExperimentConfig
) -> EvalReport:
    """Leave-one-edge-out trust prediction scored as multi-class F1.

    Samples `cfg.num_pairs` eligible edges without replacement, removes
    each, recomputes the trust value with `cfg.algorithm`, and rounds
    both truth and prediction onto the level scale (prediction by
    nearest fraction, ties toward the lower level; truth by the edge's
    own level).  Scores the level confusion with micro and macro F1 and
    fits a normal distribution to the signed value errors.

    Raises:
        InsufficientSamplesError: fewer eligible edges than num_pairs.
        ValueError: a ranking-only algorithm was configured.
    """
    if cfg.algorithm not in _ABSOLUTE:
        raise ValueError(
            f"{cfg.algorithm.value} ranks relative trust; use run_ranking_experiment"
        )
    started = time.perf_counter()
    eligible = eligible_edges(graph, cfg.depth_h)
    if len(eligible) < cfg.num_pairs:
        raise InsufficientSamplesError(
            f"need {cfg.num_pairs} eligible pairs, found {len(eligible)} "
            f"(short by {cfg.num_pairs - len(eligible)})"
        )
    pairs = Random(cfg.rng_seed).sample(eligible, cfg.num_pairs)

    predictor = partial(
        _predict_absolute, graph=graph, algorithm=cfg.algorithm, depth_h=cfg.depth_h
    )
    predictions = _map_jobs(predictor, pairs, cfg.jobs)

    report = EvalReport(
        algorithm=cfg.algorithm,
        lambda_total=cfg.lambda_total,
        base_fraction=cfg.base_fraction,
        depth_h=cfg.depth_h,
        rng_seed=cfg.rng_seed,
    )
    truth_levels: list[int] = []
    predicted_levels: list[int] = []
    for (trustor, trustee), predicted_value in zip(pairs, predictions):
        edge = graph.edge(trustor, trustee)
        truth_value = _direct_value(edge, cfg.algorithm)
        truth_level = scale.nearest_level(_baselines.positive_share(edge))
        predicted_level = scale.nearest_level(predicted_value)
        truth_levels.append(truth_level)
        predicted_levels.append(predicted_level)
        report.records.append(
            PairRecord(trustor, trustee, truth_level, predicted_level, truth_value, predicted_value)
        )
        report.errors.append(predicted_value - truth_value)

    report.confusion = confusion_matrix(truth_levels, predicted_levels, len(scale))
    report.f1_micro, report.f1_macro = f1_scores(report.confusion)
    if len(report.errors) >= 2:
        report.error_mean, report.error_std = fit_error_distribution(report.errors)
    report.elapsed_seconds = time.perf_counter() - started
    return report


def _rank_scores_for_neighbor(
    graph: TrustGraph,
    seed: str,
    neighbor: str,
    cfg: ExperimentConfig,
) -> float:
    """The neighbor's recomputed score with its direct edge removed."""
    if cfg.algorithm in _ABSOLUTE:
        return _predict_absolute((seed, neighbor), graph, cfg.algorithm, cfg.depth_h)
    reduced = graph.remove_edge(seed, neighbor)
    if cfg.algorithm is Algorithm.ET:
        scores = _baselines.eigen_trust(reduced, pretrusted=[seed])
    else:
        scores = _baselines.trust_rank(reduced, seeds=[seed])
    return scores[neighbor]


def run_ranking_experiment(
    graph: TrustGraph, cfg: ExperimentConfig
) -> EvalReport:
    """Neighbor re-ranking scored with Kendall's tau-b.

    For each sampled seed, the ground truth orders its eligible
    out-neighbors by the direct edges' expected beliefs.  Each
    neighbor's trust is then recomputed with its direct edge removed,
    and the tau-b correlation between recomputed and direct values is
    one sample.  Seed neighborhoods whose direct values are all tied
    have no defined correlation; they are skipped and counted.

    Raises:
        InsufficientSamplesError: fewer eligible seeds than requested.
    """
    started = time.perf_counter()
    seed_pool = eligible_ranking_seeds(graph, cfg.depth_h)
    if len(seed_pool) < cfg.num_ranking_seeds:
        raise InsufficientSamplesError(
            f"need {cfg.num_ranking_seeds} eligible seeds, found {len(seed_pool)} "
            f"(short by {cfg.num_ranking_seeds - len(seed_pool)})"
        )
    chosen = Random(cfg.rng_seed).sample(sorted(seed_pool), cfg.num_ranking_seeds)

    report = EvalReport(
        algorithm=cfg.algorithm,
        lambda_total=cfg.lambda_total,
        base_fraction=cfg.base_fraction,
        depth_h=cfg.depth_h,
        rng_seed=cfg.rng_seed,
    )
    worker = partial(_tau_worker, graph=graph, seed_pool=seed_pool, cfg=cfg)
    for tau in _map_jobs(worker, chosen, cfg.jobs):
        if math.isnan(tau):
            report.tau_skipped_ties += 1
        else:
            report.tau_samples.append(tau)
    report.elapsed_seconds = time.perf_counter() - started
    return report


def _tau_worker(
    seed: str,
    graph: TrustGraph,
    seed_pool: dict[str, list[str]],
    cfg: ExperimentConfig,
) -> float:
    neighbors = seed_pool[seed]
    truth = [expected_belief(graph.edge(seed, v)) for v in neighbors]
    predicted = [_rank_scores_for_neighbor(graph, seed, v, cfg) for v in neighbors]
    return kendall_tau(truth, predicted)


def parameter_sweep(
    graph: TrustGraph,
    scale: LevelScale,
    style: EvidenceStyle,
    lambdas: Iterable[float],
    base_fractions: Iterable[float],
    cfg: ExperimentConfig,
) -> list[tuple[float, float, EvalReport]]:
    """Run the F1 experiment over the (λ, r₀) parameter grid.

    Every combination rebuilds the edge opinions from the graph's
    recovered level assignment (exact for graphs produced by the
    loader) and a fresh scale interpolated from the observed level
    frequencies.  The RNG seed is shared, and eligibility depends only
    on topology, so all combinations score the same sampled pairs.
    """
    lambda_list = [float(x) for x in lambdas]
    fraction_list = [float(x) for x in base_fractions]
    if not lambda_list or not fraction_list:
        raise ValueError("sweep needs at least one lambda and one base fraction")

    levels = {
        (src, dst): scale.nearest_level(_baselines.positive_share(op))
        for src, dst, op in graph.edges()
    }
    counts = [0] * len(scale)
    for level in levels.values():
        counts[level] += 1
    highest = scale.fractions[-1]

    results: list[tuple[float, float, EvalReport]] = []
    for fraction in fraction_list:
        swept_scale = build_scale(counts, fraction, highest, scale.level_names)
        for lam in lambda_list:
            edges = {
                pair: style.opinion_for_fraction(swept_scale.fractions[level], lam)
                for pair, level in levels.items()
            }
            swept_graph = TrustGraph(edges, graph.nodes)
            swept_cfg = replace(cfg, lambda_total=lam, base_fraction=fraction)
            results.append(
                (lam, fraction, run_f1_experiment(swept_graph, swept_scale, swept_cfg))
            )
    return results
