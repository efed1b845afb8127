"""Trust assessment over directed trust graphs.

Evidence-based trust opinions, propagation and fusion operators that
conserve evidence, a recursive engine for indirect trust in arbitrary
topologies (cycles included), classic baselines, and the experiment
harness used to compare them.
"""

from .baselines import RankScores, UnreachableError, eigen_trust, tidal_trust, trust_rank
from .engine import (
    AssessQuery,
    AssessTrace,
    GraphTooLargeError,
    assess,
    assess_sl,
    assess_with_trace,
    oracle_assess,
)
from .graph import (
    EdgeListFormatError,
    EvidenceStyle,
    GraphStats,
    LevelScale,
    LoadWarnings,
    MissingEdgeError,
    TrustGraph,
    UnknownNodeError,
    build_scale,
    dump_edge_list,
    dump_opinion_edges,
    load_edge_list,
    load_opinion_edges,
)
from .harness import (
    Algorithm,
    EvalReport,
    ExperimentConfig,
    InsufficientSamplesError,
    PairRecord,
    fit_error_distribution,
    parameter_sweep,
    run_f1_experiment,
    run_ranking_experiment,
)
from .opinions import (
    CollapsedOpinion,
    Opinion,
    VacuousOpinionError,
    certainty,
    collapse,
    combine,
    combine_many,
    discount,
    expected_belief,
    expected_probabilities,
)
from .sl import SlOpinion, sl_combine, sl_discount, sl_expected_belief

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "AssessQuery",
    "AssessTrace",
    "CollapsedOpinion",
    "EdgeListFormatError",
    "EvalReport",
    "EvidenceStyle",
    "ExperimentConfig",
    "GraphStats",
    "GraphTooLargeError",
    "InsufficientSamplesError",
    "LevelScale",
    "LoadWarnings",
    "MissingEdgeError",
    "Opinion",
    "PairRecord",
    "RankScores",
    "SlOpinion",
    "TrustGraph",
    "UnknownNodeError",
    "UnreachableError",
    "VacuousOpinionError",
    "assess",
    "assess_sl",
    "assess_with_trace",
    "build_scale",
    "certainty",
    "collapse",
    "combine",
    "combine_many",
    "discount",
    "dump_edge_list",
    "dump_opinion_edges",
    "eigen_trust",
    "expected_belief",
    "expected_probabilities",
    "fit_error_distribution",
    "load_edge_list",
    "load_opinion_edges",
    "oracle_assess",
    "parameter_sweep",
    "run_f1_experiment",
    "run_ranking_experiment",
    "sl_combine",
    "sl_discount",
    "sl_expected_belief",
    "tidal_trust",
    "trust_rank",
]
