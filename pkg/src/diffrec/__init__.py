"""Diffusion-based recommendation on bipartite user-object networks.

The library covers the classic physics-inspired kernel family (mass
diffusion, heat conduction, their hybrids, balanced and preferential
variants), reproducible dataset splitting, ranking-based evaluation, and
parameter sweep tooling. ``DiffusionRecommender`` wraps the same machinery
in a scikit-learn style estimator.
"""

from .errors import (ColdStartError, EmptyDatasetError, EmptyEvaluationError,
                     EmptyGraphError, EmptySweepError, OracleCapError,
                     SplitCorruptionError, SplitValidationError)
from .graph import BipartiteGraph, as_link_array, build_graph, sparsity
from .datasets import (FieldLayout, IngestResult, InteractionRecord, SplitDataset,
                       SplitInfo, ingest, load_split, save_split, split)
from .kernels import (DegreeKernel, Kernel, KernelScorer, PreferentialKernel,
                      PropagationWeights, RecommendationList, ScoreVector,
                      balanced_diffusion, biased_heat_conduction, degree_power,
                      dense_transfer_matrix, heat_conduction, hybrid,
                      kernel_label, kernel_params, mass_diffusion,
                      preferential_diffusion, propagation_weights, recommend,
                      resolve_kernel, score_user)
from .metrics import (DegreeBin, DegreeBinCurve, EvaluationResult, LinkRank,
                      MetricsReport, RankingResult, degree_binned_ranking_score,
                      evaluate_kernel, hamming_distance, precision_enhancement,
                      ranking_score, self_information)
from .experiment import (ComparisonReport, ComparisonRow, GridPlan, GridResult,
                         SweepPlan, SweepPoint, compare_algorithms, find_optimal,
                         run_grid, run_sweep)
from .estimator import DiffusionRecommender

__version__ = "0.1.0"

__all__ = [
    "BipartiteGraph", "build_graph", "as_link_array", "sparsity",
    "FieldLayout", "InteractionRecord", "IngestResult", "ingest",
    "SplitDataset", "SplitInfo", "split", "save_split", "load_split",
    "Kernel", "DegreeKernel", "PreferentialKernel", "KernelScorer",
    "PropagationWeights", "ScoreVector", "RecommendationList",
    "mass_diffusion", "heat_conduction", "hybrid", "biased_heat_conduction",
    "balanced_diffusion", "preferential_diffusion", "resolve_kernel",
    "kernel_label", "kernel_params", "degree_power", "propagation_weights",
    "score_user", "dense_transfer_matrix", "recommend",
    "LinkRank", "RankingResult", "ranking_score", "precision_enhancement",
    "hamming_distance", "self_information", "DegreeBin", "DegreeBinCurve",
    "degree_binned_ranking_score", "MetricsReport", "EvaluationResult",
    "evaluate_kernel",
    "SweepPlan", "SweepPoint", "run_sweep", "find_optimal",
    "GridPlan", "GridResult", "run_grid",
    "ComparisonRow", "ComparisonReport", "compare_algorithms",
    "DiffusionRecommender",
    "ColdStartError", "EmptyDatasetError", "EmptyEvaluationError",
    "EmptyGraphError", "EmptySweepError", "OracleCapError",
    "SplitCorruptionError", "SplitValidationError",
]
