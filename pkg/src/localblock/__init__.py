"""Local Blocking (LB) link prediction with baseline local indices,
missing/spurious-link AUC evaluation and correlation analyses."""

__version__ = "0.1.0"

from .graph import (
    DomainError,
    EdgeListOptions,
    EmptyGraphError,
    Graph,
    GraphParseError,
    bfs_distances,
    closed_neighborhood,
    neighbors,
    parse_edge_list,
    read_edge_list,
)
from .metrics import TopologyStats, local_clustering, topology_stats
from .predictors import (
    CapacityError,
    PredictorId,
    ScoreTable,
    aa_score,
    block_density,
    cn_score,
    inter_block_density,
    inter_block_edges,
    lb_score,
    pa_score,
    ra_score,
    score_all_pairs,
    score_matrix,
)
from .evaluation import (
    AucResult,
    EvalSplit,
    ExperimentConfig,
    add_spurious,
    auc,
    run_experiment,
    split_missing,
)
from .analysis import CorrelationReport, PairFilter, distance_correlation, score_correlation
