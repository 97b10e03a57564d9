"""Balanced graph-cut partitioning toolkit.

Cut-cost families whose normalization strength is tunable between plain
cuts and normalized/ratio cuts, exact brute-force oracles, a reweighted
Rayleigh-quotient solver for the continuous relaxation, rounding to
discrete partitions, an image-segmentation front end, and region-based
quality metrics.
"""

__version__ = "0.1.0"

from ccbcut.costs import (
    CostKind,
    PartitionK,
    bh_balance,
    bh_cost,
    bifurcation_sweep,
    brute_force_min,
    cc_balance,
    ccb_cost,
    ccb_cost_quadratic,
    cut_cost,
    multiway_cut,
    toy_graph,
)
from ccbcut.embedding import (
    ConstraintEliminator,
    SymmetricOperator,
    apply_reduced_operator,
    eigensolve_smallest,
    make_eliminator,
    reduced_operator,
    solve_weighted_step,
)
from ccbcut.graph import (
    BalanceWeights,
    Graph,
    balance_weights,
    build_graph,
    degree_vector,
    is_connected,
    laplacian_apply,
    read_edgelist,
    write_edgelist,
)
from ccbcut.imaging import (
    AffinityParams,
    LabelMap,
    degree_spread,
    lab_affinity,
    rgb_to_lab,
    segment_image,
)
from ccbcut.irrq import (
    IrrqConfig,
    IrrqResult,
    ReweightState,
    embedding_objective,
    estimate_active_pairs,
    irrq_solve,
    reweight_edges,
    select_rank,
    shrink_epsilon,
)
from ccbcut.metrics import covering, pri, voi
from ccbcut.rounding import (
    best_threshold_split,
    hierarchical_segment,
    kmeans,
    multiway_segment,
)

__all__ = [
    "AffinityParams", "BalanceWeights", "ConstraintEliminator", "CostKind",
    "Graph", "IrrqConfig", "IrrqResult", "LabelMap", "PartitionK",
    "ReweightState", "SymmetricOperator", "apply_reduced_operator",
    "balance_weights", "best_threshold_split", "bh_balance", "bh_cost",
    "bifurcation_sweep", "brute_force_min", "build_graph", "cc_balance",
    "ccb_cost", "ccb_cost_quadratic", "covering", "cut_cost",
    "degree_spread", "degree_vector", "eigensolve_smallest",
    "embedding_objective", "estimate_active_pairs", "hierarchical_segment",
    "irrq_solve", "is_connected", "kmeans", "lab_affinity",
    "laplacian_apply", "make_eliminator", "multiway_cut",
    "multiway_segment", "pri", "read_edgelist", "reduced_operator",
    "reweight_edges", "rgb_to_lab", "segment_image", "select_rank",
    "shrink_epsilon", "solve_weighted_step", "toy_graph", "voi",
    "write_edgelist",
]
