"""Exact laws, filtering and history-tree enumeration."""
from .filtering import (
    BeliefState,
    expected_max_latent,
    filter_row,
    filter_step,
    initial_belief,
    latent_law,
    latent_marginal,
    predicted_mean,
)
from .joint import JointDist, QueryError
from .law import BINARY, DEFAULT_LAW_BUDGET, FiniteBandit, FiniteBanditSpec, exact_law
from .tree import (
    DEFAULT_TREE_BUDGET,
    FilterPredictor,
    HistoryTree,
    LawPredictor,
    Var,
    A,
    H,
    R,
    Y,
    alpha,
    build_history_tree,
    enumerate_trajectories,
    joint_of,
    make_predictor,
    rows,
)

__all__ = [
    "A", "BINARY", "BeliefState", "DEFAULT_LAW_BUDGET", "DEFAULT_TREE_BUDGET", "FilterPredictor",
    "FiniteBandit", "FiniteBanditSpec", "H", "HistoryTree", "JointDist", "LawPredictor", "QueryError",
    "R", "Var", "Y", "alpha", "build_history_tree", "enumerate_trajectories", "exact_law",
    "expected_max_latent", "filter_row", "filter_step", "initial_belief", "joint_of", "latent_law",
    "latent_marginal", "make_predictor", "predicted_mean", "rows",
]
