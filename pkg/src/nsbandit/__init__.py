"""Simulation and exact verification toolkit for non-stationary bandits."""

__version__ = "0.1.0"

from .agents import (
    DynamicOracle,
    FilteredGreedy,
    FilteredThompson,
    OracleProcessKind,
    SlidingWindowUCB,
    TabularPolicy,
    UniformPolicy,
    solve_bayes_optimal,
)
from .core import BanditProcess, EpisodeLog, Policy, run_batch, run_episode
from .equivalence import (
    ClassificationResult,
    are_equivalent,
    is_exchangeable,
    is_stationary,
    is_strongly_stationary,
    theorem_harness,
)
from .exact import FiniteBanditSpec, JointDist, build_history_tree, exact_law, joint_of
from .info import AlphaSpec, entropy, info_ratio, mutual_info, predictive_info, prop1_bound, prop2_bound, thm2_check
from .kernels import BACKEND
from .regret import dynamic_regret_floor, regret_exact, regret_monte_carlo, thm1_check, variation_metrics
from .reports import BoundReport, RegretReport, VariationReport
from .rng import RngSeed, derive
from .zoo import (
    FiniteDist,
    IidBernoulliSpec,
    ModulatedBernoulliSpec,
    NoiseCouplingSpec,
    make_bandit,
    make_iid,
    make_modulated,
    make_noise_coupled,
    make_strongly_stationary_surrogate,
)

__all__ = [
    "AlphaSpec", "BACKEND", "BanditProcess", "BoundReport", "ClassificationResult", "DynamicOracle",
    "EpisodeLog", "FilteredGreedy", "FilteredThompson", "FiniteBanditSpec", "FiniteDist", "IidBernoulliSpec",
    "JointDist", "ModulatedBernoulliSpec", "NoiseCouplingSpec", "OracleProcessKind", "Policy", "RegretReport",
    "RngSeed", "SlidingWindowUCB", "TabularPolicy", "UniformPolicy", "VariationReport", "are_equivalent",
    "build_history_tree", "derive", "dynamic_regret_floor", "entropy", "exact_law", "info_ratio",
    "is_exchangeable", "is_stationary", "is_strongly_stationary", "joint_of", "make_bandit", "make_iid",
    "make_modulated", "make_noise_coupled", "make_strongly_stationary_surrogate", "mutual_info",
    "predictive_info", "prop1_bound", "prop2_bound", "regret_exact", "regret_monte_carlo",
    "solve_bayes_optimal", "theorem_harness", "thm1_check", "thm2_check", "variation_metrics",
]
