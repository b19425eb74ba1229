import numpy as np
import pytest

from nsbandit import FiniteDist, ModulatedBernoulliSpec, NoiseCouplingSpec, exact_law
from nsbandit.agents import DynamicOracle, FilteredGreedy, TabularPolicy, UniformPolicy
from nsbandit.errors import BudgetError, PreconditionError
from nsbandit.exact import (
    A, H, R, Y, FilterPredictor, LawPredictor, QueryError, alpha, build_history_tree, joint_of, rows,
)


def coin_spec(na, q):
    return ModulatedBernoulliSpec.homogeneous(na, FiniteDist.uniform([0.0, 1.0]), q)


def test_single_action_leaves():
    spec = ModulatedBernoulliSpec.homogeneous(1, FiniteDist.uniform([0.2, 0.8]), 0.5)
    tree = build_history_tree(spec, UniformPolicy(1), 3)
    assert len(tree.levels[3]) == 8
    assert abs(tree.leaf_probs.sum() - 1.0) < 1e-12


def test_full_redraw_beliefs_history_free():
    spec = ModulatedBernoulliSpec.homogeneous(2, FiniteDist.uniform([0.2, 0.8]), 1.0)
    tree = build_history_tree(spec, UniformPolicy(2), 3)
    for t in range(3):
        m = tree.predicted_means(t)
        assert np.allclose(m, m[0])


def test_uniform_two_actions_two_steps():
    spec = ModulatedBernoulliSpec.homogeneous(2, FiniteDist.uniform([0.2, 0.8]), 0.5)
    tree = build_history_tree(spec, UniformPolicy(2), 2)
    assert len(tree.levels[2]) == 16
    # P((0,1),(1,0)) = 1/2 * 0.5 * 1/2 * 0.5 since action 1 is untouched
    h = ((0, 1.0), (1, 0.0))
    assert tree.levels[2].prob[tree.levels[2].index[h]] == pytest.approx(1 / 16)
    # P((0,1),(0,1)): second factor is the filtered prediction 0.59
    h = ((0, 1.0), (0, 1.0))
    assert tree.levels[2].prob[tree.levels[2].index[h]] == pytest.approx(0.25 * 0.5 * 0.59)


def test_zero_probability_branches_pruned():
    tree = build_history_tree(coin_spec(1, 0.0), UniformPolicy(1), 3)
    assert len(tree.levels[3]) == 2


@pytest.mark.parametrize("q", [0.0, 0.4, 1.0])
def test_deterministic_policy_pushforward_matches_law(q):
    spec = coin_spec(2, q)
    policy = FilteredGreedy(spec)
    tree = build_history_tree(spec, policy, 3)
    law = exact_law(spec, 3)
    for i, h in enumerate(tree.levels[3].histories):
        coords = [(t, a) for t, (a, _) in enumerate(h)]
        idx = tuple(int(r) for _, r in h)
        assert tree.levels[3].prob[i] == pytest.approx(law.marginal(coords)[idx], abs=1e-12)


def test_filter_and_law_predictors_agree():
    spec = ModulatedBernoulliSpec.homogeneous(2, FiniteDist([0.1, 0.6], [0.3, 0.7]), 0.35)
    a = build_history_tree(spec, UniformPolicy(2), 3, predictor=FilterPredictor(spec))
    b = build_history_tree(spec, UniformPolicy(2), 3, predictor=LawPredictor(exact_law(spec, 3)))
    for la, lb in zip(a.levels, b.levels):
        assert la.histories == lb.histories
        assert np.allclose(la.prob, lb.prob, atol=1e-13)
        if la.reward_probs is not None:
            assert np.allclose(la.reward_probs, lb.reward_probs, atol=1e-12)


def test_noise_spec_uses_law_predictor():
    q = FiniteDist.uniform([0.25, 0.75])
    spec = NoiseCouplingSpec("dependent", 0, 2, (q, q))
    tree = build_history_tree(spec, UniformPolicy(2), 3)
    assert abs(tree.leaf_probs.sum() - 1.0) < 1e-12


def test_budget_and_oracle_refusal():
    with pytest.raises(BudgetError):
        build_history_tree(coin_spec(2, 0.5), UniformPolicy(2), 6, budget=100)
    with pytest.raises(PreconditionError):
        build_history_tree(coin_spec(2, 0.5), DynamicOracle(2), 2)


def test_tabular_policy_missing_history():
    from nsbandit.errors import PolicyContractError

    with pytest.raises(PolicyContractError):
        build_history_tree(coin_spec(1, 0.5), TabularPolicy(1, {(): [1.0]}), 2)


class TestJointOf:
    def test_first_reward_is_fair(self):
        j = joint_of(build_history_tree(coin_spec(1, 0.5), UniformPolicy(1), 2), [R(1, 0)])
        assert j.table.tolist() == [0.5, 0.5]

    def test_first_action_uniform(self):
        j = joint_of(build_history_tree(coin_spec(2, 0.5), UniformPolicy(2), 2), [A(0)])
        assert j.table.tolist() == [0.5, 0.5]

    def test_frozen_pair_perfectly_correlated(self):
        j = joint_of(build_history_tree(coin_spec(1, 0.0), UniformPolicy(1), 2), [R(1, 0), R(2, 0)])
        assert j.table.tolist() == [[0.5, 0.0], [0.0, 0.5]]

    def test_observed_reward_matches_coordinate(self):
        tree = build_history_tree(coin_spec(2, 0.5), UniformPolicy(2), 2)
        j = joint_of(tree, [A(1), Y(1), R(2, 0), R(2, 1)])
        for a in range(2):
            for y in (0.0, 1.0):
                mine = {0: "R_2,0", 1: "R_2,1"}[a]
                assert j.prob(**{"A_1": a, "Y_1": y, mine: 1.0 - y}) == 0.0

    def test_history_labels_and_rows(self):
        tree = build_history_tree(coin_spec(1, 0.3), UniformPolicy(1), 2)
        j = joint_of(tree, [H(1), rows(1, 3), alpha(2)])
        assert j.labels[0] == [((0, 0.0),), ((0, 1.0),)]
        assert j.table.shape[1] == 8

    def test_malformed_queries(self):
        tree = build_history_tree(coin_spec(1, 0.3), UniformPolicy(1), 2)
        with pytest.raises(QueryError):
            joint_of(tree, [A(2)])
        with pytest.raises(QueryError):
            joint_of(tree, [rows(3, 2)])
        with pytest.raises(QueryError):
            joint_of(tree, [A(0)]).marginal(["A_5"])

    def test_marginal_condition_pushforward(self):
        tree = build_history_tree(coin_spec(1, 0.0), UniformPolicy(1), 3)
        j = joint_of(tree, [R(1, 0), R(2, 0), R(3, 0)])
        c = j.condition("R_1,0", 1.0)
        assert c.prob(**{"R_3,0": 1.0}) == 1.0
        s = j.pushforward("R_2,0", lambda v: "hi" if v else "lo", "lvl")
        assert s.marginal(["lvl"]).table.tolist() == [0.5, 0.5]
