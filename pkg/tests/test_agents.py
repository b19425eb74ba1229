import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsbandit import FiniteDist, IidBernoulliSpec, ModulatedBernoulliSpec, NoiseCouplingSpec
from nsbandit.agents import (
    DynamicOracle, FilteredGreedy, FilteredThompson, OracleProcessKind, SlidingWindowUCB, UniformPolicy,
    argmax_lowest, make_agent, solve_bayes_optimal,
)
from nsbandit.core import run_episode
from nsbandit.errors import PolicyContractError, UnsupportedError
from nsbandit.exact import build_history_tree
from nsbandit.regret import regret_exact
from nsbandit.rng import RngSeed
from nsbandit.zoo import make_bandit


def coin_spec(na, q):
    return ModulatedBernoulliSpec.homogeneous(na, FiniteDist.uniform([0.0, 1.0]), q)


def test_uniform():
    assert UniformPolicy(2).action_distribution(((0, 1.0),)).tolist() == [0.5, 0.5]
    assert UniformPolicy(1).action_distribution(()).tolist() == [1.0]


def test_uniform_sampled_frequencies(two_arm):
    log = run_episode(make_bandit(two_arm), UniformPolicy(2), 10_000, RngSeed(3, 0))
    frac = np.mean(np.asarray(log.actions) == 0)
    assert abs(frac - 0.5) < 3 * 0.5 / 100


def test_greedy_tie_and_update(two_arm):
    g = FilteredGreedy(two_arm)
    assert g.action_distribution(()).tolist() == [1.0, 0.0]
    assert g.action_distribution(((1, 1.0),)).tolist() == [0.0, 1.0]
    assert g.predicted_means(((1, 1.0),)).tolist() == [0.5, 0.75]


def test_greedy_full_redraw_constant_action():
    spec = ModulatedBernoulliSpec(2, (FiniteDist.uniform([0.1, 0.5]), FiniteDist.uniform([0.2, 0.6])), (1.0, 1.0))
    tree = build_history_tree(spec, FilteredGreedy(spec), 4)
    for lvl in tree.levels[:-1]:
        assert np.all(lvl.policy[:, 1] == 1.0)


def test_greedy_rejects_reward_outside_alphabet(two_arm):
    with pytest.raises(PolicyContractError):
        FilteredGreedy(two_arm).action_distribution(((0, 0.5),))


def test_greedy_needs_horizon_for_noise_spec():
    spec = NoiseCouplingSpec("dependent", 0, 2, (FiniteDist.uniform([0.25, 0.75]),) * 2)
    with pytest.raises(UnsupportedError):
        FilteredGreedy(spec)
    assert FilteredGreedy(spec, 3).action_distribution(()).sum() == 1.0


def test_thompson_collision_split():
    assert FilteredThompson(coin_spec(2, 1.0)).action_distribution(()).tolist() == [0.5, 0.5]
    assert FilteredThompson(coin_spec(1, 0.5)).action_distribution(()).tolist() == [1.0]


def test_thompson_exact_win_probability():
    spec = ModulatedBernoulliSpec(2, (FiniteDist([0.2, 0.8], [0.5, 0.5]), FiniteDist.point(0.5)), (0.5, 0.5))
    assert FilteredThompson(spec).action_distribution(()).tolist() == [0.5, 0.5]
    spec = ModulatedBernoulliSpec(2, (FiniteDist([0.2, 0.8], [0.3, 0.7]), FiniteDist.point(0.5)), (0.5, 0.5))
    assert np.allclose(FilteredThompson(spec).action_distribution(()), [0.7, 0.3])


@given(st.lists(st.floats(0, 1), min_size=2, max_size=3))
def test_greedy_equals_thompson_on_point_masses(thetas):
    spec = ModulatedBernoulliSpec(len(thetas), tuple(FiniteDist.point(t) for t in thetas), (0.5,) * len(thetas))
    g = FilteredGreedy(spec).action_distribution(())
    th = FilteredThompson(spec).action_distribution(())
    ties = np.sum(np.asarray(thetas) >= max(thetas) - 1e-12)
    if ties == 1:
        assert np.array_equal(g, th)
    else:
        assert np.isclose(th.max(), 1 / ties)


def test_bayes_optimal_full_redraw_value():
    spec = ModulatedBernoulliSpec(2, (FiniteDist.uniform([0.1, 0.5]), FiniteDist.uniform([0.2, 0.6])), (1.0, 1.0))
    _, value = solve_bayes_optimal(spec, 4)
    assert value == pytest.approx(4 * 0.4, abs=1e-12)


def test_bayes_optimal_one_step_is_greedy(two_arm):
    pol, _ = solve_bayes_optimal(two_arm, 1)
    assert np.array_equal(pol.action_distribution(()), FilteredGreedy(two_arm).action_distribution(()))


def test_bayes_optimal_beats_greedy_frozen():
    spec = coin_spec(2, 0.0)
    _, value = solve_bayes_optimal(spec, 3)
    greedy = build_history_tree(spec, FilteredGreedy(spec), 3).value
    assert value >= greedy - 1e-12


def test_bayes_optimal_value_matches_its_tree(two_arm):
    pol, value = solve_bayes_optimal(two_arm, 4)
    assert build_history_tree(two_arm, pol, 4).value == pytest.approx(value, abs=1e-12)


@pytest.mark.parametrize("spec", [
    ModulatedBernoulliSpec.homogeneous(2, FiniteDist.uniform([0.0, 1.0]), 0.5),
    ModulatedBernoulliSpec(2, (FiniteDist([0.1, 0.9], [0.6, 0.4]), FiniteDist.uniform([0.3, 0.6])), (0.2, 0.7)),
    IidBernoulliSpec(2, (FiniteDist.uniform([0.2, 0.7]), FiniteDist.point(0.45))),
    NoiseCouplingSpec("dependent", 1, 2, (FiniteDist.uniform([0.25, 0.75]), FiniteDist.uniform([0.1, 0.6]))),
])
def test_optimality_certificate(spec):
    horizon = 4
    _, value = solve_bayes_optimal(spec, horizon)
    others = [UniformPolicy(2), FilteredGreedy(spec, horizon), SlidingWindowUCB(2, window=3)]
    if isinstance(spec, (ModulatedBernoulliSpec, IidBernoulliSpec)):
        others.append(FilteredThompson(spec))
    for pol in others:
        assert build_history_tree(spec, pol, horizon).value <= value + 1e-12


def test_dynamic_oracle():
    o = DynamicOracle(2)
    assert o.action_distribution((), np.array([0.2, 0.9])).tolist() == [0.0, 1.0]
    assert o.action_distribution((), np.array([0.5, 0.5])).tolist() == [1.0, 0.0]
    with pytest.raises(PolicyContractError):
        o.action_distribution(())
    rep = regret_exact(coin_spec(2, 0.5), o, 4, "DynamicTheta")
    assert np.all(rep.per_step == 0.0)


def test_argmax_lowest_tolerance():
    assert argmax_lowest([0.3, 0.3 + 1e-13, 0.1]) == 0
    assert argmax_lowest([0.3, 0.3 + 1e-9]) == 1


def test_make_agent_and_kinds(two_arm):
    assert isinstance(make_agent("filteredThompson", two_arm), FilteredThompson)
    assert len(make_agent("bayesOptimal", two_arm, 2)) > 0
    with pytest.raises(ValueError):
        make_agent("epsilonGreedy", two_arm)
    assert OracleProcessKind.parse("PAST_REWARDS") is OracleProcessKind.PAST_REWARDS
    with pytest.raises(ValueError):
        OracleProcessKind.parse("Nope")
