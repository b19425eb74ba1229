import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nsbandit import FiniteDist, IidBernoulliSpec, ModulatedBernoulliSpec, NoiseCouplingSpec, exact_law
from nsbandit.agents import DynamicOracle, FilteredGreedy, FilteredThompson, UniformPolicy
from nsbandit.errors import NumericalError, PreconditionError, UnsupportedError
from nsbandit.exact import JointDist, QueryError, build_history_tree
from nsbandit.info import (
    AlphaSpec, InfoQuery, _clamp, cmi_table, entropy, info_ratio, information_gain_efficient,
    information_gain_joint, mutual_info, predictive_info, prop1_bound, prop2_bound, ratio,
    telescoping_check, thm2_check,
)

from oracles import brute_force_info_gain, mi_from_samples

LN2 = math.log(2)


def coin_spec(na, q):
    return ModulatedBernoulliSpec.homogeneous(na, FiniteDist.uniform([0.0, 1.0]), q)


def test_entropy_examples():
    assert entropy(FiniteDist.uniform([0.0, 1.0])) == pytest.approx(LN2)
    assert entropy(FiniteDist.point(0.3)) == 0.0
    assert entropy(np.full(4, 0.25)) == pytest.approx(math.log(4))


def test_mutual_info_examples():
    indep = JointDist(["X", "Y"], np.outer([0.3, 0.7], [0.6, 0.4]))
    assert mutual_info(indep, ["X"], ["Y"]) == pytest.approx(0.0, abs=1e-15)
    same = JointDist(["X", "Y"], np.diag([0.2, 0.3, 0.5]))
    assert mutual_info(InfoQuery(same, "X", "Y")) == pytest.approx(entropy([0.2, 0.3, 0.5]))
    with pytest.raises(QueryError):
        mutual_info(same, ["X"], ["Z"])


def test_pair_law_against_simulation():
    p, q = np.array([0.5, 0.5]), 0.5
    pair = p[:, None] * ((1 - q) * np.eye(2) + q * p[None, :])
    exact = mutual_info(JointDist(["a", "b"], pair), ["a"], ["b"])
    rng = np.random.default_rng(2024)
    n = 2_000_000
    x = rng.integers(0, 2, n)
    y = np.where(rng.random(n) < q, rng.integers(0, 2, n), x)
    assert abs(exact - mi_from_samples(x, y)) < 1e-3


tables = st.lists(st.floats(0, 1), min_size=12, max_size=12).filter(lambda v: sum(v) > 1e-3)


@given(tables)
def test_chain_rule_and_nonnegativity(vals):
    t = np.array(vals).reshape(3, 2, 2)
    j = JointDist(["X", "Y", "Z"], t / t.sum())
    lhs = mutual_info(j, ["X"], ["Y", "Z"])
    rhs = mutual_info(j, ["X"], ["Y"]) + mutual_info(j, ["X"], ["Z"], ["Y"])
    assert lhs >= 0
    assert abs(lhs - rhs) < 1e-9


def test_clamping():
    assert _clamp(-5e-10, "x") == 0.0
    with pytest.raises(NumericalError):
        _clamp(-1e-6, "x")
    assert cmi_table(np.full((1, 2, 2), 0.25)) == 0.0


class TestPredictiveInfo:
    def test_full_redraw_is_zero(self):
        assert np.allclose(predictive_info(coin_spec(2, 1.0), horizon=3).per_step, 0.0, atol=1e-15)

    def test_frozen_single_action(self):
        rep = predictive_info(coin_spec(1, 0.0), horizon=3)
        assert rep.per_step[0] == pytest.approx(LN2, abs=1e-12)
        assert np.allclose(rep.per_step[1:], 0.0, atol=1e-12)
        assert rep.label.startswith("truncated")

    @pytest.mark.parametrize("spec", [coin_spec(1, 0.5), coin_spec(2, 0.3)])
    def test_monotone_in_window(self, spec):
        prev = None
        for w in (3, 4, 5):
            cur = predictive_info(spec, horizon=3, window=w).per_step
            if prev is not None:
                assert np.all(cur >= prev - 1e-12)
            prev = cur

    @given(st.sampled_from([0.0, 0.3, 0.7]), st.sampled_from(["action", "sum"]))
    def test_data_processing(self, q, kind):
        spec = ModulatedBernoulliSpec.homogeneous(2, FiniteDist([0.1, 0.6, 0.9], [0.3, 0.3, 0.4]), q)
        full = predictive_info(spec, horizon=3).per_step
        coarse = predictive_info(spec, AlphaSpec(kind, action=1 if kind == "action" else None), horizon=3).per_step
        assert np.all(coarse <= full + 1e-12)

    def test_window_shorter_than_horizon(self):
        with pytest.raises(ValueError):
            predictive_info(coin_spec(1, 0.5), horizon=3, window=2)

    def test_trend_to_zero(self):
        vals = [predictive_info(coin_spec(2, q), horizon=3).cumulative for q in (0.5, 0.9, 0.99, 1.0)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert vals[-1] == 0.0


class TestProp1:
    def test_full_redraw(self):
        rep = prop1_bound(coin_spec(2, 1.0), 4)
        assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.passed

    def test_half_redraw_single_action(self):
        rep = prop1_bound(coin_spec(1, 0.5), 4)
        assert rep.rhs == pytest.approx(2 * LN2)
        assert rep.passed and 0 < rep.lhs < rep.rhs

    def test_frozen(self):
        rep = prop1_bound(coin_spec(1, 0.0), 3)
        assert rep.rhs == pytest.approx(3 * LN2)
        assert rep.lhs == pytest.approx(LN2)

    def test_refusals(self):
        with pytest.raises(UnsupportedError):
            prop1_bound(NoiseCouplingSpec("independent", 0, 2, (FiniteDist.point(0.5),) * 2), 2)
        with pytest.raises(UnsupportedError):
            prop1_bound(ModulatedBernoulliSpec(2, (FiniteDist.uniform([0.0, 1.0]),) * 2, (0.1, 0.2)), 2)


class TestProp2:
    def test_frozen_tight(self):
        rep = prop2_bound(coin_spec(1, 0.0), 3)
        assert rep.lhs == pytest.approx(LN2, abs=1e-9)
        assert rep.rhs == pytest.approx(LN2, abs=1e-9)
        assert rep.passed

    def test_frozen_two_actions(self):
        rep = prop2_bound(coin_spec(2, 0.0), 3)
        assert rep.rhs == pytest.approx(2 * LN2)
        assert rep.passed

    def test_full_redraw(self):
        rep = prop2_bound(coin_spec(2, 1.0), 3)
        assert rep.rhs == pytest.approx(0.0, abs=1e-15) and rep.passed

    @pytest.mark.parametrize("state", ["theta", "fullRewards"])
    def test_half_redraw(self, state):
        assert prop2_bound(coin_spec(1, 0.5), 3, state=state).passed

    def test_theta_needs_modulated(self):
        with pytest.raises(UnsupportedError):
            prop2_bound(NoiseCouplingSpec("independent", 0, 2, (FiniteDist.point(0.5),) * 2), 2)


ASYM = ModulatedBernoulliSpec(2, (FiniteDist([0.1, 0.9], [0.6, 0.4]), FiniteDist.uniform([0.3, 0.6])), (0.2, 0.7))


class TestInfoRatio:
    def test_single_action_zero(self):
        rep = info_ratio(coin_spec(1, 0.5), UniformPolicy(1), 3, "PastRewards")
        assert np.all(rep.gamma == 0.0)

    def test_greedy_full_redraw_zero(self):
        spec = coin_spec(2, 1.0)
        assert np.all(info_ratio(spec, FilteredGreedy(spec), 3, "PastRewards").gamma == 0.0)

    @pytest.mark.parametrize("make", [lambda s: UniformPolicy(2), FilteredThompson, FilteredGreedy])
    @pytest.mark.parametrize("window", [3, 4])
    def test_three_routes_agree(self, make, window):
        pol = make(ASYM)
        tree = build_history_tree(ASYM, pol, 3)
        a = information_gain_efficient(tree, AlphaSpec(), window)
        b = information_gain_joint(tree, AlphaSpec(), window)
        c = brute_force_info_gain(exact_law(ASYM, window), pol, 3, window)
        assert np.allclose(a, c, atol=1e-9)
        assert np.allclose(b, c, atol=1e-9)

    def test_uniform_ratio_finite_positive(self):
        rep = info_ratio(ASYM, UniformPolicy(2), 3, "PastRewards", window=4)
        assert np.all(np.isfinite(rep.gamma)) and np.all(rep.gamma > 0)
        joint = info_ratio(ASYM, UniformPolicy(2), 3, "PastRewards", window=4, method="joint")
        assert np.allclose(rep.gamma, joint.gamma, rtol=1e-6)

    def test_ratio_conventions(self):
        assert ratio(0.0, 0.0) == 0.0
        assert ratio(0.1, 0.0) == math.inf
        assert ratio(0.1, 0.4) == pytest.approx(0.25)


class TestThm2:
    def test_greedy_full_redraw(self):
        spec = coin_spec(2, 1.0)
        rep = thm2_check(spec, FilteredGreedy(spec), 3, "PastRewards")
        assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.passed

    def test_uniform_half_redraw(self):
        rep = thm2_check(coin_spec(2, 0.5), UniformPolicy(2), 3, "PastRewards", window=4)
        assert rep.passed and rep.slack > 0
        assert rep.details["telescopingPass"]
        assert rep.lhs <= rep.details["cauchySchwarzMiddle"] + 1e-9

    def test_window_equal_horizon_flags_infinite(self):
        rep = thm2_check(coin_spec(2, 0.5), UniformPolicy(2), 3, "PastRewards")
        assert rep.rhs == math.inf and rep.flags and rep.passed

    def test_refuses_oracle(self):
        with pytest.raises(PreconditionError):
            thm2_check(coin_spec(2, 0.5), DynamicOracle(2), 3, "DynamicTheta")

    @pytest.mark.parametrize("spec", [coin_spec(2, 0.0), coin_spec(2, 0.5), ASYM,
                                      IidBernoulliSpec(2, (FiniteDist.uniform([0.2, 0.7]),) * 2)])
    def test_telescoping(self, spec):
        for pol in (UniformPolicy(2), FilteredGreedy(spec), FilteredThompson(spec)):
            assert telescoping_check(spec, pol, 3, window=4).passed
