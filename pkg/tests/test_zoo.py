import numpy as np
import pytest

from nsbandit import (
    FiniteDist,
    IidBernoulliSpec,
    ModulatedBernoulliSpec,
    NoiseCouplingSpec,
    are_equivalent,
    exact_law,
    is_strongly_stationary,
    make_iid,
    make_modulated,
    make_noise_coupled,
    make_strongly_stationary_surrogate,
)
from nsbandit.equivalence import mixture_law
from nsbandit.errors import ClassificationError, SpecError
from nsbandit.rng import RngSeed, generator, BANDIT


def sample(bandit, horizon, episodes, seed=0):
    rews, lats = [], []
    for i in range(episodes):
        r, l = bandit.sample_episode(horizon, generator(RngSeed(seed, i), BANDIT))
        rews.append(r)
        lats.append(l)
    return np.array(rews), np.array(lats)


class TestFiniteDist:
    def test_validation(self):
        with pytest.raises(SpecError):
            FiniteDist([0.0, 1.0], [0.5, 0.4])
        with pytest.raises(SpecError):
            FiniteDist([1.0, 0.0], [0.5, 0.5])
        with pytest.raises(SpecError):
            FiniteDist([], [])
        FiniteDist([0.0, 1.0], [0.5, 0.5 + 5e-13])

    def test_support_outside_unit_interval(self):
        with pytest.raises(SpecError):
            ModulatedBernoulliSpec.homogeneous(1, FiniteDist.uniform([0.5, 1.5]), 0.5)

    def test_sample_inverse_cdf(self):
        d = FiniteDist([0.1, 0.5], [0.25, 0.75])
        assert d.sample(np.array([0.0, 0.2499, 0.25, 0.99])).tolist() == [0.1, 0.1, 0.5, 0.5]


class TestModulated:
    def test_frozen_latents(self, coin):
        _, lat = sample(make_modulated(ModulatedBernoulliSpec.homogeneous(2, coin, 0.0)), 10, 50)
        assert np.all(lat == lat[:, :1, :])

    def test_full_redraw_has_no_autocorrelation(self):
        spec = ModulatedBernoulliSpec.homogeneous(1, FiniteDist.uniform([0.2, 0.8]), 1.0)
        _, lat = sample(make_modulated(spec), 50, 400)
        x = lat[:, :-1, 0].ravel() - 0.5
        y = lat[:, 1:, 0].ravel() - 0.5
        corr = (x * y).mean() / np.sqrt((x * x).mean() * (y * y).mean())
        assert abs(corr) < 4 / np.sqrt(len(x))

    def test_change_frequency(self, coin):
        # a change is a redraw landing on the other atom: q * (1 - sum p^2) = 0.25
        _, lat = sample(make_modulated(ModulatedBernoulliSpec.homogeneous(1, coin, 0.5)), 1001, 100)
        changes = (lat[:, 1:, 0] != lat[:, :-1, 0]).ravel()
        se = np.sqrt(0.25 * 0.75 / changes.size)
        assert abs(changes.mean() - 0.25) < 4 * se

    def test_latents_drive_rewards(self):
        spec = ModulatedBernoulliSpec.homogeneous(2, FiniteDist.uniform([0.0, 1.0]), 0.3)
        r, lat = sample(make_modulated(spec), 12, 30)
        assert np.array_equal(r, lat)

    def test_nonstationary_initial(self, coin):
        spec = ModulatedBernoulliSpec.homogeneous(1, coin, 0.5, initial=FiniteDist.point(1.0))
        _, lat = sample(make_modulated(spec), 2, 200)
        assert np.all(lat[:, 0, 0] == 1.0)
        assert not spec.starts_stationary


class TestIid:
    def test_equals_modulated_q1(self):
        prior = (FiniteDist.uniform([0.2, 0.7]), FiniteDist([0.1, 0.5, 0.9], [0.2, 0.3, 0.5]))
        a = exact_law(IidBernoulliSpec(2, prior), 3)
        b = exact_law(ModulatedBernoulliSpec(2, prior, (1.0, 1.0)), 3)
        assert np.array_equal(a.law, b.law)

    def test_mean(self):
        spec = IidBernoulliSpec(1, (FiniteDist([0.2, 0.6], [0.5, 0.5]),))
        r, _ = sample(make_iid(spec), 20, 500)
        assert abs(r.mean() - 0.4) < 4 * np.sqrt(0.24 / r.size)

    def test_point_mass_one(self):
        r, _ = sample(make_iid(IidBernoulliSpec(2, (FiniteDist.point(1.0),) * 2)), 5, 10)
        assert np.all(r == 1.0)


class TestNoiseCoupled:
    def test_dependent_even_steps_share_noise(self):
        spec = NoiseCouplingSpec("dependent", 0, 2, (FiniteDist.point(0.5),) * 2)
        r, lat = sample(make_noise_coupled(spec), 8, 100)
        # 1-based even timesteps are rows 1, 3, 5, ...
        assert np.array_equal(r[:, 1::2, 0], r[:, 1::2, 1])
        assert not np.array_equal(r[:, 0::2, 0], r[:, 0::2, 1])
        assert np.all(lat == 0.5)

    def test_independent_marginal(self):
        spec = NoiseCouplingSpec("independent", 0, 2, (FiniteDist.uniform([0.2, 0.6]),) * 2)
        r, _ = sample(make_noise_coupled(spec), 10, 400)
        assert abs(r.mean() - 0.4) < 4 * np.sqrt(0.24 / r.size) * 3

    def test_sampler_matches_exact_law(self):
        q = FiniteDist.uniform([0.25, 0.75])
        spec = NoiseCouplingSpec("dependent", 1, 2, (q, q))
        law = exact_law(spec, 2)
        r, _ = sample(make_noise_coupled(spec), 2, 20000)
        codes = (r.reshape(len(r), -1) @ (2 ** np.arange(3, -1, -1))).astype(int)
        freq = np.bincount(codes, minlength=16) / len(codes)
        se = np.sqrt(law.law * (1 - law.law) / len(codes)) + 1e-9
        assert np.all(np.abs(freq - law.law) < 5 * se + 1e-3)

    def test_spec_errors(self):
        q = (FiniteDist.point(0.5),) * 2
        with pytest.raises(SpecError):
            NoiseCouplingSpec("sometimes", 0, 2, q)
        with pytest.raises(SpecError):
            NoiseCouplingSpec("dependent", 2, 2, q)


class TestSurrogate:
    def test_iid_input_is_fixed_point(self):
        law = exact_law(IidBernoulliSpec(1, (FiniteDist.uniform([0.3, 0.8]),)), 3)
        sur = make_strongly_stationary_surrogate(law)
        assert sur.horizon == 3
        assert np.allclose(sur.law, law.law, atol=1e-15)

    def test_surrogate_of_dependent_noise(self):
        q = FiniteDist.uniform([0.25, 0.75])
        law = exact_law(NoiseCouplingSpec("dependent", 0, 2, (q, q)), 4)
        sur = make_strongly_stationary_surrogate(law)
        assert sur.horizon == 2
        assert is_strongly_stationary(sur).verdict
        assert are_equivalent(sur, law.restrict(2)).verdict

    def test_surrogate_of_recoupled_mixture(self):
        w = np.array([0.25, 0.75])
        means = np.repeat(np.array([[[0.2, 0.7]], [[0.9, 0.4]]]), 4, axis=1)
        coupled = mixture_law(w, means, [["comonotone"] * 4, ["countermonotone"] * 4])
        sur = make_strongly_stationary_surrogate(coupled)
        assert is_strongly_stationary(sur).verdict
        assert are_equivalent(sur, coupled.restrict(2)).verdict

    def test_rejects_nonstationary(self, coin):
        spec = ModulatedBernoulliSpec.homogeneous(1, coin, 0.5, initial=FiniteDist.point(1.0))
        with pytest.raises(ClassificationError) as exc:
            make_strongly_stationary_surrogate(exact_law(spec, 2))
        assert exc.value.witness["tv"] > 1e-9
