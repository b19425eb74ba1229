"""Generative Bernoulli bandits with finite-support priors.

Three families:

* :class:`ModulatedBernoulliSpec`: each action's mean reward is redrawn
  from its prior with probability ``q_a`` at every step, otherwise held.
* :class:`IidBernoulliSpec`: the ``q_a = 1`` special case.
* :class:`NoiseCouplingSpec`: means fixed per episode, rewards thresholded
  uniforms; in ``dependent`` mode every action reuses the shared action's
  uniform on even (1-based) timesteps.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .core import BanditProcess
from .errors import BudgetError, ClassificationError, PreconditionError, SpecError

PROB_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteDist:
    support: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.float64).ravel()
        probs = np.asarray(self.probs, dtype=np.float64).ravel()
        if support.shape != probs.shape or support.size == 0:
            raise SpecError("support and probs must be non-empty and of equal length")
        if np.any(np.diff(support) <= 0):
            raise SpecError(f"support must be strictly increasing, got {support.tolist()}")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > PROB_SUM_TOL:
            raise SpecError(f"probs must be non-negative and sum to 1, got {probs.tolist()}")
        support.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, values):
        values = sorted(values)
        return cls(values, np.full(len(values), 1.0 / len(values)))

    @classmethod
    def point(cls, value):
        return cls([value], [1.0])

    @property
    def mean(self):
        return float(self.support @ self.probs)

    def on(self, states):
        """Probabilities re-expressed over a superset ``states`` of the support."""
        out = np.zeros(len(states))
        idx = np.searchsorted(states, self.support)
        out[idx] = self.probs
        return out

    def sample(self, u):
        """Map uniforms ``u`` to draws by inverse CDF."""
        cdf = np.cumsum(self.probs)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
        return self.support[idx]

    def __eq__(self, other):
        return (
            isinstance(other, FiniteDist)
            and np.array_equal(self.support, other.support)
            and np.array_equal(self.probs, other.probs)
        )

    def __hash__(self):
        return hash((self.support.tobytes(), self.probs.tobytes()))

    def to_dict(self):
        return {"support": self.support.tolist(), "probs": self.probs.tolist()}


def _check_unit_support(dists, what):
    for d in dists:
        if d.support[0] < 0 or d.support[-1] > 1:
            raise SpecError(f"{what} support must lie in [0, 1], got {d.support.tolist()}")


@dataclass(frozen=True, eq=False)
class ModulatedBernoulliSpec:
    num_actions: int
    prior: tuple
    redraw: tuple
    # distribution of the first latent; None means "start from the prior"
    initial: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "prior", tuple(self.prior))
        object.__setattr__(self, "redraw", tuple(float(q) for q in self.redraw))
        if self.initial is not None:
            object.__setattr__(self, "initial", tuple(self.initial))
        if self.num_actions < 1:
            raise SpecError("numActions must be >= 1")
        if len(self.prior) != self.num_actions or len(self.redraw) != self.num_actions:
            raise SpecError("prior and redrawProb lengths must equal numActions")
        if self.initial is not None and len(self.initial) != self.num_actions:
            raise SpecError("initial length must equal numActions")
        for q in self.redraw:
            if not 0.0 <= q <= 1.0:
                raise SpecError(f"redraw probability {q} outside [0, 1]")
        _check_unit_support(self.prior, "prior")
        if self.initial is not None:
            _check_unit_support(self.initial, "initial")

    @classmethod
    def homogeneous(cls, num_actions, prior, q, initial=None):
        init = None if initial is None else (initial,) * num_actions
        return cls(num_actions, (prior,) * num_actions, (q,) * num_actions, init)

    @property
    def is_homogeneous(self):
        return len(set(self.redraw)) == 1

    @property
    def starts_stationary(self):
        return self.initial is None or all(i == p for i, p in zip(self.initial, self.prior))

    def with_redraw(self, q):
        return ModulatedBernoulliSpec(self.num_actions, self.prior, (q,) * self.num_actions, self.initial)

    def chain(self, a):
        """``(states, init_probs, prior_probs, q)`` of action ``a``'s latent chain."""
        prior = self.prior[a]
        init = prior if self.initial is None else self.initial[a]
        states = np.union1d(prior.support, init.support)
        return states, init.on(states), prior.on(states), self.redraw[a]

    def to_dict(self):
        d = {
            "type": "modulated",
            "numActions": self.num_actions,
            "support": [p.support.tolist() for p in self.prior],
            "probs": [p.probs.tolist() for p in self.prior],
            "redrawProb": list(self.redraw),
        }
        if self.initial is not None:
            d["initialSupport"] = [p.support.tolist() for p in self.initial]
            d["initialProbs"] = [p.probs.tolist() for p in self.initial]
        return d


@dataclass(frozen=True, eq=False)
class IidBernoulliSpec:
    num_actions: int
    prior: tuple

    def __post_init__(self):
        object.__setattr__(self, "prior", tuple(self.prior))
        if len(self.prior) != self.num_actions:
            raise SpecError("prior length must equal numActions")
        _check_unit_support(self.prior, "prior")

    def as_modulated(self):
        return ModulatedBernoulliSpec(self.num_actions, self.prior, (1.0,) * self.num_actions)

    def to_dict(self):
        return {
            "type": "iid",
            "numActions": self.num_actions,
            "support": [p.support.tolist() for p in self.prior],
            "probs": [p.probs.tolist() for p in self.prior],
        }


@dataclass(frozen=True, eq=False)
class NoiseCouplingSpec:
    mode: str
    shared_action: int
    num_actions: int
    mean_prior: tuple

    def __post_init__(self):
        object.__setattr__(self, "mean_prior", tuple(self.mean_prior))
        if self.mode not in ("independent", "dependent"):
            raise SpecError(f"mode must be 'independent' or 'dependent', got {self.mode!r}")
        if not 0 <= self.shared_action < self.num_actions:
            raise SpecError(f"sharedAction {self.shared_action} outside [0, {self.num_actions})")
        if len(self.mean_prior) != self.num_actions:
            raise SpecError("meanPrior length must equal numActions")
        _check_unit_support(self.mean_prior, "meanPrior")

    def to_dict(self):
        return {
            "type": "noise",
            "mode": self.mode,
            "sharedAction": self.shared_action,
            "numActions": self.num_actions,
            "support": [p.support.tolist() for p in self.mean_prior],
            "probs": [p.probs.tolist() for p in self.mean_prior],
        }


def as_modulated(spec):
    if isinstance(spec, IidBernoulliSpec):
        return spec.as_modulated()
    if isinstance(spec, ModulatedBernoulliSpec):
        return spec
    raise TypeError(f"not a modulated-family spec: {type(spec).__name__}")


class ModulatedBernoulli(BanditProcess):
    def __init__(self, spec):
        self.spec = spec
        self.num_actions = spec.num_actions

    def sample_episode(self, horizon, rng):
        spec = self.spec
        na = spec.num_actions
        u_fresh = rng.random((horizon, na))
        u_redraw = rng.random((horizon, na))
        u_reward = rng.random((horizon, na))
        fresh = np.empty((horizon, na))
        for a in range(na):
            init = spec.prior[a] if spec.initial is None else spec.initial[a]
            fresh[0, a] = init.sample(u_fresh[0, a])
            fresh[1:, a] = spec.prior[a].sample(u_fresh[1:, a])
        redraw = u_redraw < np.asarray(spec.redraw)[None, :]
        theta = kernels.latent_paths(fresh[None], redraw[None])[0]
        return (u_reward < theta).astype(np.float64), theta


class NoiseCoupledBernoulli(BanditProcess):
    def __init__(self, spec):
        self.spec = spec
        self.num_actions = spec.num_actions

    def sample_episode(self, horizon, rng):
        spec = self.spec
        u_theta = rng.random(spec.num_actions)
        theta = np.array([d.sample(u) for d, u in zip(spec.mean_prior, u_theta)])
        noise = rng.random((horizon, spec.num_actions))
        if spec.mode == "dependent":
            # 0-based odd rows are the 1-based even timesteps
            noise[1::2, :] = noise[1::2, spec.shared_action][:, None]
        rewards = (noise < theta[None, :]).astype(np.float64)
        return rewards, np.tile(theta, (horizon, 1))


def make_modulated(spec):
    return ModulatedBernoulli(spec)


def make_iid(spec):
    return ModulatedBernoulli(spec.as_modulated())


def make_noise_coupled(spec):
    return NoiseCoupledBernoulli(spec)


def make_bandit(spec):
    """Sampler for any spec type this package knows."""
    from .exact.law import FiniteBandit, FiniteBanditSpec

    if isinstance(spec, ModulatedBernoulliSpec):
        return make_modulated(spec)
    if isinstance(spec, IidBernoulliSpec):
        return make_iid(spec)
    if isinstance(spec, NoiseCouplingSpec):
        return make_noise_coupled(spec)
    if isinstance(spec, FiniteBanditSpec):
        return FiniteBandit(spec)
    raise TypeError(f"unknown spec type {type(spec).__name__}")


def make_strongly_stationary_surrogate(spec, blocks=None, check=True, tol=1e-9, budget=2**24):
    """Finite-horizon exchangeable representative of a stationary bandit.

    Reads ``blocks`` diagonal tuples ``(R_{nA+1,1}, ..., R_{nA+A,A})`` off the
    input law and returns a law over ``blocks`` reward rows whose mixing index
    is the empirical type of the tuples; given the type, rows are a uniformly
    random arrangement.  That is the symmetrization of the diagonal law, which
    for a stationary input equals the diagonal law itself.
    """
    from .equivalence import is_stationary
    from .exact.law import FiniteBanditSpec

    horizon, na = spec.horizon, spec.num_actions
    k = horizon // na if blocks is None else int(blocks)
    if k < 1 or horizon < na * k:
        raise PreconditionError(f"need horizon >= numActions * blocks, got T={horizon}, A={na}, K={k}")
    if check:
        res = is_stationary(spec, tol=tol)
        if not res.verdict:
            raise ClassificationError("input bandit is not stationary", res.witness)
    n_perm = math.factorial(k)
    width = len(spec.alphabet) ** na
    if n_perm * width**k > budget:
        raise BudgetError("surrogate symmetrization", n_perm * width**k, budget)
    coords = [(n * na + a, a) for n in range(k) for a in range(na)]
    diag = spec.marginal(coords).reshape((width,) * k)
    sym = np.zeros_like(diag)
    for perm in itertools.permutations(range(k)):
        sym += np.transpose(diag, perm)
    sym /= n_perm
    return FiniteBanditSpec(k, na, spec.alphabet, sym.ravel())
