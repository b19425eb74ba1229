"""Forward filtering for modulated Bernoulli bandits.

Beliefs are kept in predictive form: after processing the history up to
step ``t`` the belief is over ``theta_{t+1}``, so :func:`predicted_mean`
needs no extra transition.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..errors import ImpossibleObservationError
from ..zoo import NoiseCouplingSpec, as_modulated


@dataclass(frozen=True, eq=False)
class BeliefState:
    per_action: tuple
    support: tuple

    def key(self):
        return tuple(np.round(b, 15).tobytes() for b in self.per_action)


def initial_belief(spec):
    spec = as_modulated(spec)
    chains = [spec.chain(a) for a in range(spec.num_actions)]
    return BeliefState(tuple(c[1] for c in chains), tuple(c[0] for c in chains))


def _transition(spec, a, b):
    _, _, prior, q = spec.chain(a)
    return (1.0 - q) * b + q * prior


def _bayes(b, support, reward):
    lik = support if reward > 0.5 else 1.0 - support
    post = b * lik
    z = post.sum()
    if z <= 0:
        raise ImpossibleObservationError(f"reward {reward} has zero likelihood under belief {b.tolist()}")
    return post / z


def filter_step(belief, action, reward, spec):
    """Bayes update on the acted-on action, then one chain transition for all actions."""
    spec = as_modulated(spec)
    out = []
    for a, (b, s) in enumerate(zip(belief.per_action, belief.support)):
        if a == action:
            b = _bayes(b, s, reward)
        out.append(_transition(spec, a, b))
    return BeliefState(tuple(out), belief.support)


def filter_row(belief, row, spec):
    """Like :func:`filter_step` but every action's reward is observed."""
    spec = as_modulated(spec)
    out = []
    for a, (b, s) in enumerate(zip(belief.per_action, belief.support)):
        out.append(_transition(spec, a, _bayes(b, s, row[a])))
    return BeliefState(tuple(out), belief.support)


def predicted_mean(belief, action):
    return float(belief.per_action[action] @ belief.support[action])


def latent_marginal(spec, a, t):
    """Distribution of ``theta_{t, a}`` (1-based ``t``) over the chain states."""
    states, init, prior, q = as_modulated(spec).chain(a)
    if np.array_equal(init, prior):
        return states, prior
    keep = (1.0 - q) ** (t - 1)
    return states, keep * init + (1.0 - keep) * prior


def latent_law(spec, t):
    """Joint law of the mean-reward vector at 1-based step ``t``.

    Returns ``(values, probs)`` with ``values`` of shape ``(N, A)``.
    """
    if isinstance(spec, NoiseCouplingSpec):
        margs = [(d.support, d.probs) for d in spec.mean_prior]
    else:
        spec = as_modulated(spec)
        margs = [latent_marginal(spec, a, t) for a in range(spec.num_actions)]
    values = np.array(list(itertools.product(*[m[0] for m in margs])))
    probs = np.array([np.prod(c) for c in itertools.product(*[m[1] for m in margs])])
    keep = probs > 0
    return values[keep], probs[keep]


def expected_max_latent(spec, t):
    values, probs = latent_law(spec, t)
    return float(probs @ values.max(axis=1))
