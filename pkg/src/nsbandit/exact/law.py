"""Exact finite-horizon laws of the reward tensor ``R_{1:T}``.

A law is stored densely over every tensor in ``alphabet^(T x A)``; axis
``t * A + a`` of :meth:`FiniteBanditSpec.tensor` is ``R_{t+1, a}``.
"""
from __future__ import annotations

import itertools

import numpy as np

from .. import kernels
from ..core import BanditProcess
from ..errors import BudgetError, SpecError
from ..zoo import IidBernoulliSpec, ModulatedBernoulliSpec, NoiseCouplingSpec

DEFAULT_LAW_BUDGET = 2**24
SUM_TOL = 1e-9
BINARY = np.array([0.0, 1.0])


class FiniteBanditSpec:
    def __init__(self, horizon, num_actions, alphabet, law):
        self.horizon = int(horizon)
        self.num_actions = int(num_actions)
        self.alphabet = np.asarray(alphabet, dtype=np.float64)
        law = np.asarray(law, dtype=np.float64).ravel()
        expected = len(self.alphabet) ** (self.horizon * self.num_actions)
        if law.size != expected:
            raise SpecError(f"law has {law.size} entries, expected {expected}")
        if np.any(law < -SUM_TOL) or abs(law.sum() - 1.0) > SUM_TOL:
            raise SpecError(f"law must be a probability vector (sum={law.sum()!r})")
        if np.any(np.diff(self.alphabet) <= 0):
            raise SpecError("alphabet must be strictly increasing")
        self.law = np.clip(law, 0.0, None)
        self.law.setflags(write=False)

    # -- views ------------------------------------------------------------

    @property
    def num_values(self):
        return len(self.alphabet)

    @property
    def row_width(self):
        return self.num_values**self.num_actions

    def tensor(self):
        return self.law.reshape((self.num_values,) * (self.horizon * self.num_actions))

    def rows(self):
        """Law with one axis per reward row (row code = C-order ravel of the row)."""
        return self.law.reshape((self.row_width,) * self.horizon)

    def row_values(self):
        """``(row_width, A)`` array: reward vector of each row code."""
        digits = np.array(list(itertools.product(range(self.num_values), repeat=self.num_actions)))
        return self.alphabet[digits].reshape(self.row_width, self.num_actions)

    def marginal(self, coords):
        """Law of ``(R_{t+1, a} for (t, a) in coords)``, axes in the given order."""
        na = self.num_actions
        axes = [int(t) * na + int(a) for t, a in coords]
        if len(set(axes)) != len(axes):
            raise ValueError(f"repeated coordinates in {coords}")
        keep = sorted(axes)
        drop = tuple(i for i in range(self.horizon * na) if i not in set(keep))
        m = self.tensor().sum(axis=drop) if drop else self.tensor()
        order = [keep.index(ax) for ax in axes]
        return np.transpose(m, order)

    def row_marginal(self, rows):
        rows = list(rows)
        drop = tuple(i for i in range(self.horizon) if i not in set(rows))
        m = self.rows().sum(axis=drop) if drop else self.rows()
        keep = sorted(rows)
        return np.transpose(m, [keep.index(r) for r in rows])

    def restrict(self, horizon):
        if horizon > self.horizon:
            raise ValueError(f"cannot extend a horizon-{self.horizon} law to {horizon}")
        if horizon == self.horizon:
            return self
        return FiniteBanditSpec(horizon, self.num_actions, self.alphabet, self.row_marginal(range(horizon)))

    def outcomes(self):
        """``[(tensor, prob)]`` over tensors with positive probability."""
        shape = (self.num_values,) * (self.horizon * self.num_actions)
        out = []
        for code in np.flatnonzero(self.law > 0):
            digits = np.array(np.unravel_index(code, shape)) if shape else np.zeros(0, int)
            out.append((self.alphabet[digits].reshape(self.horizon, self.num_actions), float(self.law[code])))
        return out

    def total_variation(self, other):
        return 0.5 * float(np.abs(self.law - other.law).sum())

    # -- interchange ------------------------------------------------------

    @classmethod
    def from_outcomes(cls, horizon, num_actions, outcomes, alphabet=None):
        tensors = [np.asarray(t, dtype=np.float64).reshape(horizon, num_actions) for t, _ in outcomes]
        if alphabet is None:
            alphabet = np.unique(np.concatenate([t.ravel() for t in tensors]))
        alphabet = np.asarray(alphabet, dtype=np.float64)
        law = np.zeros(len(alphabet) ** (horizon * num_actions))
        shape = (len(alphabet),) * (horizon * num_actions)
        for t, (_, p) in zip(tensors, outcomes):
            idx = np.searchsorted(alphabet, t.ravel())
            if np.any(idx >= len(alphabet)) or np.any(alphabet[np.minimum(idx, len(alphabet) - 1)] != t.ravel()):
                raise SpecError("outcome tensor uses values outside the alphabet")
            law[np.ravel_multi_index(tuple(idx), shape)] += p
        return cls(horizon, num_actions, alphabet, law)

    def to_dict(self):
        return {
            "type": "finite",
            "horizon": self.horizon,
            "numActions": self.num_actions,
            "alphabet": self.alphabet.tolist(),
            "outcomes": [{"rewards": t.tolist(), "prob": p} for t, p in self.outcomes()],
        }

    @classmethod
    def from_dict(cls, d):
        outcomes = [(o["rewards"], float(o["prob"])) for o in d["outcomes"]]
        return cls.from_outcomes(int(d["horizon"]), int(d["numActions"]), outcomes, d.get("alphabet"))

    def __repr__(self):
        return f"FiniteBanditSpec(T={self.horizon}, A={self.num_actions}, alphabet={self.alphabet.tolist()})"


class FiniteBandit(BanditProcess):
    """Sampler drawing whole reward tensors from an explicit law."""

    def __init__(self, spec):
        self.spec = spec
        self.num_actions = spec.num_actions
        self._cdf = np.cumsum(spec.law)

    def sample_episode(self, horizon, rng):
        if horizon > self.spec.horizon:
            raise ValueError(f"law only covers {self.spec.horizon} steps")
        code = min(int(np.searchsorted(self._cdf, rng.random(), side="right")), len(self._cdf) - 1)
        shape = (self.spec.num_values,) * (self.spec.horizon * self.num_actions)
        digits = np.array(np.unravel_index(code, shape))
        rewards = self.spec.alphabet[digits].reshape(self.spec.horizon, self.num_actions)
        return rewards[:horizon].copy(), None


# ---------------------------------------------------------------------------


def _check_budget(what, size, budget):
    if size > budget:
        raise BudgetError(what, size, budget)


def _to_t_major(per_action, horizon):
    """Outer product of per-action sequence laws, axes reordered to (t, a)."""
    na = len(per_action)
    out = per_action[0].reshape((2,) * horizon)
    for p in per_action[1:]:
        out = np.multiply.outer(out, p.reshape((2,) * horizon))
    perm = [a * horizon + t for t in range(horizon) for a in range(na)]
    return np.transpose(out, perm).ravel()


def modulated_action_law(spec, a, horizon):
    """Law of ``R_{1:T, a}`` over the 2^T binary sequences (first step most significant)."""
    states, init, prior, q = spec.chain(a)
    return kernels.path_probs(init, states, q, prior, horizon)


def _comonotone_row(theta):
    """Law of ``(1{U < theta_a})_a`` for one shared uniform ``U``."""
    na = len(theta)
    row = np.zeros((2,) * na)
    for bits in itertools.product((0, 1), repeat=na):
        on = [theta[a] for a in range(na) if bits[a]]
        off = [theta[a] for a in range(na) if not bits[a]]
        row[bits] = max(0.0, min(on, default=1.0) - max(off, default=0.0))
    return row


def _independent_row(theta):
    row = np.ones(())
    for th in theta:
        row = np.multiply.outer(row, np.array([1.0 - th, th]))
    return row


def exact_law(spec, horizon, budget=DEFAULT_LAW_BUDGET):
    """Exact law of ``R_{1:horizon}`` as a :class:`FiniteBanditSpec`."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if isinstance(spec, FiniteBanditSpec):
        return spec.restrict(horizon)
    if isinstance(spec, IidBernoulliSpec):
        spec = spec.as_modulated()
    na = spec.num_actions
    if isinstance(spec, ModulatedBernoulliSpec):
        _check_budget("exact law", 2 ** (horizon * na), budget)
        per_action = [modulated_action_law(spec, a, horizon) for a in range(na)]
        return FiniteBanditSpec(horizon, na, BINARY, _to_t_major(per_action, horizon))
    if isinstance(spec, NoiseCouplingSpec):
        n_theta = int(np.prod([len(d.support) for d in spec.mean_prior]))
        _check_budget("exact law", n_theta * 2 ** (horizon * na), budget)
        law = np.zeros((2,) * (horizon * na))
        supports = [zip(d.support, d.probs) for d in spec.mean_prior]
        for combo in itertools.product(*supports):
            theta = np.array([v for v, _ in combo])
            w = float(np.prod([p for _, p in combo]))
            if w == 0:
                continue
            odd = _independent_row(theta)
            even = _comonotone_row(theta) if spec.mode == "dependent" else odd
            part = np.ones(())
            for t in range(horizon):
                # 0-based odd rows are the 1-based even timesteps
                part = np.multiply.outer(part, even if t % 2 == 1 else odd)
            law += w * part
        return FiniteBanditSpec(horizon, na, BINARY, law.ravel())
    raise TypeError(f"no exact law for {type(spec).__name__}")
