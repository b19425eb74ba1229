"""Policies: baselines, filter-based agents, the Bayes-optimal agent and oracles."""
from __future__ import annotations

import enum
import itertools

import numpy as np

from .core import Policy
from .errors import PolicyContractError, UnsupportedError
from .exact.tree import DEFAULT_TREE_BUDGET, FilterPredictor, build_history_tree, make_predictor
from .zoo import IidBernoulliSpec, ModulatedBernoulliSpec, as_modulated

TIE_TOL = 1e-12


class OracleProcessKind(enum.Enum):
    """Which process ``chi_t`` the regret benchmark conditions on."""

    DYNAMIC_THETA = "DynamicTheta"
    PAST_REWARDS = "PastRewards"
    INVARIANT_LAW = "InvariantLaw"
    OPTIMAL_HISTORY = "OptimalHistory"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for kind in cls:
            if value in (kind.value, kind.name):
                return kind
        raise ValueError(f"unknown chiKind {value!r}; expected one of {[k.value for k in cls]}")


def argmax_lowest(values, tol=TIE_TOL):
    values = np.asarray(values, dtype=float)
    return int(np.flatnonzero(values >= values.max() - tol)[0])


def one_hot(a, n):
    p = np.zeros(n)
    p[a] = 1.0
    return p


class UniformPolicy(Policy):
    def __init__(self, num_actions):
        self.num_actions = int(num_actions)
        self._p = np.full(self.num_actions, 1.0 / self.num_actions)

    def action_distribution(self, history):
        return self._p.copy()

    def __repr__(self):
        return f"UniformPolicy({self.num_actions})"


class _PredictorPolicy(Policy):
    """Shared plumbing for agents that act on the exact posterior predictive."""

    def __init__(self, spec, horizon=None, predictor=None):
        if predictor is None:
            if not isinstance(spec, (ModulatedBernoulliSpec, IidBernoulliSpec)) and horizon is None:
                raise UnsupportedError("non-modulated specs need a horizon to build their predictor")
            predictor = make_predictor(spec, horizon)
        self.spec = spec
        self.predictor = predictor
        self.num_actions = predictor.num_actions
        self._states = {(): predictor.initial()}
        self._dists = {}

    def state(self, history):
        history = tuple(history)
        s = self._states.get(history)
        if s is None:
            a, r = history[-1]
            k = int(np.searchsorted(self.predictor.alphabet, r))
            if k >= len(self.predictor.alphabet) or self.predictor.alphabet[k] != r:
                raise PolicyContractError(f"reward {r} outside the alphabet", len(history) - 1)
            s = self.predictor.advance(self.state(history[:-1]), int(a), k)
            self._states[history] = s
        return s

    def predicted_means(self, history):
        return self.predictor.reward_probs(self.state(history)) @ self.predictor.alphabet

    def action_distribution(self, history):
        history = tuple(history)
        p = self._dists.get(history)
        if p is None:
            p = self._decide(history)
            self._dists[history] = p
        return p.copy()


class FilteredGreedy(_PredictorPolicy):
    """Plays the action with the highest posterior predictive mean."""

    def _decide(self, history):
        return one_hot(argmax_lowest(self.predicted_means(history)), self.num_actions)

    def __repr__(self):
        return "FilteredGreedy()"


class FilteredThompson(_PredictorPolicy):
    """Thompson sampling on the exact filter.

    The returned vector is the exact probability that each action wins a
    draw from the product of per-action beliefs; draws that tie for the
    maximum split their mass equally among the tied actions.
    """

    def __init__(self, spec):
        spec = as_modulated(spec)
        super().__init__(spec, predictor=FilterPredictor(spec))

    def _decide(self, history):
        belief = self.state(history)
        out = np.zeros(self.num_actions)
        atoms = [list(zip(s, b)) for s, b in zip(belief.support, belief.per_action)]
        for combo in itertools.product(*atoms):
            w = float(np.prod([p for _, p in combo]))
            if w == 0:
                continue
            theta = np.array([v for v, _ in combo])
            winners = np.flatnonzero(theta >= theta.max() - TIE_TOL)
            out[winners] += w / len(winners)
        return out / out.sum()

    def __repr__(self):
        return "FilteredThompson()"


class TabularPolicy(Policy):
    """Explicit action distributions keyed by history."""

    def __init__(self, num_actions, table):
        self.num_actions = int(num_actions)
        self.table = {tuple(h): np.asarray(p, dtype=float) for h, p in table.items()}

    def action_distribution(self, history):
        try:
            return self.table[tuple(history)].copy()
        except KeyError:
            raise PolicyContractError(f"history {history} not in the policy table", len(history)) from None

    def __len__(self):
        return len(self.table)


def solve_bayes_optimal(spec, horizon, budget=DEFAULT_TREE_BUDGET):
    """Backward induction for the policy maximising expected total reward.

    Returns ``(policy, value)``.  The policy is deterministic, breaks ties by
    lowest action index and is tabulated on every history reachable under
    some policy.
    """
    predictor = make_predictor(spec, horizon)
    na = predictor.num_actions
    tree = build_history_tree(spec, UniformPolicy(na), horizon, budget=budget, predictor=predictor)
    alphabet = tree.alphabet
    nk = len(alphabet)
    table = {}
    future = np.zeros(len(tree.levels[horizon]))
    for t in range(horizon - 1, -1, -1):
        lvl, nxt = tree.levels[t], tree.levels[t + 1]
        q = np.zeros((len(lvl), na))
        for i, h in enumerate(lvl.histories):
            for a in range(na):
                for k in range(nk):
                    pk = lvl.reward_probs[i, a, k]
                    if pk > 0:
                        child = nxt.index[h + ((a, float(alphabet[k])),)]
                        q[i, a] += pk * (alphabet[k] + future[child])
            table[h] = one_hot(argmax_lowest(q[i]), na)
        future = q.max(axis=1)
    return TabularPolicy(na, table), float(future[0])


class DynamicOracle(Policy):
    """Plays ``argmax_a theta_{t+1, a}``; reads the latent, so it is not an agent."""

    needs_latent = True
    history_free = True

    def __init__(self, num_actions):
        self.num_actions = int(num_actions)

    def action_distribution(self, history, theta=None):
        if theta is None:
            raise PolicyContractError("dynamic oracle needs the current latent", len(history))
        return one_hot(argmax_lowest(theta), self.num_actions)

    def __repr__(self):
        return f"DynamicOracle({self.num_actions})"


class SlidingWindowUCB(Policy):
    """Frequentist baseline: UCB1 on the last ``window`` observations."""

    def __init__(self, num_actions, window=10, scale=2.0):
        self.num_actions = int(num_actions)
        self.window = int(window)
        self.scale = float(scale)

    def action_distribution(self, history):
        recent = history[-self.window:]
        counts = np.zeros(self.num_actions)
        sums = np.zeros(self.num_actions)
        for a, r in recent:
            counts[a] += 1
            sums[a] += r
        unplayed = np.flatnonzero(counts == 0)
        if len(unplayed):
            return one_hot(int(unplayed[0]), self.num_actions)
        n = min(len(history), self.window)
        ucb = sums / counts + np.sqrt(self.scale * np.log(n) / counts)
        return one_hot(argmax_lowest(ucb), self.num_actions)

    def __repr__(self):
        return f"SlidingWindowUCB(window={self.window})"


def make_agent(kind, spec, horizon=None, **params):
    """Build an agent by config name."""
    na = spec.num_actions
    if kind == "uniform":
        return UniformPolicy(na)
    if kind == "filteredGreedy":
        return FilteredGreedy(spec, horizon)
    if kind == "filteredThompson":
        return FilteredThompson(spec)
    if kind == "bayesOptimal":
        if horizon is None:
            raise ValueError("bayesOptimal needs a horizon")
        return solve_bayes_optimal(spec, horizon, **params)[0]
    if kind == "dynamicOracle":
        return DynamicOracle(na)
    if kind == "slidingWindowUCB":
        return SlidingWindowUCB(na, **params)
    raise ValueError(f"unknown agent type {kind!r}")


AGENT_TYPES = ("uniform", "filteredGreedy", "filteredThompson", "bayesOptimal", "dynamicOracle", "slidingWindowUCB")
