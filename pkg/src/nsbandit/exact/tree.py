"""Exact law of the history ``H_t`` generated by a policy.

Each node of a :class:`HistoryTree` carries ``P(H_t = h)``, the policy's
action distribution at ``h`` and the one-step predictive reward law
``P(R_{t+1, a} = r | h)``.  Predictions come from a *predictor*: the forward
filter for modulated bandits, or conditioning of an explicit law on the
observed reward path otherwise.  Zero-probability branches are pruned.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core import check_distribution
from ..errors import BudgetError, PreconditionError
from ..zoo import IidBernoulliSpec, ModulatedBernoulliSpec, NoiseCouplingSpec
from .filtering import filter_step, initial_belief, predicted_mean
from .joint import JointDist, QueryError
from .law import BINARY, DEFAULT_LAW_BUDGET, FiniteBanditSpec, exact_law

DEFAULT_TREE_BUDGET = 2**20


class FilterPredictor:
    def __init__(self, spec):
        self.spec = spec
        self.alphabet = BINARY
        self.num_actions = spec.num_actions

    def initial(self):
        return initial_belief(self.spec)

    def reward_probs(self, state):
        m = np.array([predicted_mean(state, a) for a in range(self.num_actions)])
        return np.stack([1.0 - m, m], axis=1)

    def advance(self, state, action, k):
        return filter_step(state, action, self.alphabet[k], self.spec)


class LawPredictor:
    """Predictions by conditioning an explicit law on the observed path."""

    def __init__(self, law):
        self.law = law
        self.alphabet = law.alphabet
        self.num_actions = law.num_actions
        self._cache = {}

    def initial(self):
        return ((), ())

    def path_law(self, actions):
        """Law of ``(R_{1, a_0}, ..., R_{t, a_{t-1}})`` for an action sequence."""
        actions = tuple(actions)
        m = self._cache.get(actions)
        if m is None:
            m = self.law.marginal([(s, a) for s, a in enumerate(actions)])
            self._cache[actions] = m
        return m

    def reward_probs(self, state):
        actions, codes = state
        if len(actions) >= self.law.horizon:
            raise PreconditionError(f"law horizon {self.law.horizon} exhausted")
        out = np.empty((self.num_actions, len(self.alphabet)))
        for a in range(self.num_actions):
            v = self.path_law(actions + (a,))[codes]
            out[a] = v / v.sum()
        return out

    def advance(self, state, action, k):
        actions, codes = state
        return (actions + (action,), codes + (k,))


def make_predictor(spec, horizon, budget=DEFAULT_LAW_BUDGET):
    if isinstance(spec, (ModulatedBernoulliSpec, IidBernoulliSpec)):
        return FilterPredictor(spec)
    if isinstance(spec, (NoiseCouplingSpec, FiniteBanditSpec)):
        return LawPredictor(exact_law(spec, horizon, budget))
    raise TypeError(f"no predictor for {type(spec).__name__}")


@dataclass
class TreeLevel:
    histories: list
    prob: np.ndarray
    states: list
    policy: np.ndarray = None
    reward_probs: np.ndarray = None
    index: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.histories)


class HistoryTree:
    def __init__(self, source, policy, horizon, alphabet, num_actions, levels, law_budget):
        self.source = source
        self.policy = policy
        self.horizon = horizon
        self.alphabet = alphabet
        self.num_actions = num_actions
        self.levels = levels
        self._law_budget = law_budget
        self._laws = {}

    @property
    def num_nodes(self):
        return sum(len(lvl) for lvl in self.levels)

    @property
    def leaf_probs(self):
        return self.levels[-1].prob

    def predicted_means(self, t):
        """``(n_t, A)`` array of ``E[R_{t+1, a} | H_t = h]``."""
        return self.levels[t].reward_probs @ self.alphabet

    def expected_reward(self, t):
        """``E[R_{t+1, A_t}]`` under the tree's policy."""
        lvl = self.levels[t]
        return float(lvl.prob @ np.sum(lvl.policy * self.predicted_means(t), axis=1))

    def expected_best_prediction(self, t):
        """``E[max_a E[R_{t+1, a} | H_t]]``."""
        return float(self.levels[t].prob @ self.predicted_means(t).max(axis=1))

    @property
    def value(self):
        return sum(self.expected_reward(t) for t in range(self.horizon))

    def law(self, horizon):
        if horizon not in self._laws:
            self._laws[horizon] = exact_law(self.source, horizon, self._law_budget)
        return self._laws[horizon]


def build_history_tree(spec, policy, horizon, budget=DEFAULT_TREE_BUDGET, predictor=None,
                       law_budget=DEFAULT_LAW_BUDGET):
    if policy.needs_latent:
        raise PreconditionError("oracle policies read latents and have no history tree")
    if predictor is None:
        predictor = make_predictor(spec, horizon, law_budget)
    na = predictor.num_actions
    alphabet = predictor.alphabet
    root = TreeLevel([()], np.ones(1), [predictor.initial()])
    root.index[()] = 0
    levels = [root]
    count = 1
    for t in range(horizon):
        lvl = levels[-1]
        pol = np.empty((len(lvl), na))
        rp = np.empty((len(lvl), na, len(alphabet)))
        nxt = TreeLevel([], None, [])
        probs = []
        for i, (h, state) in enumerate(zip(lvl.histories, lvl.states)):
            pol[i] = check_distribution(policy.action_distribution(h), na, t)
            rp[i] = predictor.reward_probs(state)
            for a in np.flatnonzero(pol[i] > 0):
                for k in np.flatnonzero(rp[i, a] > 0):
                    child = h + ((int(a), float(alphabet[k])),)
                    nxt.index[child] = len(nxt.histories)
                    nxt.histories.append(child)
                    nxt.states.append(predictor.advance(state, int(a), int(k)))
                    probs.append(lvl.prob[i] * pol[i, a] * rp[i, a, k])
        lvl.policy, lvl.reward_probs = pol, rp
        count += len(nxt.histories)
        if count > budget:
            raise BudgetError("history tree", count, budget)
        nxt.prob = np.array(probs)
        levels.append(nxt)
    return HistoryTree(spec, policy, horizon, alphabet, na, levels, law_budget)


# ---------------------------------------------------------------------------
# brute-force joint of (history, actions, full reward tensor)


@dataclass(frozen=True)
class Var:
    kind: str
    t: int
    hi: int = None
    action: int = None

    @property
    def name(self):
        if self.kind == "A":
            return f"A_{self.t}"
        if self.kind == "Y":
            return f"Y_{self.t}"
        if self.kind == "H":
            return f"H_{self.t}"
        if self.kind == "R":
            return f"R_{self.t},{self.action}"
        if self.kind == "rows":
            return f"R_{self.t}:{self.hi}"
        if self.kind == "alpha":
            return f"alpha_{self.t}:{self.hi}"
        raise QueryError(f"unknown variable kind {self.kind!r}")

    def __str__(self):
        return self.name


def A(t):
    """Action at 0-based step ``t``."""
    return Var("A", t)


def Y(t):
    """Observed reward ``R_{t+1, A_t}``."""
    return Var("Y", t)


def H(t):
    """History after ``t`` steps."""
    return Var("H", t)


def R(t, action):
    """Single reward coordinate ``R_{t, action}`` (1-based ``t``)."""
    return Var("R", t, action=action)


def rows(lo, hi=None):
    """Full reward rows ``R_{lo:hi}`` (1-based, inclusive)."""
    return Var("rows", lo, lo if hi is None else hi)


def alpha(lo, hi=None):
    """Auxiliary process ``alpha_{lo:hi}`` (1-based, inclusive)."""
    return Var("alpha", lo, lo if hi is None else hi)


def _history_keys(acts, obs, na, nk):
    key = np.zeros(len(acts), dtype=np.int64)
    for s in range(acts.shape[1]):
        key = key * (na * nk) + acts[:, s] * nk + obs[:, s]
    return key


def _level_lookup(level, alphabet, na, nk):
    lookup = {}
    for i, h in enumerate(level.histories):
        key = 0
        for a, r in h:
            key = key * (na * nk) + a * nk + int(np.searchsorted(alphabet, r))
        lookup[key] = i
    return lookup


def enumerate_trajectories(tree, horizon):
    """All ``(outcome, action path)`` pairs with positive probability.

    Returns ``(digits, xi, acts, nodes, weights)``: ``digits[n]`` is outcome
    ``n``'s tensor in alphabet indices, row ``m`` pairs outcome ``xi[m]``
    with actions ``acts[m]``; ``nodes[t][m]`` is the tree node of ``H_t``.
    """
    law = tree.law(horizon)
    na, nk = tree.num_actions, len(tree.alphabet)
    codes = np.flatnonzero(law.law > 0)
    shape = (nk,) * (horizon * na)
    digits = np.stack(np.unravel_index(codes, shape), axis=1).reshape(len(codes), horizon, na)
    xi = np.arange(len(codes))
    w = law.law[codes]
    acts = np.zeros((len(codes), 0), dtype=np.int64)
    nodes = []
    for t in range(tree.horizon + 1):
        obs = digits[xi[:, None], np.arange(t)[None, :], acts] if t else np.zeros((len(xi), 0), np.int64)
        keys = _history_keys(acts, obs, na, nk)
        lookup = _level_lookup(tree.levels[t], tree.alphabet, na, nk)
        uniq, inv = np.unique(keys, return_inverse=True)
        node = np.array([lookup[k] for k in uniq], dtype=np.int64)[inv]
        nodes = [n for n in nodes] + [node]
        if t == tree.horizon:
            break
        pi = tree.levels[t].policy[node]
        rep_xi, rep_acts, rep_w, rep_nodes = [], [], [], [[] for _ in nodes]
        for a in range(na):
            keep = pi[:, a] > 0
            rep_xi.append(xi[keep])
            rep_acts.append(np.column_stack([acts[keep], np.full(keep.sum(), a)]))
            rep_w.append(w[keep] * pi[keep, a])
            for j, n in enumerate(nodes):
                rep_nodes[j].append(n[keep])
        xi = np.concatenate(rep_xi)
        acts = np.concatenate(rep_acts).astype(np.int64)
        w = np.concatenate(rep_w)
        nodes = [np.concatenate(r) for r in rep_nodes]
    return digits, xi, acts, nodes, w


def joint_of(tree, query, alpha_spec=None):
    """Exact joint law of the query variables under (source, policy)."""
    from ..info import AlphaSpec

    alpha_spec = alpha_spec or AlphaSpec()
    query = list(query)
    horizon = tree.horizon
    for v in query:
        if v.kind in ("A", "Y") and not 0 <= v.t < tree.horizon:
            raise QueryError(f"{v.name} outside steps 0..{tree.horizon - 1}")
        if v.kind == "H" and not 0 <= v.t <= tree.horizon:
            raise QueryError(f"{v.name} outside 0..{tree.horizon}")
        if v.kind in ("R", "rows", "alpha"):
            if v.t < 1 or (v.hi is not None and v.hi < v.t):
                raise QueryError(f"malformed range in {v.name}")
            horizon = max(horizon, v.hi if v.hi is not None else v.t)
    law = tree.law(horizon)
    digits, xi, acts, nodes, w = enumerate_trajectories(tree, horizon)
    na, nk = tree.num_actions, len(tree.alphabet)
    radix = nk ** np.arange(na - 1, -1, -1)
    row_codes = digits @ radix  # (N, horizon)
    cols = []
    for v in query:
        if v.kind == "A":
            cols.append(acts[:, v.t])
        elif v.kind == "Y":
            cols.append(tree.alphabet[digits[xi, v.t, acts[:, v.t]]])
        elif v.kind == "H":
            cols.append(nodes[v.t])
        elif v.kind == "R":
            cols.append(tree.alphabet[digits[xi, v.t - 1, v.action]])
        elif v.kind == "rows":
            cols.append(row_codes[xi, v.t - 1: v.hi])
        elif v.kind == "alpha":
            mapped = np.stack([alpha_spec.codes(s, law)[row_codes[xi, s - 1]] for s in range(v.t, v.hi + 1)], axis=1)
            cols.append(mapped)
    joint = JointDist.from_codes([v.name for v in query], cols, w)
    labels = list(joint.labels)
    for i, v in enumerate(query):
        if v.kind == "H":
            labels[i] = [tree.levels[v.t].histories[j] for j in labels[i]]
    return JointDist(joint.names, joint.table, labels)
