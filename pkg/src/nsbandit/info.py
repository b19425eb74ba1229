"""Discrete information measures and the information-theoretic bound checks.

All quantities are in nats.  Future auxiliary sequences ``alpha_{t+2:inf}``
are truncated at a window ``W`` (the horizon by default), which makes every
reported predictive information a lower approximation of the untruncated
one; bound checks use the same window on both sides.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels
from .agents import OracleProcessKind
from .errors import NumericalError, PreconditionError, UnsupportedError
from .exact.joint import JointDist, QueryError
from .exact.law import DEFAULT_LAW_BUDGET, exact_law
from .exact.tree import DEFAULT_TREE_BUDGET, H, A, Y, alpha, build_history_tree, joint_of
from .regret import regret_exact
from .reports import BoundReport
from .zoo import FiniteDist, IidBernoulliSpec, ModulatedBernoulliSpec, as_modulated

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-9
ZERO_NUM = 1e-12
ZERO_DEN = 1e-13


def _clamp(value, what):
    if value < 0:
        if value < -CLAMP_TOL:
            raise NumericalError(f"{what} = {value!r} is negative beyond rounding")
        log.debug("clamped %s = %.3e to 0", what, value)
        return 0.0
    return float(value)


def entropy(dist):
    """Shannon entropy in nats of a FiniteDist, JointDist or probability array."""
    if isinstance(dist, FiniteDist):
        p = dist.probs
    elif isinstance(dist, JointDist):
        p = dist.table
    else:
        p = np.asarray(dist, dtype=float)
    p = p.ravel()
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def cmi_table(p):
    """``I(X; Y | Z)`` from a ``(Z, X, Y)`` probability table."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    return _clamp(float(kernels.cmi_per_z(p).sum()), "conditional mutual information")


@dataclass(frozen=True)
class InfoQuery:
    joint: JointDist
    target: tuple
    other: tuple
    given: tuple = ()

    def __post_init__(self):
        for group in ("target", "other", "given"):
            v = getattr(self, group)
            object.__setattr__(self, group, (v,) if isinstance(v, str) else tuple(v))
        missing = [n for n in self.target + self.other + self.given if n not in self.joint.names]
        if missing:
            raise QueryError(f"unknown variables {missing}")


def mutual_info(query_or_joint, x=None, y=None, given=()):
    """``I(x; y | given)`` by direct summation over the joint table."""
    if isinstance(query_or_joint, InfoQuery):
        q = query_or_joint
    else:
        q = InfoQuery(query_or_joint, x, y, given)
    return cmi_table(q.joint.grouped(q.target, q.other, q.given))


# ---------------------------------------------------------------------------
# auxiliary processes


@dataclass(frozen=True)
class AlphaSpec:
    """Deterministic per-step map ``alpha_t = f_t(R_t)``.

    ``kind`` is ``identity`` (the whole row), ``action`` (one coordinate),
    ``sum`` (row total) or ``custom`` with ``fn(t, row_values) -> values``
    where ``t`` is 1-based and ``row_values`` has shape ``(n_rows, A)``.
    ``window`` truncates the future at ``alpha_W``.
    """

    kind: str = "identity"
    action: Optional[int] = None
    window: Optional[int] = None
    fn: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in ("identity", "action", "sum", "custom"):
            raise ValueError(f"unknown alpha kind {self.kind!r}")
        if self.kind == "action" and self.action is None:
            raise ValueError("alpha kind 'action' needs an action")
        if self.kind == "custom" and self.fn is None:
            raise ValueError("alpha kind 'custom' needs fn")

    def codes(self, t, law):
        """Integer code of ``alpha_t`` for each row code of ``law``."""
        if self.kind == "identity":
            return np.arange(law.row_width)
        vals = law.row_values()
        if self.kind == "action":
            image = vals[:, self.action]
        elif self.kind == "sum":
            image = vals.sum(axis=1)
        else:
            image = np.asarray(self.fn(t, vals))
            if image.ndim > 1:
                return np.unique(image, axis=0, return_inverse=True)[1].ravel()
        return np.unique(image, return_inverse=True)[1].ravel()

    def to_dict(self):
        d = {"kind": self.kind}
        if self.action is not None:
            d["action"] = self.action
        if self.window is not None:
            d["window"] = self.window
        return d


def _onehot(codes):
    m = np.zeros((len(codes), int(codes.max()) + 1))
    m[np.arange(len(codes)), codes] = 1.0
    return m


def _contract(tensor, axis, matrix):
    return np.moveaxis(np.tensordot(tensor, matrix, axes=([axis], [0])), -1, axis)


def _window(alpha_spec, horizon, window):
    w = window if window is not None else alpha_spec.window
    w = horizon if w is None else int(w)
    if w < horizon:
        raise ValueError(f"window {w} shorter than horizon {horizon}")
    return w


@dataclass
class PredictiveInfoReport:
    per_step: np.ndarray
    window: int
    label: str = "truncated-at-W lower approximation"

    @property
    def cumulative(self):
        return float(np.sum(self.per_step))

    def rows(self):
        return [{"t": t, "delta": d, "cumulative": c} for t, (d, c) in enumerate(zip(self.per_step, np.cumsum(self.per_step)))]

    def to_dict(self):
        return {"perStep": self.per_step, "cumulative": self.cumulative, "window": self.window, "label": self.label}


def predictive_info_from_law(law, alpha_spec, horizon):
    """``Delta_t = I(alpha_{t+2:W}; R_{t+1} | R_{1:t})`` with ``W = law.horizon``."""
    w = law.horizon
    rows_t = law.rows()
    maps = [_onehot(alpha_spec.codes(s + 1, law)) for s in range(w)]
    out = np.zeros(horizon)
    for t in range(horizon):
        if t + 1 >= w:
            continue
        m = rows_t
        for s in range(t + 1, w):
            m = _contract(m, s, maps[s])
        nz = law.row_width**t
        out[t] = cmi_table(m.reshape(nz, law.row_width, -1))
    return out


def predictive_info(spec, alpha_spec=None, horizon=None, window=None, budget=DEFAULT_LAW_BUDGET):
    alpha_spec = alpha_spec or AlphaSpec()
    if horizon is None:
        horizon = spec.horizon
    w = _window(alpha_spec, horizon, window)
    law = exact_law(spec, w, budget)
    return PredictiveInfoReport(predictive_info_from_law(law, alpha_spec, horizon), w)


def prop1_bound(spec, horizon, alpha_spec=None, window=None, budget=DEFAULT_LAW_BUDGET):
    """``V_T <= T (1 - q) sum_a H(Q_a)``; equals ``T |A| (1 - q) H(Q)`` for a shared prior."""
    if not isinstance(spec, (ModulatedBernoulliSpec, IidBernoulliSpec)):
        raise UnsupportedError("Prop1 applies to modulated Bernoulli bandits")
    spec = as_modulated(spec)
    if not spec.is_homogeneous:
        raise UnsupportedError("Prop1 needs a common redraw probability")
    if not spec.starts_stationary:
        raise UnsupportedError("Prop1 needs the latent chain to start from its prior")
    q = spec.redraw[0]
    rhs = horizon * (1.0 - q) * sum(entropy(p) for p in spec.prior)
    v = predictive_info(spec, alpha_spec, horizon, window, budget)
    return BoundReport("Prop1", lhs=v.cumulative, rhs=rhs, details={"perStep": v.per_step, "window": v.window, "label": v.label})


# ---------------------------------------------------------------------------
# information ratio


def _select_rows(law, prefix, action, alpha_maps, lo):
    """Tensor over ``(observed path, R_{t+1, action}, alpha_{t+2:W})``."""
    t = len(prefix)
    vals = law.row_values()
    digits = np.searchsorted(law.alphabet, vals)
    m = law.rows()
    for s, a in enumerate(tuple(prefix) + (action,)):
        m = _contract(m, s, _onehot_fixed(digits[:, a], law.num_values))
    for s in range(t + 1, law.horizon):
        m = _contract(m, s, alpha_maps[s])
    nk = law.num_values
    return m.reshape(nk**t, nk, -1)


def _onehot_fixed(codes, width):
    m = np.zeros((len(codes), width))
    m[np.arange(len(codes)), codes] = 1.0
    return m


def information_gain_efficient(tree, alpha_spec, window):
    """``I(alpha_{t+2:W}; A_t, R_{t+1, A_t} | H_t)`` for each ``t``.

    Uses ``A_t`` independent of the future given ``H_t`` and that, given an
    action path, the observation likelihood does not involve the policy:
    the gain is ``sum_h P(h) sum_a pi(a|h) I(alpha; R_{t+1,a} | path(h), a)``.
    """
    law = tree.law(window)
    maps = [_onehot(alpha_spec.codes(s + 1, law)) for s in range(window)]
    nk = law.num_values
    out = np.zeros(tree.horizon)
    for t in range(tree.horizon):
        if t + 1 >= window:
            continue
        lvl = tree.levels[t]
        groups = {}
        for i, h in enumerate(lvl.histories):
            groups.setdefault(tuple(a for a, _ in h), []).append(i)
        total = 0.0
        for prefix, nodes in groups.items():
            obs = np.array([[int(np.searchsorted(tree.alphabet, r)) for _, r in lvl.histories[i]] for i in nodes], dtype=np.int64)
            z = (obs @ (nk ** np.arange(t - 1, -1, -1))) if t else np.zeros(len(nodes), dtype=np.int64)
            for a in range(tree.num_actions):
                wts = lvl.prob[nodes] * lvl.policy[nodes, a]
                if not np.any(wts > 0):
                    continue
                p = _select_rows(law, prefix, a, maps, t)
                per_z = kernels.cmi_per_z(np.ascontiguousarray(p))
                pz = p.sum(axis=(1, 2))
                cond = np.divide(per_z[z], pz[z], out=np.zeros(len(z)), where=pz[z] > 0)
                total += float(wts @ cond)
        out[t] = _clamp(total, "information gain")
    return out


def information_gain_joint(tree, alpha_spec, window):
    """Same quantity by brute-force enumeration of the full joint law."""
    out = np.zeros(tree.horizon)
    for t in range(tree.horizon):
        if t + 1 >= window:
            continue
        fut = alpha(t + 2, window)
        j = joint_of(tree, [fut, A(t), Y(t), H(t)], alpha_spec)
        out[t] = mutual_info(j, [fut.name], [f"A_{t}", f"Y_{t}"], [f"H_{t}"])
    return out


@dataclass
class InfoRatioReport:
    gamma: np.ndarray
    numerator: np.ndarray
    denominator: np.ndarray
    regret: object
    window: int
    infinite_steps: list

    def rows(self):
        return [
            {"t": t, "regret": self.regret.per_step[t], "gain": self.denominator[t], "gamma": self.gamma[t]}
            for t in range(len(self.gamma))
        ]

    def to_dict(self):
        return {
            "gamma": self.gamma,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "window": self.window,
            "infiniteSteps": self.infinite_steps,
        }


def ratio(num, den):
    """``num / den`` with ``0/0 = 0`` and ``x/0 = inf``."""
    if abs(num) <= ZERO_NUM:
        return 0.0
    if den <= ZERO_DEN:
        return math.inf
    return num / den


def info_ratio(spec, policy, horizon, chi_kind, alpha_spec=None, window=None, method="efficient",
               regret=None, tree=None, tree_budget=DEFAULT_TREE_BUDGET, law_budget=DEFAULT_LAW_BUDGET):
    alpha_spec = alpha_spec or AlphaSpec()
    w = _window(alpha_spec, horizon, window)
    if policy.needs_latent:
        raise PreconditionError("the information ratio is defined for agents, not latent-reading oracles")
    if tree is None:
        tree = build_history_tree(spec, policy, horizon, budget=tree_budget, law_budget=law_budget)
    if regret is None:
        regret = regret_exact(spec, policy, horizon, chi_kind, tree_budget=tree_budget, law_budget=law_budget)
    if method == "efficient":
        den = information_gain_efficient(tree, alpha_spec, w)
    elif method == "joint":
        den = information_gain_joint(tree, alpha_spec, w)
    else:
        raise ValueError(f"unknown method {method!r}")
    num = regret.per_step**2
    gamma = np.array([ratio(n, d) for n, d in zip(num, den)])
    inf_steps = [int(t) for t in np.flatnonzero(np.isinf(gamma))]
    return InfoRatioReport(gamma, num, den, regret, w, inf_steps)


def thm2_check(spec, policy, horizon, chi_kind, alpha_spec=None, window=None, method="efficient",
               tree_budget=DEFAULT_TREE_BUDGET, law_budget=DEFAULT_LAW_BUDGET):
    """``Regret^chi(T) <= sqrt(sum_t Gamma_t * V_T)`` plus the telescoping step."""
    if policy.needs_latent:
        raise PreconditionError("Thm2 check refuses latent-reading oracle policies")
    alpha_spec = alpha_spec or AlphaSpec()
    w = _window(alpha_spec, horizon, window)
    ir = info_ratio(spec, policy, horizon, chi_kind, alpha_spec, w, method,
                    tree_budget=tree_budget, law_budget=law_budget)
    v = predictive_info(spec, alpha_spec, horizon, w, law_budget)
    flags = []
    sum_gamma = float(np.sum(ir.gamma))
    if ir.infinite_steps:
        rhs = math.inf
        flags.append(f"infinite information ratio at steps {ir.infinite_steps}")
    else:
        rhs = math.sqrt(sum_gamma * v.cumulative)
    gain_total = float(np.sum(ir.denominator))
    # Cauchy-Schwarz intermediate: sum_t sqrt(Gamma_t * gain_t)
    cs = math.inf if ir.infinite_steps else float(np.sum(np.sqrt(ir.gamma * ir.denominator)))
    details = {
        "chiKind": OracleProcessKind.parse(chi_kind).value,
        "window": w,
        "gamma": ir.gamma,
        "gain": ir.denominator,
        "regretPerStep": ir.regret.per_step,
        "V": v.cumulative,
        "deltaPerStep": v.per_step,
        "gainTotal": gain_total,
        "telescopingPass": bool(gain_total <= v.cumulative + 1e-9),
        "cauchySchwarzMiddle": cs,
    }
    return BoundReport("Thm2", lhs=ir.regret.total, rhs=rhs, details=details, flags=flags)


def telescoping_check(spec, policy, horizon, alpha_spec=None, window=None):
    """``sum_t I(alpha_{t+2:W}; A_t, R_{t+1,A_t} | H_t) <= V_W``."""
    alpha_spec = alpha_spec or AlphaSpec()
    w = _window(alpha_spec, horizon, window)
    tree = build_history_tree(spec, policy, horizon)
    gains = information_gain_efficient(tree, alpha_spec, w)
    v = predictive_info(spec, alpha_spec, horizon, w)
    return BoundReport("Thm2-telescoping", lhs=float(gains.sum()), rhs=v.cumulative, details={"gain": gains, "window": w})


# ---------------------------------------------------------------------------
# Markov-state bound


def _chain_terms(spec, a, horizon):
    """``I(S_2; S_1)`` and ``I(S_{t+2}; S_{t+1} | S_t)`` for one action's latent chain."""
    from .exact.filtering import latent_marginal

    states, _, prior, q = spec.chain(a)
    n = len(states)
    trans = (1.0 - q) * np.eye(n) + q * prior[None, :]
    _, m1 = latent_marginal(spec, a, 1)
    pair = m1[:, None] * trans
    terms = [cmi_table(pair[None])]
    for t in range(1, horizon):
        _, mt = latent_marginal(spec, a, t)
        triple = mt[:, None, None] * trans[:, :, None] * trans[None, :, :]
        # axes (S_t, S_{t+1}, S_{t+2}) -> (Z, X, Y)
        terms.append(cmi_table(triple))
    return np.array(terms)


def _set_cmi(table, x, y, z):
    """``I(X; Y | Z)`` for possibly overlapping axis sets, via entropies."""

    def h(axes):
        axes = sorted(set(axes))
        drop = tuple(i for i in range(table.ndim) if i not in axes)
        return entropy(table.sum(axis=drop) if drop else table)

    val = h(x + z) + h(y + z) - h(x + y + z) - h(z)
    return _clamp(val, "conditional mutual information")


def prop2_bound(spec, horizon, alpha_spec=None, state="theta", window=None, budget=DEFAULT_LAW_BUDGET):
    """``V_T <= I(S_2; S_1) + sum_{t=1}^{T-1} I(S_{t+2}; S_{t+1} | S_t)``."""
    alpha_spec = alpha_spec or AlphaSpec()
    v = predictive_info(spec, alpha_spec, horizon, window, budget)
    if state == "theta":
        if not isinstance(spec, (ModulatedBernoulliSpec, IidBernoulliSpec)):
            raise UnsupportedError("S_t = theta_t needs a modulated spec")
        spec = as_modulated(spec)
        terms = sum(_chain_terms(spec, a, horizon) for a in range(spec.num_actions))
    elif state == "fullRewards":
        law = exact_law(spec, horizon + 1, budget)
        rows_t = law.rows()
        terms = [_set_cmi(rows_t, [0, 1], [0], [])]
        for t in range(1, horizon):
            past = list(range(t))
            terms.append(_set_cmi(rows_t, list(range(t + 2)), list(range(t + 1)), past))
        terms = np.array(terms)
    else:
        raise ValueError(f"unknown state choice {state!r}")
    return BoundReport(
        "Prop2",
        lhs=v.cumulative,
        rhs=float(np.sum(terms)),
        details={"state": state, "terms": terms, "perStep": v.per_step, "window": v.window},
    )


__all__ = [
    "AlphaSpec", "InfoQuery", "InfoRatioReport", "PredictiveInfoReport", "cmi_table", "entropy",
    "info_ratio", "information_gain_efficient", "information_gain_joint", "mutual_info",
    "predictive_info", "predictive_info_from_law", "prop1_bound", "prop2_bound", "ratio",
    "telescoping_check", "thm2_check",
]
