"""Generalised regret, the dynamic-regret floor and variation metrics."""
from __future__ import annotations

import numpy as np

from . import kernels
from .agents import OracleProcessKind, solve_bayes_optimal
from .core import run_batch
from .errors import PreconditionError, UnrealizableError, UnsupportedError
from .exact.filtering import expected_max_latent, latent_law, latent_marginal
from .exact.law import DEFAULT_LAW_BUDGET, FiniteBanditSpec, exact_law
from .exact.tree import DEFAULT_TREE_BUDGET, build_history_tree
from .reports import BoundReport, RegretReport, VariationReport
from .zoo import IidBernoulliSpec, ModulatedBernoulliSpec, NoiseCouplingSpec, as_modulated, make_bandit

LATENT_SPECS = (ModulatedBernoulliSpec, IidBernoulliSpec, NoiseCouplingSpec)


def _latent_agent_reward(spec, policy, horizon):
    if not getattr(policy, "history_free", False):
        raise UnsupportedError("exact evaluation of latent-reading policies needs a history-free oracle")
    out = np.empty(horizon)
    for t in range(horizon):
        values, probs = latent_law(spec, t + 1)
        out[t] = sum(p * (policy.action_distribution((), v) @ v) for v, p in zip(values, probs))
    return out


def past_rewards_benchmark(law, horizon):
    """``E[max_a E[R_{t+1, a} | R_{1:t}]]`` for ``t = 0..horizon-1``."""
    vals = law.row_values()
    out = np.empty(horizon)
    for t in range(horizon):
        m = law.row_marginal(range(t + 1)).reshape(-1, law.row_width) @ vals
        out[t] = m.max(axis=1).sum()
    return out


def regret_exact(spec, policy, horizon, chi_kind, optimal=None, tree_budget=DEFAULT_TREE_BUDGET,
                 law_budget=DEFAULT_LAW_BUDGET):
    """Exact ``Regret^chi`` per step.

    ``optimal`` is a solved ``(policy, value)`` pair reused for the
    OptimalHistory benchmark; it is solved on demand otherwise.
    """
    chi = OracleProcessKind.parse(chi_kind)
    if policy.needs_latent:
        if not isinstance(spec, LATENT_SPECS):
            raise UnrealizableError("latent-reading policy on a spec without latents")
        agent = _latent_agent_reward(spec, policy, horizon)
    else:
        tree = build_history_tree(spec, policy, horizon, budget=tree_budget, law_budget=law_budget)
        agent = np.array([tree.expected_reward(t) for t in range(horizon)])

    if chi is OracleProcessKind.DYNAMIC_THETA:
        if not isinstance(spec, LATENT_SPECS):
            raise UnrealizableError("DynamicTheta needs a latent-exposing bandit")
        bench = np.array([expected_max_latent(spec, t + 1) for t in range(horizon)])
    elif chi is OracleProcessKind.PAST_REWARDS:
        bench = past_rewards_benchmark(exact_law(spec, horizon, law_budget), horizon)
    elif chi is OracleProcessKind.INVARIANT_LAW:
        from .equivalence import is_stationary

        law = exact_law(spec, horizon, law_budget)
        if not is_stationary(law).verdict:
            raise UnrealizableError("InvariantLaw benchmark needs a stationary bandit")
        first = law.row_marginal([0]) @ law.row_values()
        bench = np.full(horizon, first.max())
    else:
        star = optimal[0] if optimal is not None else solve_bayes_optimal(spec, horizon, tree_budget)[0]
        star_tree = build_history_tree(spec, star, horizon, budget=tree_budget, law_budget=law_budget)
        bench = np.array([star_tree.expected_best_prediction(t) for t in range(horizon)])
    return RegretReport(chi, bench - agent, bench, agent)


def _padded_chains(spec):
    spec = as_modulated(spec)
    chains = [spec.chain(a) for a in range(spec.num_actions)]
    width = max(len(c[0]) for c in chains)
    support = np.zeros((spec.num_actions, width))
    prior = np.zeros_like(support)
    init = np.zeros_like(support)
    for a, (states, ip, pp, _) in enumerate(chains):
        n = len(states)
        support[a, :n], init[a, :n], prior[a, :n] = states, ip, pp
    return support, prior, init, np.array(spec.redraw)


def regret_monte_carlo(spec, policy, horizon, chi_kind, num_episodes, seed, threads=1, policy_stream=0,
                       logs=None):
    """Episode-average estimate of ``Regret^chi`` with standard errors.

    Pass ``logs`` to reuse a batch already simulated with the same
    arguments (e.g. to score one batch against several benchmarks).
    """
    chi = OracleProcessKind.parse(chi_kind)
    if logs is None:
        logs = run_batch(make_bandit(spec), policy, horizon, num_episodes, seed, threads, policy_stream)
    observed = np.stack([log.rewards for log in logs])
    if chi is OracleProcessKind.DYNAMIC_THETA:
        if logs[0].latents is None:
            raise UnrealizableError("DynamicTheta needs a latent-exposing bandit")
        bench = np.stack([log.latents.max(axis=1) for log in logs])
    elif chi is OracleProcessKind.PAST_REWARDS:
        if not isinstance(spec, (ModulatedBernoulliSpec, IidBernoulliSpec)):
            raise UnsupportedError("per-episode PastRewards benchmark needs a modulated spec")
        full = np.stack([log.full_rewards for log in logs])
        bench = kernels.full_row_means(full, *_padded_chains(spec)).max(axis=2)
    else:
        raise UnsupportedError(f"{chi.value} is not estimable per episode")
    diff = bench - observed
    n = len(logs)
    scale = np.sqrt(n) if n > 1 else np.inf
    ddof = 1 if n > 1 else 0
    return RegretReport(
        chi,
        diff.mean(axis=0),
        bench.mean(axis=0),
        observed.mean(axis=0),
        mode="monteCarlo",
        num_episodes=n,
        stderr=diff.std(axis=0, ddof=ddof) / scale,
        cumulative_stderr=np.cumsum(diff, axis=1).std(axis=0, ddof=ddof) / scale,
    )


def prior_gap(spec):
    """``E[max_a theta_{1,a}] - max_a E[theta_{1,a}]`` under the product prior."""
    spec = as_modulated(spec)
    means = max(p.mean for p in spec.prior)
    return expected_max_latent(spec, 1) - means


def dynamic_regret_floor(spec):
    """Per-step lower bound ``q * (E[max theta] - max E[theta])`` on dynamic regret."""
    if isinstance(spec, NoiseCouplingSpec) or isinstance(spec, FiniteBanditSpec):
        raise UnsupportedError("the floor is defined for modulated Bernoulli bandits")
    spec = as_modulated(spec)
    if not spec.is_homogeneous:
        raise UnsupportedError(f"floor needs a common redraw probability, got {list(spec.redraw)}")
    if not spec.starts_stationary:
        raise UnsupportedError("floor needs the latent chain to start from its prior")
    return spec.redraw[0] * prior_gap(spec)


def thm1_check(spec, policy, horizon, report=None):
    """Exact dynamic regret of ``policy`` against ``horizon * floor``."""
    floor = dynamic_regret_floor(spec)
    if report is None:
        report = regret_exact(spec, policy, horizon, OracleProcessKind.DYNAMIC_THETA)
    return BoundReport(
        "Thm1",
        lhs=horizon * floor,
        rhs=report.total,
        details={"floorPerStep": floor, "regretPerStep": report.per_step, "horizon": horizon},
    )


def floor_trend(spec, grid, horizon):
    """``T * floor`` along a redraw-probability grid; flags strict increase."""
    values = [horizon * dynamic_regret_floor(spec.with_redraw(q)) for q in grid]
    increasing = all(b > a for a, b in zip(values, values[1:]))
    return values, increasing, horizon * prior_gap(spec)


def _expected_max_independent(dists):
    """``E[max_a X_a]`` for independent non-negative finite ``X_a``."""
    grid = np.unique(np.concatenate([v for v, _ in dists]))
    cdf = np.ones(len(grid))
    for v, p in dists:
        order = np.argsort(v)
        cum = np.cumsum(p[order])
        idx = np.searchsorted(v[order], grid, side="right") - 1
        cdf *= np.where(idx >= 0, cum[np.maximum(idx, 0)], 0.0)
    mass = np.diff(np.concatenate([[0.0], cdf]))
    return float(grid @ mass)


def variation_metrics(spec, horizon):
    """Exact temporal variation and variation count summed over ``t = 1..T-1``."""
    spec = as_modulated(spec)
    na = spec.num_actions
    steps = max(horizon - 1, 0)
    tv = np.zeros(steps)
    count = np.zeros(steps)
    change = np.zeros((steps, na))
    for t in range(1, horizon):
        dists = []
        for a in range(na):
            states, _, prior, q = spec.chain(a)
            _, m = latent_marginal(spec, a, t)
            pair = m[:, None] * ((1.0 - q) * np.eye(len(states)) + q * prior[None, :])
            diff = np.abs(states[:, None] - states[None, :])
            dists.append((diff.ravel(), pair.ravel()))
            change[t - 1, a] = pair[diff > 0].sum()
        tv[t - 1] = _expected_max_independent(dists)
        count[t - 1] = 1.0 - np.prod(1.0 - change[t - 1])
    return VariationReport(horizon, tv, count, change)
