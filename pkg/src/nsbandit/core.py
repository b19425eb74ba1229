"""Bandits, policies, histories and the interaction loop.

Timestep convention: the action chosen at step ``t`` (0-based) earns the
reward in row ``t`` of the reward matrix, i.e. ``R_{t+1, A_t}`` in 1-based
reward indexing.  Histories are tuples of ``(action, reward)`` pairs so they
can key dictionaries.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PolicyContractError
from .rng import BANDIT, POLICY, RngSeed, generator

History = tuple  # tuple[tuple[int, float], ...]

PROB_TOL = 1e-12


class BanditProcess:
    """A sampler of reward matrices ``R_{1:T}`` (and optionally latents)."""

    num_actions: int

    def sample_episode(self, horizon, rng):
        """Return ``(rewards, latents)``; rewards has shape ``(horizon, A)``.

        ``latents`` is ``None`` or an array of the same shape whose row ``t``
        holds the mean-reward vector behind reward row ``t``.
        """
        raise NotImplementedError


class Policy:
    num_actions: int
    # oracles read the latent of the step being played and are not agents
    needs_latent = False

    def action_distribution(self, history):
        raise NotImplementedError


def check_distribution(p, num_actions, timestep=None):
    p = np.asarray(p, dtype=float)
    if p.shape != (num_actions,):
        raise PolicyContractError(f"expected {num_actions} probabilities, got shape {p.shape}", timestep)
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise PolicyContractError(f"invalid probabilities {p.tolist()}", timestep)
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise PolicyContractError(f"probabilities sum to {p.sum()!r}", timestep)
    return p


def sample_action(p, u):
    """Inverse-CDF draw that never lands on a zero-probability action."""
    a = int(np.searchsorted(np.cumsum(p), u, side="right"))
    if a >= len(p) or p[a] <= 0:
        a = int(np.flatnonzero(p > 0)[-1])
    return a


@dataclass(frozen=True)
class EpisodeLog:
    seed: RngSeed
    actions: np.ndarray
    full_rewards: np.ndarray
    latents: Optional[np.ndarray] = None

    @property
    def rewards(self):
        """Observed rewards, one per step."""
        return self.full_rewards[np.arange(len(self.actions)), self.actions]

    @property
    def history(self):
        return tuple((int(a), float(r)) for a, r in zip(self.actions, self.rewards))

    @property
    def horizon(self):
        return len(self.actions)

    def to_json_line(self):
        rec = {
            "seed": self.seed.to_list(),
            "actions": [int(a) for a in self.actions],
            "rewards": [float(r) for r in self.rewards],
            "fullRewards": self.full_rewards.tolist(),
        }
        if self.latents is not None:
            rec["latents"] = self.latents.tolist()
        return json.dumps(rec, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line):
        rec = json.loads(line)
        latents = rec.get("latents")
        return cls(
            seed=RngSeed(*rec["seed"]),
            actions=np.asarray(rec["actions"], dtype=np.int64),
            full_rewards=np.asarray(rec["fullRewards"], dtype=np.float64),
            latents=None if latents is None else np.asarray(latents, dtype=np.float64),
        )

    def __eq__(self, other):
        if not isinstance(other, EpisodeLog):
            return NotImplemented
        return self.to_json_line() == other.to_json_line()

    __hash__ = None


def run_episode(bandit, policy, horizon, seed, policy_stream=0):
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    rewards, latents = bandit.sample_episode(horizon, generator(seed, BANDIT))
    rewards = np.asarray(rewards, dtype=np.float64)
    if policy.needs_latent and latents is None:
        raise PolicyContractError("oracle policy needs a latent-exposing bandit")
    u = generator(seed, POLICY, policy_stream).random(horizon)
    actions = np.empty(horizon, dtype=np.int64)
    hist = []
    for t in range(horizon):
        if policy.needs_latent:
            p = policy.action_distribution(tuple(hist), latents[t])
        else:
            p = policy.action_distribution(tuple(hist))
        p = check_distribution(p, bandit.num_actions, t)
        a = sample_action(p, u[t])
        actions[t] = a
        hist.append((a, float(rewards[t, a])))
    return EpisodeLog(seed, actions, rewards, latents)


def run_batch(bandit, policy, horizon, num_episodes, master_seed, threads=1, policy_stream=0):
    if num_episodes < 1:
        raise ValueError("num_episodes must be >= 1")

    def one(i):
        return run_episode(bandit, policy, horizon, RngSeed(int(master_seed), i), policy_stream)

    if threads <= 1:
        return [one(i) for i in range(num_episodes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(num_episodes)))


def write_jsonl(path, logs):
    with open(path, "w") as fh:
        for log in logs:
            fh.write(log.to_json_line() + "\n")


def read_jsonl(path):
    with open(path) as fh:
        return [EpisodeLog.from_json_line(line) for line in fh if line.strip()]
