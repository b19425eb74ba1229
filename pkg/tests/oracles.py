"""Slow, independent reference computations used to freeze expected values."""
import itertools

import numpy as np


def brute_force_modulated_law(spec, horizon):
    """Sum over every latent value path of every action jointly."""
    na = spec.num_actions
    chains = [spec.chain(a) for a in range(na)]
    law = {}
    paths = [list(itertools.product(range(len(c[0])), repeat=horizon)) for c in chains]
    for combo in itertools.product(*paths):
        w = 1.0
        for a, path in enumerate(combo):
            states, init, prior, q = chains[a]
            w *= init[path[0]]
            for i, j in zip(path, path[1:]):
                w *= (1 - q) * (i == j) + q * prior[j]
        if w == 0:
            continue
        for bits in itertools.product((0, 1), repeat=horizon * na):
            p = w
            for t in range(horizon):
                for a in range(na):
                    th = chains[a][0][combo[a][t]]
                    p *= th if bits[t * na + a] else 1 - th
            law[bits] = law.get(bits, 0.0) + p
    out = np.zeros(2 ** (horizon * na))
    for bits, p in law.items():
        out[int("".join(map(str, bits)), 2)] = p
    return out


def row_law_by_partition(theta):
    """Law of ``(1{U < theta_a})_a`` by integrating over the cells of ``U``."""
    cuts = sorted({0.0, 1.0, *map(float, theta)})
    out = {}
    for lo, hi in zip(cuts, cuts[1:]):
        mid = 0.5 * (lo + hi)
        key = tuple(int(mid < th) for th in theta)
        out[key] = out.get(key, 0.0) + (hi - lo)
    return out


def brute_force_noise_law(spec, horizon):
    na = spec.num_actions
    out = np.zeros(2 ** (horizon * na))
    for combo in itertools.product(*[list(zip(d.support, d.probs)) for d in spec.mean_prior]):
        theta = [v for v, _ in combo]
        w = float(np.prod([p for _, p in combo]))
        indep = {}
        for bits in itertools.product((0, 1), repeat=na):
            indep[bits] = float(np.prod([th if b else 1 - th for th, b in zip(theta, bits)]))
        shared = row_law_by_partition(theta)
        rows = []
        for t in range(horizon):
            dependent_step = spec.mode == "dependent" and (t + 1) % 2 == 0
            rows.append(shared if dependent_step else indep)
        for pattern in itertools.product(*[list(r.items()) for r in rows]):
            bits = sum((list(k) for k, _ in pattern), [])
            p = w * float(np.prod([v for _, v in pattern]))
            out[int("".join(map(str, bits)), 2)] += p
    return out


def mi_from_samples(x, y):
    """Plug-in mutual information (nats) of two integer sample arrays."""
    joint = np.zeros((x.max() + 1, y.max() + 1))
    np.add.at(joint, (x, y), 1.0)
    joint /= joint.sum()
    px, py = joint.sum(1, keepdims=True), joint.sum(0, keepdims=True)
    m = joint > 0
    return float((joint[m] * np.log(joint[m] / (px @ py)[m])).sum())


def _cmi_from_counts(joint):
    """``I(X; Y | Z)`` from a dict keyed by ``(z, x, y)``."""
    import math
    from collections import defaultdict

    pz, pxz, pyz = defaultdict(float), defaultdict(float), defaultdict(float)
    for (z, x, y), p in joint.items():
        pz[z] += p
        pxz[z, x] += p
        pyz[z, y] += p
    return sum(p * math.log(p * pz[z] / (pxz[z, x] * pyz[z, y])) for (z, x, y), p in joint.items() if p > 0)


def brute_force_info_gain(law, policy, horizon, window):
    """``I(R_{t+2:W}; A_t, Y_t | H_t)`` by walking every (outcome, action path) pair."""
    gains = []
    outcomes = law.restrict(window).outcomes() if window < law.horizon else law.outcomes()
    for t in range(horizon):
        joint = {}
        for tensor, p in outcomes:
            stack = [((), p)]
            for s in range(t + 1):
                nxt = []
                for h, w in stack:
                    pi = policy.action_distribution(h)
                    for a, pa in enumerate(pi):
                        if pa > 0:
                            nxt.append((h + ((a, float(tensor[s, a])),), w * pa))
                stack = nxt
            future = tuple(map(tuple, tensor[t + 1: window].tolist()))
            for h, w in stack:
                key = (h[:-1], h[-1], future)
                joint[key] = joint.get(key, 0.0) + w
        gains.append(_cmi_from_counts(joint) if t + 1 < window else 0.0)
    return np.array(gains)
