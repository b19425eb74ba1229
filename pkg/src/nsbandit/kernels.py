"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with numba and a
vectorized numpy version.  The public names point at one or the other
depending on ``NSBANDIT_NUMBA`` (default on; ``0``/``off`` selects numpy).
Both versions are importable directly for benchmarking and cross-checks.
"""
import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_flag = os.environ.get("NSBANDIT_NUMBA", "1").strip().lower()
USE_NUMBA = numba is not None and _flag not in {"0", "false", "no", "off"}


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# --------------------------------------------------------------------------
# conditional mutual information on a dense (Z, X, Y) table


@_njit
def cmi_per_z_numba(p):
    nz, nx, ny = p.shape
    out = np.zeros(nz)
    px = np.zeros(nx)
    py = np.zeros(ny)
    for z in range(nz):
        pz = 0.0
        px[:] = 0.0
        py[:] = 0.0
        for x in range(nx):
            for y in range(ny):
                v = p[z, x, y]
                px[x] += v
                py[y] += v
                pz += v
        if pz <= 0.0:
            continue
        acc = 0.0
        for x in range(nx):
            for y in range(ny):
                v = p[z, x, y]
                if v > 0.0:
                    acc += v * np.log(v * pz / (px[x] * py[y]))
        out[z] = acc
    return out


def cmi_per_z_numpy(p):
    pz = p.sum(axis=(1, 2))
    px = p.sum(axis=2)
    py = p.sum(axis=1)
    num = p * pz[:, None, None]
    den = px[:, :, None] * py[:, None, :]
    mask = p > 0
    terms = np.zeros_like(p)
    terms[mask] = p[mask] * np.log(num[mask] / den[mask])
    return terms.sum(axis=(1, 2))


# --------------------------------------------------------------------------
# transfer-matrix law of every binary reward sequence for one action


@_njit
def path_probs_numba(init, support, q, prior, horizon):
    s = support.shape[0]
    n_out = 1 << horizon
    alpha = np.zeros((n_out, s))
    pred = np.zeros((n_out, s))
    for j in range(s):
        alpha[0, j] = init[j] * (1.0 - support[j])
        alpha[1, j] = init[j] * support[j]
    n = 2
    for _ in range(1, horizon):
        for i in range(n):
            tot = 0.0
            for j in range(s):
                tot += alpha[i, j]
            for j in range(s):
                pred[i, j] = (1.0 - q) * alpha[i, j] + q * tot * prior[j]
        for i in range(n - 1, -1, -1):
            for j in range(s):
                alpha[2 * i, j] = pred[i, j] * (1.0 - support[j])
                alpha[2 * i + 1, j] = pred[i, j] * support[j]
        n *= 2
    out = np.zeros(n_out)
    for i in range(n_out):
        for j in range(s):
            out[i] += alpha[i, j]
    return out


def path_probs_numpy(init, support, q, prior, horizon):
    lik = np.stack([1.0 - support, support])
    alpha = init[None, :] * lik
    for _ in range(1, horizon):
        pred = (1.0 - q) * alpha + q * alpha.sum(axis=1, keepdims=True) * prior
        alpha = (pred[:, None, :] * lik[None, :, :]).reshape(-1, support.shape[0])
    return alpha.sum(axis=1)


# --------------------------------------------------------------------------
# redraw chain: hold the previous latent unless a redraw fires


@_njit
def latent_paths_numba(fresh, redraw):
    ne, nt, na = fresh.shape
    out = np.empty_like(fresh)
    for e in range(ne):
        for a in range(na):
            cur = fresh[e, 0, a]
            out[e, 0, a] = cur
            for t in range(1, nt):
                if redraw[e, t, a]:
                    cur = fresh[e, t, a]
                out[e, t, a] = cur
    return out


def latent_paths_numpy(fresh, redraw):
    ne, nt, na = fresh.shape
    flags = redraw.copy()
    flags[:, 0, :] = True
    steps = np.where(flags, np.arange(nt)[None, :, None], 0)
    last = np.maximum.accumulate(steps, axis=1)
    return np.take_along_axis(fresh, last, axis=1)


# --------------------------------------------------------------------------
# forward filter fed with full reward rows; returns one-step predictive means


@_njit
def full_row_means_numba(rewards, support, prior, init, q):
    ne, nt, na = rewards.shape
    ns = support.shape[1]
    out = np.empty((ne, nt, na))
    b = np.empty(ns)
    for e in range(ne):
        for a in range(na):
            for j in range(ns):
                b[j] = init[a, j]
            for t in range(nt):
                m = 0.0
                for j in range(ns):
                    m += b[j] * support[a, j]
                out[e, t, a] = m
                r = rewards[e, t, a]
                tot = 0.0
                for j in range(ns):
                    lik = support[a, j] if r > 0.5 else 1.0 - support[a, j]
                    b[j] *= lik
                    tot += b[j]
                for j in range(ns):
                    b[j] = (1.0 - q[a]) * b[j] / tot + q[a] * prior[a, j]
    return out


def full_row_means_numpy(rewards, support, prior, init, q):
    ne, nt, na = rewards.shape
    out = np.empty((ne, nt, na))
    b = np.broadcast_to(init, (ne,) + init.shape).copy()
    for t in range(nt):
        out[:, t, :] = (b * support).sum(axis=-1)
        r = rewards[:, t, :, None]
        b = b * np.where(r > 0.5, support, 1.0 - support)
        b /= b.sum(axis=-1, keepdims=True)
        b = (1.0 - q)[:, None] * b + q[:, None] * prior
    return out


if USE_NUMBA:
    cmi_per_z = cmi_per_z_numba
    path_probs = path_probs_numba
    latent_paths = latent_paths_numba
    full_row_means = full_row_means_numba
else:
    cmi_per_z = cmi_per_z_numpy
    path_probs = path_probs_numpy
    latent_paths = latent_paths_numpy
    full_row_means = full_row_means_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
