"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json out.json]

Numba compile time is excluded by a warm-up call.  Outputs are compared
before timing so a speedup is never reported for a wrong result.
"""
import argparse
import json
import timeit

import numpy as np

from nsbandit import kernels


def cases(rng):
    p = rng.random((4096, 8, 16))
    p /= p.sum()
    init = np.full(3, 1 / 3)
    support = np.array([0.1, 0.5, 0.9])
    fresh = rng.random((2000, 200, 2))
    redraw = rng.random((2000, 200, 2)) < 0.2
    rewards = (rng.random((2000, 50, 2)) < 0.5).astype(float)
    sup2 = np.array([[0.1, 0.5, 0.9], [0.2, 0.6, 0.8]])
    prior2 = np.full((2, 3), 1 / 3)
    q = np.array([0.3, 0.6])
    return {
        "cmi_per_z": ((p,), kernels.cmi_per_z_numba, kernels.cmi_per_z_numpy),
        "path_probs": ((init, support, 0.4, init, 16), kernels.path_probs_numba, kernels.path_probs_numpy),
        "latent_paths": ((fresh, redraw), kernels.latent_paths_numba, kernels.latent_paths_numpy),
        "full_row_means": ((rewards, sup2, prior2, prior2, q), kernels.full_row_means_numba,
                           kernels.full_row_means_numpy),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args()
    rows = []
    for name, (inputs, fast, slow) in cases(np.random.default_rng(0)).items():
        a, b = fast(*inputs), slow(*inputs)
        if not np.allclose(a, b, atol=1e-10):
            raise SystemExit(f"{name}: backends disagree")
        t_numba = min(timeit.repeat(lambda: fast(*inputs), number=1, repeat=args.repeat))
        t_numpy = min(timeit.repeat(lambda: slow(*inputs), number=1, repeat=args.repeat))
        rows.append({"kernel": name, "numba_s": t_numba, "numpy_s": t_numpy, "speedup": t_numpy / t_numba})
    print(f"{'kernel':<16}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for r in rows:
        print(f"{r['kernel']:<16}{1e3 * r['numba_s']:>12.3f}{1e3 * r['numpy_s']:>12.3f}{r['speedup']:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
