"""Finite-horizon classification of bandit laws.

Every check compares exact laws in total variation.  A ``True`` verdict
only certifies the horizon of the input law; that restriction is recorded
in each result's metadata.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, PreconditionError
from .exact.law import BINARY, FiniteBanditSpec, _comonotone_row, _independent_row, exact_law

DEFAULT_TOL = 1e-9
DEFAULT_CHECK_BUDGET = 10**7


@dataclass
class ClassificationResult:
    verdict: bool
    witness: dict = None
    metadata: dict = field(default_factory=dict)

    def __bool__(self):
        return bool(self.verdict)

    def to_dict(self):
        return {"verdict": bool(self.verdict), "witness": self.witness, "metadata": self.metadata}


def _tv(p, q):
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def _as_law(spec, horizon=None):
    if isinstance(spec, FiniteBanditSpec) and horizon is None:
        return spec
    return exact_law(spec, horizon if horizon is not None else spec.horizon)


def _meta(law, check, **extra):
    d = {"check": check, "horizon": law.horizon, "numActions": law.num_actions, "scope": f"finite horizon T={law.horizon}"}
    d.update(extra)
    return d


class _MarginalCache:
    """Marginals over coordinate sets, computed once per sorted set."""

    def __init__(self, law):
        self.law = law
        self._cache = {}

    def __call__(self, coords):
        key = tuple(sorted(coords))
        m = self._cache.get(key)
        if m is None:
            m = self.law.marginal(key)
            self._cache[key] = m
        order = [key.index(c) for c in coords]
        return np.transpose(m, order)


def is_stationary(spec, tol=DEFAULT_TOL, horizon=None, budget=DEFAULT_CHECK_BUDGET):
    """Subsequence laws along any action sequence are invariant to the distinct timesteps used.

    Every injection is compared against the leading timesteps ``1..k``; the
    first failure in order of increasing ``k`` is the witness.
    """
    law = _as_law(spec, horizon)
    T, na = law.horizon, law.num_actions
    need = sum(na**k * math.perm(T, k) for k in range(1, T + 1))
    if need > budget:
        raise BudgetError("stationarity check", need, budget)
    marg = _MarginalCache(law)
    for k in range(1, T + 1):
        for acts in itertools.product(range(na), repeat=k):
            ref = marg(list(zip(range(k), acts)))
            for tau in itertools.permutations(range(T), k):
                if tau == tuple(range(k)):
                    continue
                other = marg(list(zip(tau, acts)))
                d = _tv(ref, other)
                if d > tol:
                    witness = {
                        "actions": list(acts),
                        "timesteps": [t + 1 for t in range(k)],
                        "otherTimesteps": [t + 1 for t in tau],
                        "law": ref.ravel(),
                        "otherLaw": other.ravel(),
                        "tv": d,
                    }
                    return ClassificationResult(False, witness, _meta(law, "stationary", tol=tol))
    return ClassificationResult(True, None, _meta(law, "stationary", tol=tol, comparisons=need))


def is_exchangeable(spec, tol=DEFAULT_TOL, horizon=None, exhaustive=False):
    """Row-sequence law invariant under permutations of time.

    Transpositions generate the symmetric group, so checking all of them is
    exact; ``exhaustive`` additionally tries every permutation.
    """
    law = _as_law(spec, horizon)
    T = law.horizon
    rows = law.rows()
    if exhaustive:
        perms = [p for p in itertools.permutations(range(T)) if p != tuple(range(T))]
    else:
        perms = []
        for i, j in itertools.combinations(range(T), 2):
            p = list(range(T))
            p[i], p[j] = j, i
            perms.append(tuple(p))
    for p in perms:
        d = _tv(rows, np.transpose(rows, p))
        if d > tol:
            moved = [t + 1 for t in range(T) if p[t] != t]
            witness = {"permutation": [x + 1 for x in p], "moved": moved, "tv": d}
            if len(moved) == 2:
                witness["transposition"] = moved
            return ClassificationResult(False, witness, _meta(law, "exchangeable", tol=tol, exhaustive=exhaustive))
    return ClassificationResult(True, None, _meta(law, "exchangeable", tol=tol, exhaustive=exhaustive, permutations=len(perms)))


def are_equivalent(spec_a, spec_b, tol=DEFAULT_TOL, horizon=None, budget=DEFAULT_CHECK_BUDGET):
    """Equal reward-path laws along every action sequence.

    This decides whether every policy generates the same history law in both
    bandits without enumerating policies.
    """
    la, lb = _as_law(spec_a, horizon), _as_law(spec_b, horizon)
    if la.num_actions != lb.num_actions or la.horizon != lb.horizon:
        raise PreconditionError("equivalence needs matching action sets and horizons")
    if not np.array_equal(la.alphabet, lb.alphabet):
        raise PreconditionError("equivalence needs a common reward alphabet")
    T, na = la.horizon, la.num_actions
    need = sum(na**k for k in range(1, T + 1))
    if need > budget:
        raise BudgetError("equivalence check", need, budget)
    ma, mb = _MarginalCache(la), _MarginalCache(lb)
    for k in range(1, T + 1):
        for acts in itertools.product(range(na), repeat=k):
            coords = list(enumerate(acts))
            pa, pb = ma(coords), mb(coords)
            d = _tv(pa, pb)
            if d > tol:
                witness = {"actions": list(acts), "timesteps": list(range(1, k + 1)), "law": pa.ravel(), "otherLaw": pb.ravel(), "tv": d}
                return ClassificationResult(False, witness, _meta(la, "equivalent", tol=tol))
    return ClassificationResult(True, None, _meta(la, "equivalent", tol=tol, actionSequences=need))


def diagonal_block_law(law, blocks):
    na = law.num_actions
    coords = [(n * na + a, a) for n in range(blocks) for a in range(na)]
    return law.marginal(coords).reshape((law.row_width,) * blocks)


def is_strongly_stationary(spec, tol=DEFAULT_TOL, horizon=None, blocks=None):
    """Stationary, and rows ``1..K`` have the law of the diagonal blocks."""
    law = _as_law(spec, horizon)
    T, na = law.horizon, law.num_actions
    kmax = T // na if blocks is None else int(blocks)
    if kmax < 1 or na * kmax > T:
        raise PreconditionError(f"need T >= |A| * K, got T={T}, |A|={na}, K={kmax}")
    st = is_stationary(law, tol)
    if not st.verdict:
        witness = {"reason": "not stationary", "stationarity": st.witness}
        return ClassificationResult(False, witness, _meta(law, "stronglyStationary", tol=tol, blocks=kmax))
    for k in range(1, kmax + 1):
        rows = law.row_marginal(range(k))
        diag = diagonal_block_law(law, k)
        d = _tv(rows, diag)
        if d > tol:
            witness = {"reason": "block law differs", "blocks": k, "rowLaw": rows.ravel(), "blockLaw": diag.ravel(), "tv": d}
            return ClassificationResult(False, witness, _meta(law, "stronglyStationary", tol=tol, blocks=kmax))
    return ClassificationResult(True, None, _meta(law, "stronglyStationary", tol=tol, blocks=kmax))


# ---------------------------------------------------------------------------
# random instances for the theorem harnesses


def _countermonotone_row(theta):
    p0, p1 = theta
    row = np.zeros((2, 2))
    row[1, 1] = max(0.0, p0 + p1 - 1.0)
    row[1, 0] = p0 - row[1, 1]
    row[0, 1] = p1 - row[1, 1]
    row[0, 0] = 1.0 - row[1, 1] - row[1, 0] - row[0, 1]
    return row


COUPLINGS = {
    "independent": _independent_row,
    "comonotone": _comonotone_row,
    "countermonotone": _countermonotone_row,
}


def mixture_law(weights, means, couplings):
    """Law of rows independent given a mixture index ``z``.

    ``means[z, t, a]`` is ``P(R_{t+1,a} = 1 | z)``; ``couplings[z][t]`` names
    the within-row dependence.
    """
    means = np.asarray(means, dtype=float)
    nz, T, na = means.shape
    law = np.zeros((2,) * (T * na))
    for z in range(nz):
        part = np.ones(())
        for t in range(T):
            part = np.multiply.outer(part, COUPLINGS[couplings[z][t]](means[z, t]))
        law += weights[z] * part
    return FiniteBanditSpec(T, na, BINARY, law.ravel())


def _coupling_names(na):
    return ["independent", "comonotone", "countermonotone"] if na == 2 else ["independent", "comonotone"]


def _random_means(rng, nz, T, na, time_invariant):
    grid = np.round(np.arange(1, 10) / 10, 1)
    if time_invariant:
        m = rng.choice(grid, size=(nz, 1, na))
        return np.repeat(m, T, axis=1)
    return rng.choice(grid, size=(nz, T, na))


def _weights(rng, nz):
    w = rng.integers(1, 5, size=nz).astype(float)
    return w / w.sum()


def random_thm3_pair(rng):
    """Two bandits with identical path laws but different within-row couplings."""
    T = int(rng.integers(1, 5))
    na = int(rng.integers(1, 3))
    nz = int(rng.integers(1, 3))
    means = _random_means(rng, nz, T, na, time_invariant=bool(rng.integers(0, 2)))
    w = _weights(rng, nz)
    names = _coupling_names(na)
    ca = [[names[int(rng.integers(len(names)))] for _ in range(T)] for _ in range(nz)]
    cb = [[names[int(rng.integers(len(names)))] for _ in range(T)] for _ in range(nz)]
    return mixture_law(w, means, ca), mixture_law(w, means, cb)


def random_strongly_stationary(rng, T, na, nz=None):
    nz = int(rng.integers(1, 3)) if nz is None else nz
    means = _random_means(rng, nz, T, na, time_invariant=True)
    w = _weights(rng, nz)
    return (w, means), mixture_law(w, means, [["independent"] * T] * nz)


def random_thm5_pair(rng):
    """A pair of strongly stationary laws; half the variants are equal in law."""
    from .zoo import make_strongly_stationary_surrogate

    T = int(rng.integers(1, 5))
    na = int(rng.integers(1, min(T, 2) + 1))
    (w, means), a = random_strongly_stationary(rng, T, na)
    variant = int(rng.integers(0, 4))
    if variant == 0:
        # split the first component into two identical halves
        w2 = np.concatenate([[w[0] / 2, w[0] / 2], w[1:]])
        m2 = np.concatenate([means[:1], means])
        b = mixture_law(w2, m2, [["independent"] * T] * len(w2))
    elif variant == 1:
        _, b = random_strongly_stationary(rng, T, na)
    elif variant == 2:
        # recouple within rows over a longer horizon, then take the surrogate
        names = _coupling_names(na)
        long_means = np.repeat(means[:, :1], T * na, axis=1)
        coupled = mixture_law(w, long_means, [[names[int(rng.integers(len(names)))]] * (T * na) for _ in range(len(w))])
        b = make_strongly_stationary_surrogate(coupled, blocks=T, check=False)
    else:
        m2 = means.copy()
        m2[0, :, 0] += 0.1 if m2[0, 0, 0] < 0.85 else -0.1
        b = mixture_law(w, m2, [["independent"] * T] * len(w))
    return a, b, variant


@dataclass
class HarnessReport:
    kind: str
    trials: int
    violations: list
    counts: dict = field(default_factory=dict)

    @property
    def passed(self):
        return not self.violations

    def to_dict(self):
        return {"kind": self.kind, "trials": self.trials, "violations": self.violations, "pass": self.passed, "counts": self.counts}


def theorem_harness(kind, seed=0, num_trials=200, tol=DEFAULT_TOL):
    """Randomised checks of the equivalence theorems on tiny binary bandits.

    ``Thm3``: equivalent pairs get the same stationarity verdict.
    ``Thm5``: for strongly stationary pairs, equivalence holds iff the full
    finite-horizon laws coincide.
    """
    rng = np.random.default_rng(seed)
    violations = []
    counts = {}
    for trial in range(num_trials):
        if kind == "Thm3":
            a, b = random_thm3_pair(rng)
            eq = are_equivalent(a, b, tol).verdict
            sa, sb = is_stationary(a, tol).verdict, is_stationary(b, tol).verdict
            counts[("stationary" if sa else "nonstationary")] = counts.get("stationary" if sa else "nonstationary", 0) + 1
            if not eq:
                violations.append({"trial": trial, "problem": "generated pair not equivalent"})
            elif sa != sb:
                violations.append({"trial": trial, "problem": "stationarity verdicts differ", "verdicts": [sa, sb]})
        elif kind == "Thm5":
            a, b, variant = random_thm5_pair(rng)
            for name, s in (("first", a), ("second", b)):
                if not is_strongly_stationary(s, tol).verdict:
                    violations.append({"trial": trial, "problem": f"{name} member not strongly stationary", "variant": variant})
            eq = are_equivalent(a, b, tol).verdict
            same = a.total_variation(b) <= tol
            key = "equivalent" if eq else "distinct"
            counts[key] = counts.get(key, 0) + 1
            if eq != same:
                violations.append({"trial": trial, "problem": "equivalence and equality disagree", "variant": variant,
                                   "equivalent": eq, "tv": a.total_variation(b)})
        else:
            raise ValueError(f"unknown harness kind {kind!r}")
    return HarnessReport(kind, num_trials, violations, counts)


def relation_check(seed=0, num_pairs=50, num_triples=50, tol=DEFAULT_TOL):
    """Reflexivity, symmetry and transitivity of equivalence on random laws.

    Instances share horizon and action count and come from a few base laws
    with random recouplings, so many triples are non-trivially related.
    """
    rng = np.random.default_rng(seed)
    T, na = 3, 2
    bases = [(_weights(rng, 2), _random_means(rng, 2, T, na, bool(rng.integers(0, 2)))) for _ in range(2)]
    names = _coupling_names(na)

    def draw():
        w, m = bases[int(rng.integers(len(bases)))]
        return mixture_law(w, m, [[names[int(rng.integers(len(names)))] for _ in range(T)] for _ in range(len(w))])

    problems = []
    checked = {"reflexive": 0, "symmetric": 0, "transitive": 0, "transitiveNontrivial": 0}
    for _ in range(num_pairs):
        a, b = draw(), draw()
        if not are_equivalent(a, a, tol).verdict:
            problems.append("reflexivity")
        checked["reflexive"] += 1
        if are_equivalent(a, b, tol).verdict != are_equivalent(b, a, tol).verdict:
            problems.append("symmetry")
        checked["symmetric"] += 1
    for _ in range(num_triples):
        a, b, c = draw(), draw(), draw()
        ab, bc, ac = (are_equivalent(x, y, tol).verdict for x, y in ((a, b), (b, c), (a, c)))
        if ab and bc:
            checked["transitiveNontrivial"] += 1
            if not ac:
                problems.append("transitivity")
        checked["transitive"] += 1
    return {"pass": not problems, "problems": problems, "checked": checked}
