"""Command-line entry point: ``nsbandit run|sweep|classify|equiv``.

Exit codes: 0 every requested check passed, 1 some check failed,
2 invalid config or spec, 3 an enumeration exceeded its budget.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .agents import FilteredGreedy, OracleProcessKind, make_agent, solve_bayes_optimal
from .config import load_config, load_spec, sha256_of
from .core import run_batch, write_jsonl
from .equivalence import are_equivalent, is_exchangeable, is_stationary, is_strongly_stationary
from .errors import BudgetError, ConfigError, NsBanditError, UnrealizableError, UnsupportedError
from .exact.law import DEFAULT_LAW_BUDGET, FiniteBanditSpec, exact_law
from .exact.tree import DEFAULT_TREE_BUDGET
from .info import predictive_info, prop1_bound, prop2_bound, thm2_check
from .regret import (
    dynamic_regret_floor,
    floor_trend,
    regret_exact,
    regret_monte_carlo,
    thm1_check,
    variation_metrics,
)
from .reports import dumps, table, to_csv
from .zoo import IidBernoulliSpec, ModulatedBernoulliSpec, as_modulated, make_bandit

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BUDGET = 0, 1, 2, 3


class Artifacts:
    """Writes output files stamped with the config hash and seed."""

    def __init__(self, out, sha, seed):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.sha = sha
        self.seed = seed
        self.provenance = {"configSha256": sha, "seed": seed, "tool": "nsbandit", "version": __version__}

    def csv(self, name, rows):
        (self.out / name).write_text(to_csv(rows, f"config_sha256={self.sha} seed={self.seed}"))

    def json(self, name, payload):
        (self.out / name).write_text(dumps({"provenance": self.provenance, **payload}))

    def text(self, name, body):
        (self.out / name).write_text(f"# config_sha256={self.sha} seed={self.seed}\n" + body)


class Budgets:
    def __init__(self, budget=None):
        self.tree = budget or DEFAULT_TREE_BUDGET
        self.law = budget or DEFAULT_LAW_BUDGET


def _record(checks, check, target, passed, **extra):
    rec = {"check": check, "target": target, "pass": bool(passed)}
    rec.update(extra)
    checks.append(rec)
    return rec


def _bound_record(checks, target, report):
    return _record(checks, report.name, target, report.passed, lhs=report.lhs, rhs=report.rhs, slack=report.slack)


def _is_modulated(spec):
    return isinstance(spec, (ModulatedBernoulliSpec, IidBernoulliSpec))


def _classify(law, tol=1e-9):
    out = {"stationary": is_stationary(law, tol).to_dict(), "exchangeable": is_exchangeable(law, tol).to_dict()}
    if law.horizon >= law.num_actions:
        out["stronglyStationary"] = is_strongly_stationary(law, tol).to_dict()
    return out


def run_experiment(cfg, out, seed, threads, budget=None):
    art = Artifacts(out, cfg.sha256, seed)
    bud = Budgets(budget)
    T = cfg.horizon
    checks, bounds, regrets, classes = [], [], [], {}
    for bid, spec in cfg.bandits.items():
        agents = {}
        for a in cfg.agents:
            params = dict(a.params)
            if a.type == "bayesOptimal":
                params.setdefault("budget", bud.tree)
            try:
                agents[a.id] = (a, make_agent(a.type, spec, T, **params))
            except (TypeError, UnsupportedError) as exc:
                _record(checks, "agent", f"{bid}_{a.id}", True, skipped=str(exc))
        batches = {}

        def batch(aid):
            if aid not in batches:
                acfg, pol = agents[aid]
                batches[aid] = run_batch(make_bandit(spec), pol, T, cfg.episodes, seed, threads, acfg.seed_stream)
            return batches[aid]

        for check in cfg.checks:
            if check == "regret":
                for aid, (acfg, pol) in agents.items():
                    for chi in cfg.chi_kinds:
                        tag = f"{bid}_{aid}_{chi.value}"
                        try:
                            rep = regret_exact(spec, pol, T, chi, tree_budget=bud.tree, law_budget=bud.law)
                        except (UnrealizableError, UnsupportedError) as exc:
                            _record(checks, "regret", tag, True, skipped=str(exc))
                            continue
                        art.csv(f"regret_{tag}.csv", rep.rows())
                        regrets.append({"target": tag, **rep.to_dict()})
                        _record(checks, "regret", tag, True, total=rep.total)
                        if cfg.monte_carlo and chi in (OracleProcessKind.DYNAMIC_THETA, OracleProcessKind.PAST_REWARDS):
                            try:
                                mc = regret_monte_carlo(spec, pol, T, chi, cfg.episodes, seed, threads,
                                                        acfg.seed_stream, logs=batch(aid))
                            except (UnrealizableError, UnsupportedError):
                                continue
                            art.csv(f"regret_{tag}_mc.csv", mc.rows())
                            z = (mc.total - rep.total) / mc.cumulative_stderr[-1] if mc.cumulative_stderr[-1] > 0 else 0.0
                            regrets.append({"target": tag, **mc.to_dict()})
                            _record(checks, "regret-mc", tag, True, total=mc.total, zScore=z)
                if cfg.save_episodes:
                    for aid, (acfg, pol) in agents.items():
                        if pol.needs_latent and isinstance(spec, FiniteBanditSpec):
                            continue
                        write_jsonl(art.out / f"episodes_{bid}_{aid}.jsonl", batch(aid))
            elif check == "thm1":
                if not _is_modulated(spec):
                    continue
                for aid, (_, pol) in agents.items():
                    if pol.needs_latent:
                        continue
                    rep = thm1_check(spec, pol, T)
                    bounds.append({"target": f"{bid}_{aid}", **rep.to_dict()})
                    _bound_record(checks, f"{bid}_{aid}", rep)
            elif check == "cor1-sweep":
                if not _is_modulated(spec):
                    continue
                grid = sorted(cfg.q_grid)
                values, increasing, limit = floor_trend(as_modulated(spec), grid, T)
                art.csv(f"cor1_{bid}.csv", [{"q": q, "floorTimesT": v, "limit": limit} for q, v in zip(grid, values)])
                if limit <= 0:
                    # no prior gap: the floor is identically zero
                    _record(checks, "Cor1", bid, True, skipped="zero prior gap", values=values)
                else:
                    _record(checks, "Cor1", bid, increasing, values=values, limit=limit)
            elif check == "prop1":
                if not _is_modulated(spec):
                    continue
                rep = prop1_bound(spec, T, cfg.alpha, budget=bud.law)
                bounds.append({"target": bid, **rep.to_dict()})
                _bound_record(checks, bid, rep)
            elif check == "prop2":
                if cfg.prop2_state == "theta" and not _is_modulated(spec):
                    continue
                rep = prop2_bound(spec, T, cfg.alpha, cfg.prop2_state, budget=bud.law)
                bounds.append({"target": bid, **rep.to_dict()})
                _bound_record(checks, bid, rep)
            elif check == "thm2":
                for aid, (_, pol) in agents.items():
                    if pol.needs_latent:
                        continue
                    for chi in cfg.chi_kinds:
                        tag = f"{bid}_{aid}_{chi.value}"
                        try:
                            rep = thm2_check(spec, pol, T, chi, cfg.alpha, tree_budget=bud.tree, law_budget=bud.law)
                        except (UnrealizableError, UnsupportedError) as exc:
                            _record(checks, "Thm2", tag, True, skipped=str(exc))
                            continue
                        d = rep.details
                        art.csv(f"thm2_{tag}.csv", [
                            {"t": t, "regret": d["regretPerStep"][t], "gain": d["gain"][t], "gamma": d["gamma"][t], "delta": d["deltaPerStep"][t]}
                            for t in range(T)
                        ])
                        bounds.append({"target": tag, **rep.to_dict()})
                        _bound_record(checks, tag, rep)
                        _record(checks, "Thm2-telescoping", tag, d["telescopingPass"], lhs=d["gainTotal"], rhs=d["V"])
            elif check == "variation":
                if not _is_modulated(spec):
                    continue
                spec_m = as_modulated(spec)
                rep = variation_metrics(spec_m, T)
                art.csv(f"variation_{bid}.csv", rep.rows())
                ok = True
                if spec_m.starts_stationary:
                    expected = [q * (1.0 - float(np.sum(p.probs**2))) for q, p in zip(spec_m.redraw, spec_m.prior)]
                    ok = bool(np.allclose(rep.change_prob, expected, rtol=0, atol=1e-12)) if T > 1 else True
                _record(checks, "variation", bid, ok, temporalVariation=rep.temporal_variation, variationCount=rep.variation_count)
            elif check == "classify":
                law = exact_law(spec, T, bud.law)
                res = _classify(law)
                classes[bid] = res
                expected = cfg.expect.get("classify", {}).get(bid, {})
                for prop, r in res.items():
                    ok = expected.get(prop, r["verdict"]) == r["verdict"]
                    _record(checks, f"classify-{prop}", bid, ok, verdict=r["verdict"])
    if "equivalence" in cfg.checks:
        ids = list(cfg.bandits)
        eq = {}
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                try:
                    r = are_equivalent(exact_law(cfg.bandits[a], T, bud.law), exact_law(cfg.bandits[b], T, bud.law))
                except NsBanditError as exc:
                    _record(checks, "equivalence", f"{a}~{b}", True, skipped=str(exc))
                    continue
                eq[f"{a}~{b}"] = r.to_dict()
                expected = cfg.expect.get("equivalence", {}).get(f"{a}~{b}", r.verdict)
                _record(checks, "equivalence", f"{a}~{b}", expected == r.verdict, verdict=r.verdict)
        classes["equivalence"] = eq
    if bounds:
        art.json("bounds.json", {"reports": bounds})
    if regrets:
        art.json("regret.json", {"reports": regrets})
    if classes:
        art.json("classification.json", {"results": classes})
    art.json("checks.json", {"checks": checks, "pass": all(c["pass"] for c in checks)})
    art.text("summary.txt", table(checks, ["check", "target", "pass", "lhs", "rhs", "slack", "verdict"]))
    return checks


def run_sweep(cfg, out, seed, threads, budget=None):
    art = Artifacts(out, cfg.sha256, seed)
    bud = Budgets(budget)
    T = cfg.horizon
    grid = sorted(cfg.q_grid)
    if not grid:
        raise ConfigError("sweep needs a non-empty grid", field="qGrid")
    checks = []
    for bid, spec in cfg.bandits.items():
        if not _is_modulated(spec):
            continue
        base = as_modulated(spec)
        rows = []
        for q in grid:
            s = base.with_redraw(q)
            star, _ = solve_bayes_optimal(s, T, bud.tree)
            rows.append({
                "q": q,
                "dynamicRegretOptimal": regret_exact(s, star, T, OracleProcessKind.DYNAMIC_THETA, tree_budget=bud.tree, law_budget=bud.law).total,
                "floorTimesT": T * dynamic_regret_floor(s),
                "V_T": predictive_info(s, cfg.alpha, T, budget=bud.law).cumulative,
                "regretPastRewardsGreedy": regret_exact(s, FilteredGreedy(s), T, OracleProcessKind.PAST_REWARDS, tree_budget=bud.tree, law_budget=bud.law).total,
                "temporalVariation": variation_metrics(s, T).temporal_variation,
            })
        art.csv(f"sweep_{bid}.csv", rows)
        col = {k: [r[k] for r in rows] for k in rows[0]}
        _record(checks, "floor-increasing", bid, all(b > a for a, b in zip(col["floorTimesT"], col["floorTimesT"][1:])))
        _record(checks, "V_T-nonincreasing", bid, all(b <= a + 1e-12 for a, b in zip(col["V_T"], col["V_T"][1:])), values=col["V_T"])
        if T > 1:
            tv = col["temporalVariation"]
            _record(checks, "variation-increasing", bid, all(b > a for a, b in zip(tv, tv[1:])))
        for r in rows:
            if r["q"] == 1.0:
                _record(checks, "q1-zero", bid, abs(r["V_T"]) <= 1e-12 and abs(r["regretPastRewardsGreedy"]) <= 1e-12)
    art.json("sweep.json", {"checks": checks, "pass": all(c["pass"] for c in checks)})
    art.text("summary.txt", table(checks, ["check", "target", "pass"]))
    return checks


def _spec_law(path, horizon, budget):
    spec, h, text = load_spec(path)
    if isinstance(spec, FiniteBanditSpec):
        return exact_law(spec, horizon or spec.horizon, budget), text
    h = horizon or h
    if h is None:
        raise ConfigError("generative spec needs a horizon (field or --horizon)", field="horizon")
    return exact_law(spec, int(h), budget), text


def build_parser():
    p = argparse.ArgumentParser(prog="nsbandit", description="Non-stationary bandit simulation and exact verification.")
    p.add_argument("--version", action="version", version=f"nsbandit {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="parallel episodes")
    common.add_argument("--budget", type=int, default=None, help="state budget for exact enumeration")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run the checks in an experiment config")
    r.add_argument("config")
    s = sub.add_parser("sweep", parents=[common], help="redraw-probability sweep")
    s.add_argument("config")
    c = sub.add_parser("classify", parents=[common], help="classify one bandit spec")
    c.add_argument("spec")
    c.add_argument("--horizon", type=int, default=None)
    e = sub.add_parser("equiv", parents=[common], help="decide equivalence of two bandit specs")
    e.add_argument("spec_a")
    e.add_argument("spec_b")
    e.add_argument("--horizon", type=int, default=None)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    budget = args.budget
    try:
        if args.command in ("run", "sweep"):
            cfg = load_config(args.config)
            seed = cfg.seed if args.seed is None else args.seed
            fn = run_experiment if args.command == "run" else run_sweep
            checks = fn(cfg, args.out, seed, max(1, args.threads), budget)
            print(table(checks, ["check", "target", "pass"]), end="")
            failed = [c for c in checks if not c["pass"]]
            for c in failed:
                print(f"FAILED: {c['check']} [{c['target']}]", file=sys.stderr)
            return EXIT_FAIL if failed else EXIT_OK
        law_budget = budget or DEFAULT_LAW_BUDGET
        seed = 0 if args.seed is None else args.seed
        if args.command == "classify":
            law, text = _spec_law(args.spec, args.horizon, law_budget)
            art = Artifacts(args.out, sha256_of(text), seed)
            res = _classify(law)
            art.json("classification.json", {"results": res})
            for k, v in res.items():
                print(f"{k}: {v['verdict']}")
            return EXIT_OK
        la, ta = _spec_law(args.spec_a, args.horizon, law_budget)
        lb, tb = _spec_law(args.spec_b, args.horizon, law_budget)
        art = Artifacts(args.out, sha256_of(ta + tb), seed)
        res = are_equivalent(la, lb)
        art.json("equivalence.json", {"result": res.to_dict()})
        print(f"equivalent: {res.verdict}")
        return EXIT_OK if res.verdict else EXIT_FAIL
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetError as exc:
        print(f"budget error: {exc} (rerun with --budget {exc.required})", file=sys.stderr)
        return EXIT_BUDGET
    except NsBanditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
