"""JSON experiment and bandit-spec configs (strict schema, version 1)."""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .agents import AGENT_TYPES, OracleProcessKind
from .errors import ConfigError, SpecError
from .exact.law import FiniteBanditSpec
from .info import AlphaSpec
from .zoo import FiniteDist, IidBernoulliSpec, ModulatedBernoulliSpec, NoiseCouplingSpec

SCHEMA_VERSION = 1
CHECKS = ("regret", "thm1", "cor1-sweep", "prop1", "thm2", "prop2", "variation", "classify", "equivalence")

TOP_KEYS = {
    "schema", "name", "seed", "horizon", "episodes", "bandits", "agents", "chiKinds", "alpha",
    "checks", "qGrid", "monteCarlo", "saveEpisodes", "expect", "prop2State", "threads",
}
BANDIT_KEYS = {
    "id", "type", "numActions", "support", "probs", "redrawProb", "initialSupport", "initialProbs",
    "mode", "sharedAction", "horizon", "alphabet", "outcomes", "path",
}
AGENT_KEYS = {"id", "type", "params", "seedStream"}
ALPHA_KEYS = {"kind", "action", "window"}
EXPECT_KEYS = {"classify", "equivalence"}


class _Locator:
    """Maps a JSON key to the first line of the source text mentioning it."""

    def __init__(self, text):
        self.lines = text.splitlines()

    def line(self, key):
        pat = re.compile(r'"%s"\s*:' % re.escape(str(key)))
        for i, line in enumerate(self.lines, 1):
            if pat.search(line):
                return i
        return None


def _load_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None


def _parse(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None


def sha256_of(text):
    return hashlib.sha256(text.encode()).hexdigest()


def _err(loc, fieldname, message, key=None):
    return ConfigError(message, field=fieldname, line=loc.line(key or fieldname.split(".")[-1].split("[")[0]))


def _strict(obj, allowed, where, loc):
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", field=where)
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise _err(loc, f"{where}.{unknown[0]}" if where else unknown[0], "unknown field", key=unknown[0])


def _per_action(value, n, fieldname, loc):
    """Accept either one list shared by all actions or one list per action."""
    if not isinstance(value, list) or not value:
        raise _err(loc, fieldname, "expected a non-empty list")
    if all(isinstance(v, list) for v in value):
        if len(value) != n:
            raise _err(loc, fieldname, f"expected {n} per-action lists, got {len(value)}")
        return value
    return [value] * n


def _dists(d, n, sup_key, prob_key, where, loc):
    sups = _per_action(d[sup_key], n, f"{where}.{sup_key}", loc)
    probs = _per_action(d[prob_key], n, f"{where}.{prob_key}", loc)
    out = []
    for a, (s, p) in enumerate(zip(sups, probs)):
        try:
            out.append(FiniteDist(s, p))
        except SpecError as exc:
            bad = prob_key if "probs" in str(exc) else sup_key
            raise _err(loc, f"{where}.{bad}", f"action {a}: {exc}", key=bad) from None
    return out


def _require(d, keys, where, loc):
    for k in keys:
        if k not in d:
            raise ConfigError("missing required field", field=f"{where}.{k}" if where else k)


def spec_from_dict(d, where="bandit", loc=None, base_dir=None):
    """Build a bandit spec from its JSON object."""
    loc = loc or _Locator("")
    _strict(d, BANDIT_KEYS, where, loc)
    if "path" in d:
        path = Path(d["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return load_spec(path)[0]
    _require(d, ["type"], where, loc)
    kind = d["type"]
    try:
        if kind == "finite":
            _require(d, ["horizon", "numActions", "outcomes"], where, loc)
            return FiniteBanditSpec.from_dict(d)
        _require(d, ["numActions", "support", "probs"], where, loc)
        n = d["numActions"]
        if not isinstance(n, int) or n < 1:
            raise _err(loc, f"{where}.numActions", "must be a positive integer")
        prior = _dists(d, n, "support", "probs", where, loc)
        if kind == "modulated":
            _require(d, ["redrawProb"], where, loc)
            q = d["redrawProb"]
            q = [q] * n if isinstance(q, (int, float)) else q
            if not isinstance(q, list) or len(q) != n:
                raise _err(loc, f"{where}.redrawProb", f"expected a number or {n} numbers")
            init = None
            if "initialSupport" in d or "initialProbs" in d:
                _require(d, ["initialSupport", "initialProbs"], where, loc)
                init = _dists(d, n, "initialSupport", "initialProbs", where, loc)
            return ModulatedBernoulliSpec(n, prior, q, init)
        if kind == "iid":
            return IidBernoulliSpec(n, prior)
        if kind == "noise":
            _require(d, ["mode"], where, loc)
            mode = d["mode"]
            if mode == "dependentEvenSteps":
                mode = "dependent"
            return NoiseCouplingSpec(mode, int(d.get("sharedAction", 0)), n, prior)
    except SpecError as exc:
        raise _err(loc, where, str(exc), key="type") from None
    raise _err(loc, f"{where}.type", f"unknown bandit type {kind!r}", key="type")


def load_spec(path):
    """Load a standalone bandit spec file; returns ``(spec, horizon or None, text)``."""
    text = _load_text(path)
    d = _parse(text)
    loc = _Locator(text)
    if not isinstance(d, dict):
        raise ConfigError("spec file must hold a JSON object")
    horizon = d.get("horizon")
    spec = spec_from_dict(d, "", loc, base_dir=Path(path).parent)
    return spec, horizon, text


@dataclass
class AgentConfig:
    id: str
    type: str
    params: dict = field(default_factory=dict)
    seed_stream: int = 0


@dataclass
class ExperimentConfig:
    name: str
    seed: int
    horizon: int
    episodes: int
    bandits: dict
    agents: list
    chi_kinds: list
    alpha: AlphaSpec
    checks: list
    q_grid: list
    monte_carlo: bool
    save_episodes: bool
    expect: dict
    prop2_state: str
    threads: int
    sha256: str
    path: str


def _int(d, key, default, loc, minimum=None):
    v = d.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool):
        raise _err(loc, key, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise _err(loc, key, f"must be >= {minimum}")
    return v


def load_config(path):
    text = _load_text(path)
    d = _parse(text)
    loc = _Locator(text)
    _strict(d, TOP_KEYS, "", loc)
    if d.get("schema") != SCHEMA_VERSION:
        raise _err(loc, "schema", f"expected schema {SCHEMA_VERSION}, got {d.get('schema')!r}")
    base = Path(path).parent
    if not isinstance(d.get("bandits"), list) or not d["bandits"]:
        raise _err(loc, "bandits", "expected a non-empty list")
    bandits = {}
    for i, b in enumerate(d["bandits"]):
        bid = b.get("id", f"bandit{i}") if isinstance(b, dict) else None
        if bid in bandits:
            raise _err(loc, f"bandits[{i}].id", f"duplicate id {bid!r}", key="id")
        bandits[bid] = spec_from_dict(b, f"bandits[{i}]", loc, base)
    agents = []
    for i, a in enumerate(d.get("agents", [{"type": "uniform"}])):
        _strict(a, AGENT_KEYS, f"agents[{i}]", loc)
        if a.get("type") not in AGENT_TYPES:
            raise _err(loc, f"agents[{i}].type", f"unknown agent type {a.get('type')!r}", key="type")
        agents.append(AgentConfig(a.get("id", a["type"]), a["type"], dict(a.get("params", {})), int(a.get("seedStream", 0))))
    chi = []
    for c in d.get("chiKinds", ["PastRewards"]):
        try:
            chi.append(OracleProcessKind.parse(c))
        except ValueError as exc:
            raise _err(loc, "chiKinds", str(exc)) from None
    alpha_d = d.get("alpha", {})
    _strict(alpha_d, ALPHA_KEYS, "alpha", loc)
    try:
        alpha = AlphaSpec(alpha_d.get("kind", "identity"), alpha_d.get("action"), alpha_d.get("window"))
    except ValueError as exc:
        raise _err(loc, "alpha", str(exc)) from None
    checks = d.get("checks", ["regret"])
    if not isinstance(checks, list) or not checks:
        raise _err(loc, "checks", "expected a non-empty list")
    for c in checks:
        if c not in CHECKS:
            raise _err(loc, "checks", f"unknown check {c!r}; expected a subset of {list(CHECKS)}")
    grid = d.get("qGrid", [])
    if "cor1-sweep" in checks and not grid:
        raise _err(loc, "qGrid", "cor1-sweep needs a non-empty grid")
    for q in grid:
        if not isinstance(q, (int, float)) or not 0 <= q <= 1:
            raise _err(loc, "qGrid", f"grid value {q!r} outside [0, 1]")
    expect = d.get("expect", {})
    _strict(expect, EXPECT_KEYS, "expect", loc)
    state = d.get("prop2State", "theta")
    if state not in ("theta", "fullRewards"):
        raise _err(loc, "prop2State", f"expected 'theta' or 'fullRewards', got {state!r}")
    return ExperimentConfig(
        name=str(d.get("name", Path(path).stem)),
        seed=_int(d, "seed", 0, loc, 0),
        horizon=_int(d, "horizon", 4, loc, 1),
        episodes=_int(d, "episodes", 1000, loc, 1),
        bandits=bandits,
        agents=agents,
        chi_kinds=chi,
        alpha=alpha,
        checks=checks,
        q_grid=[float(q) for q in grid],
        monte_carlo=bool(d.get("monteCarlo", False)),
        save_episodes=bool(d.get("saveEpisodes", False)),
        expect=expect,
        prop2_state=state,
        threads=_int(d, "threads", 1, loc, 1),
        sha256=sha256_of(text),
        path=str(path),
    )
