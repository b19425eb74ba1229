"""Report records and their CSV / JSON / text renderings."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

PASS_TOL = 1e-9


def _plain(x):
    """Convert numpy containers and non-finite floats into JSON-safe values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(x, "to_dict"):
        return _plain(x.to_dict())
    if hasattr(x, "value") and hasattr(x, "name"):
        return x.value
    return x


def dumps(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


@dataclass
class BoundReport:
    name: str
    lhs: float
    rhs: float
    details: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def passed(self):
        return bool(self.lhs <= self.rhs + PASS_TOL)

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
            "flags": list(self.flags),
            "details": self.details,
        }


@dataclass
class RegretReport:
    chi_kind: object
    per_step: np.ndarray
    benchmark: np.ndarray
    agent_reward: np.ndarray
    mode: str = "exact"
    num_episodes: int = None
    stderr: np.ndarray = None
    cumulative_stderr: np.ndarray = None

    @property
    def cumulative(self):
        return np.cumsum(self.per_step)

    @property
    def total(self):
        return float(self.cumulative[-1])

    @property
    def horizon(self):
        return len(self.per_step)

    def rows(self):
        out = []
        for t in range(self.horizon):
            row = {
                "t": t,
                "benchmark": self.benchmark[t],
                "agentReward": self.agent_reward[t],
                "regret": self.per_step[t],
                "cumulative": self.cumulative[t],
            }
            if self.stderr is not None:
                row["stderr"] = self.stderr[t]
                row["cumulativeStderr"] = self.cumulative_stderr[t]
            out.append(row)
        return out

    def to_dict(self):
        d = {
            "chiKind": self.chi_kind.value,
            "mode": self.mode,
            "perStep": self.per_step,
            "cumulative": self.cumulative,
            "total": self.total,
        }
        if self.mode == "monteCarlo":
            d["numEpisodes"] = self.num_episodes
            d["stderr"] = self.stderr
            d["cumulativeStderr"] = self.cumulative_stderr
        return d


@dataclass
class VariationReport:
    horizon: int
    per_step_variation: np.ndarray
    per_step_count: np.ndarray
    change_prob: np.ndarray

    @property
    def temporal_variation(self):
        return float(np.sum(self.per_step_variation))

    @property
    def variation_count(self):
        return float(np.sum(self.per_step_count))

    def rows(self):
        return [
            {"t": t + 1, "temporalVariation": v, "variationCount": c}
            for t, (v, c) in enumerate(zip(self.per_step_variation, self.per_step_count))
        ]

    def to_dict(self):
        return {
            "horizon": self.horizon,
            "temporalVariation": self.temporal_variation,
            "variationCount": self.variation_count,
            "changeProbPerAction": self.change_prob,
        }


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(_plain(v))


def to_csv(rows, header_comment=None):
    """Render ``rows`` (list of dicts with equal keys) as CSV text."""
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        keys = list(rows[0])
        writer.writerow(keys)
        for r in rows:
            writer.writerow([_fmt(r[k]) for k in keys])
    return buf.getvalue()


def table(rows, columns=None):
    """Fixed-width plain-text table."""
    if not rows:
        return ""
    columns = columns or list(rows[0])
    cells = [[str(c) for c in columns]]
    for r in rows:
        line = []
        for c in columns:
            v = r.get(c, "")
            line.append(f"{v:.6g}" if isinstance(v, (float, np.floating)) else str(_plain(v)))
        cells.append(line)
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    out = []
    for j, row in enumerate(cells):
        out.append("  ".join(s.ljust(w) for s, w in zip(row, widths)).rstrip())
        if j == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"
