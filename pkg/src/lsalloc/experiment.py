"""Multi-trial sweeps over graph sizes, aggregation and band checks."""

from __future__ import annotations

import configparser
import csv
import io
import itertools
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import alloc
from .graph import Graph
from .growth import per_vertex_rho
from .rng import RngPlan
from .specs import ProcessSpec, SpecError, parse_graph, parse_process

log = logging.getLogger(__name__)

METRICS = ("max_load", "min_load", "cover_time", "blanket")
CSV_COLUMNS = ("family", "n", "params", "process", "metric", "mean", "std", "min", "max", "r1", "r2", "normalized")
DEFAULT_TRIALS = 20


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    """``graph`` is a graph spec template filled from each grid point, e.g. ``cycle:n={n}``.

    ``balls`` is ``n`` (m = n), ``<c>n`` (m = c * n), an integer, ``cover``
    or ``blanket`` (until every delta is reached).
    """

    graph: str
    grid: dict[str, list]
    process: str = "local-search"
    balls: str = "n"
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    metrics: tuple[str, ...] = ("max_load",)
    deltas: tuple[float, ...] = ()
    workers: int | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.grid or any(len(v) == 0 for v in self.grid.values()):
            raise ConfigError("grid must have at least one axis with at least one value")
        for m in self.metrics:
            if m not in METRICS:
                raise ConfigError(f"unknown metric {m!r} (known: {', '.join(METRICS)})")
        if "blanket" in self.metrics and not self.deltas:
            raise ConfigError("metric 'blanket' needs deltas")
        if any(d <= 1 for d in self.deltas):
            raise ConfigError("deltas must exceed 1")
        try:
            parse_process(self.process)
        except SpecError as exc:
            raise ConfigError(str(exc)) from None
        budget_rule(self.balls, 1)

    def points(self) -> list[dict]:
        keys = sorted(self.grid)
        return [dict(zip(keys, vals)) for vals in itertools.product(*(self.grid[k] for k in keys))]


def budget_rule(rule: str, n: int) -> tuple[str, int | None]:
    """Map a ball-budget rule to ``(stop, m)``."""
    rule = str(rule).strip()
    if rule in ("cover", "blanket"):
        return rule, None
    if rule == "n":
        return "balls", n
    try:
        if rule.endswith("n"):
            return "balls", int(round(float(rule[:-1]) * n))
        m = int(rule)
    except ValueError:
        raise ConfigError(f"bad ball budget {rule!r}") from None
    if m < 0:
        raise ConfigError("ball budget must be >= 0")
    return "balls", m


def run_trial(g: Graph, process: ProcessSpec | str, balls: str, plan: RngPlan, trial: int,
              deltas: Sequence[float] = ()) -> dict[str, float | None]:
    """One run; returns the raw metrics (None where not reached)."""
    proc = parse_process(process) if isinstance(process, str) else process
    stop, m = budget_rule(balls, g.n)
    if proc.kind == "coupon":
        rec = alloc.run_coupon_collector(g, plan, trial=trial)
        return {"cover_time": rec.rounds, "max_load": None, "min_load": None, "balls": rec.rounds}
    if proc.poisson:
        if stop != "balls":
            raise ConfigError("Poissonized processes need a fixed mean ball count")
        m = alloc.poisson_count(m, plan, trial) if m > 0 else 0
    kw = dict(stop=stop, deltas=deltas, trial=trial)
    if proc.kind == "local-search":
        rec = alloc.run_local_search(g, m, plan, **kw)
    else:
        rec = alloc.run_d_choice(g, m, proc.d, plan, **kw)
    out: dict[str, float | None] = {
        "max_load": rec.max_load, "min_load": rec.min_load, "cover_time": rec.cover_time, "balls": rec.balls,
    }
    for d, t in rec.blanket_times.items():
        out[f"blanket:{d!r}"] = t
    return out


@dataclass
class SweepRow:
    family: str
    n: int
    params: str
    process: str
    metric: str
    mean: float
    std: float
    min: float
    max: float
    r1: int
    r2: int
    normalized: float

    def as_list(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)
    samples: dict[tuple[int, str], list] = field(default_factory=dict)

    def select(self, metric: str) -> list[SweepRow]:
        return [r for r in self.rows if r.metric == metric]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(x) for x in r.as_list()])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{c: _json_num(getattr(r, c)) for c in CSV_COLUMNS} for r in self.rows]
        return json.dumps(rows, sort_keys=True)


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def _json_num(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    return x


def _aggregate(values: list) -> tuple[float, float, float, float]:
    if not values or any(v is None for v in values):
        return (math.nan,) * 4
    a = np.asarray(values, dtype=np.float64)
    std = float(a.std(ddof=1)) if a.size > 1 else 0.0
    return float(a.mean()), std, float(a.min()), float(a.max())


def _normalize(metric: str, mean: float, r1: int, r2: int, n: int) -> float:
    if metric == "max_load":
        return mean / r1
    if metric == "cover_time" or metric.startswith("blanket"):
        return mean / (r2 * n)
    return math.nan


def run_sweep(config: SweepConfig, progress: Callable[[str], None] | None = None) -> SweepResult:
    """Run every (grid point, trial) pair; deterministic per seed regardless of scheduling."""
    proc = parse_process(config.process)
    master = RngPlan(config.seed)
    points = config.points()
    graphs: list[tuple[str, Graph, int, int]] = []
    for gi, p in enumerate(points):
        spec = config.graph.format(**p)
        g = parse_graph(spec)
        r1 = int(per_vertex_rho(g, 1).max())
        r2 = int(per_vertex_rho(g, 2).max())
        graphs.append((spec, g, r1, r2))
        if progress:
            progress(f"grid point {gi + 1}/{len(points)}: {spec} (n={g.n}, R1={r1}, R2={r2})")

    def job(gi: int, t: int):
        spec, g, _, _ = graphs[gi]
        return gi, t, run_trial(g, proc, config.balls, master.derive(gi), t, config.deltas)

    workers = config.workers or os.cpu_count() or 1
    results: dict[tuple[int, int], dict] = {}
    tasks = [(gi, t) for gi in range(len(graphs)) for t in range(config.trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for done, (gi, t, out) in enumerate(pool.map(lambda a: job(*a), tasks), 1):
            results[(gi, t)] = out
            if progress and (done % config.trials == 0 or done == len(tasks)):
                progress(f"trials done {done}/{len(tasks)}")

    res = SweepResult()
    metric_keys = []
    for m in config.metrics:
        if m == "blanket":
            metric_keys += [f"blanket:{float(d)!r}" for d in sorted(set(config.deltas))]
        else:
            metric_keys.append(m)
    for gi, (spec, g, r1, r2) in enumerate(graphs):
        family = spec.split(":", 1)[0]
        for key in metric_keys:
            vals = [results[(gi, t)].get(key) for t in range(config.trials)]
            res.samples[(gi, key)] = vals
            mean, std, lo, hi = _aggregate(vals)
            res.rows.append(SweepRow(family, g.n, spec, str(proc), key, mean, std, lo, hi, r1, r2,
                                     _normalize(key, mean, r1, r2, g.n)))
    return res


def blanket_time(allocations: Iterable[int], n: int, delta: float) -> int | None:
    """First ``m >= 1`` at which every load lies strictly inside ``(m/(delta n), delta m/n)``.

    ``allocations`` is the stream of receiving vertices, one per ball.
    """
    if not delta > 1:
        raise ValueError(f"delta must exceed 1, got {delta}")
    loads = np.zeros(n, dtype=np.int64)
    for m, v in enumerate(allocations, 1):
        loads[v] += 1
        if loads.min() > m / (delta * n) and loads.max() < delta * m / n:
            return m
    return None


@dataclass
class BandReport:
    passed: bool
    spread: float
    ratios: list[float]
    tolerance: float

    def __str__(self) -> str:
        rs = ", ".join(f"{r:.4g}" for r in self.ratios)
        return f"spread {self.spread:.4g} (tolerance {self.tolerance}) ratios [{rs}] -> {'pass' if self.passed else 'FAIL'}"


DENOMINATORS: dict[str, Callable[[SweepRow], float]] = {
    "one": lambda r: 1.0,
    "r1": lambda r: float(r.r1),
    "r2": lambda r: float(r.r2),
    "r2n": lambda r: float(r.r2 * r.n),
    "n": lambda r: float(r.n),
    "nlogn": lambda r: r.n * math.log(r.n),
    "nHn": lambda r: r.n * sum(1.0 / k for k in range(1, r.n + 1)),
}


def band_check(result: SweepResult | Sequence[SweepRow], metric: str,
               denominator: str | Callable[[SweepRow], float], tolerance: float) -> BandReport:
    """Pass iff max/min over the grid of ``mean / denominator`` is at most ``tolerance``."""
    rows = result.select(metric) if isinstance(result, SweepResult) else [r for r in result if r.metric == metric]
    if len(rows) < 2:
        raise ValueError(f"band check needs at least 2 grid points, got {len(rows)}")
    den = DENOMINATORS[denominator] if isinstance(denominator, str) else denominator
    ratios = []
    for r in rows:
        d = den(r)
        if d == 0:
            raise ZeroDivisionError(f"zero denominator at n={r.n}")
        ratios.append(r.mean / d)
    spread = max(ratios) / min(ratios)
    return BandReport(bool(spread <= tolerance), spread, ratios, tolerance)


# --- config files ------------------------------------------------------------

def load_config(text: str) -> SweepConfig:
    """Parse an INI-style sweep config.

    ``[sweep]`` holds ``graph``, ``process``, ``balls``, ``trials``, ``seed``,
    ``metrics`` (comma list), ``deltas`` (comma list), ``workers``.
    ``[grid]`` has one line per axis: comma-separated values, or ``a..b`` for
    an integer range, optionally ``pow2:a..b[:step]`` for powers of two.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    if "sweep" not in cp or "grid" not in cp:
        raise ConfigError("config needs [sweep] and [grid] sections")
    extra = set(cp.sections()) - {"sweep", "grid"}
    if extra:
        raise ConfigError(f"unknown sections: {', '.join(sorted(extra))}")
    s = cp["sweep"]
    known = {"graph", "process", "balls", "trials", "seed", "metrics", "deltas", "workers"}
    unknown = set(s) - known
    if unknown:
        raise ConfigError(f"unknown keys in [sweep]: {', '.join(sorted(unknown))}")
    if "graph" not in s:
        raise ConfigError("[sweep] needs graph")
    grid = {k: _axis(v) for k, v in cp["grid"].items()}
    try:
        return SweepConfig(
            graph=s["graph"],
            grid=grid,
            process=s.get("process", "local-search"),
            balls=s.get("balls", "n"),
            trials=int(s.get("trials", DEFAULT_TRIALS)),
            seed=int(s.get("seed", 0)),
            metrics=tuple(x.strip() for x in s.get("metrics", "max_load").split(",") if x.strip()),
            deltas=tuple(float(x) for x in s.get("deltas", "").split(",") if x.strip()),
            workers=int(s["workers"]) if "workers" in s else None,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def _axis(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    pow2 = text.startswith("pow2:")
    if pow2:
        text = text[5:]
    if ".." in text:
        rng, _, step = text.partition(":")
        a, b = (int(x) for x in rng.split(".."))
        vals = list(range(a, b + 1, int(step) if step else 1))
    else:
        vals = [_scalar(x) for x in text.split(",") if x.strip()]
    return [1 << v for v in vals] if pow2 else vals


def _scalar(x: str):
    x = x.strip()
    try:
        return int(x)
    except ValueError:
        return x
