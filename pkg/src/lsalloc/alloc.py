"""Allocation processes: local search, 1-choice, d-choice, Poissonized runs, coupon collector."""

from __future__ import annotations

import csv
import heapq
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels as K
from .graph import Graph, bfs_distances
from .rng import POISSON, RngPlan


class InvariantViolation(AssertionError):
    """A per-ball property of the process failed; carries the offending ball."""

    def __init__(self, kind: str, ball: int, loads: np.ndarray | None = None):
        super().__init__(f"{kind} violated at ball {ball}")
        self.kind = kind
        self.ball = ball
        self.loads = loads


_STATUS = {
    K.SMOOTHNESS: "smoothness",
    K.WEIGHT_DESCENT: "weight-descent",
    K.PATH_LENGTH: "path-length",
    K.MAJORIZATION: "majorization",
    K.COUPON_SUBSET: "coupon-subset",
}
_CHECKS = {"none": K.CHECK_NONE, "local": K.CHECK_LOCAL, "full": K.CHECK_FULL}
_STOPS = {"balls": K.STOP_BALLS, "cover": K.STOP_COVER, "blanket": K.STOP_BLANKET}


class LoadVector:
    """Per-vertex ball counts."""

    __slots__ = ("loads",)

    def __init__(self, loads: Sequence[int] | np.ndarray):
        arr = np.array(loads, dtype=np.int64)
        if (arr < 0).any():
            raise ValueError("loads must be non-negative")
        self.loads = arr

    @classmethod
    def zeros(cls, n: int) -> "LoadVector":
        return cls(np.zeros(n, dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.loads.sum())

    @property
    def max(self) -> int:
        return int(self.loads.max())

    @property
    def min(self) -> int:
        return int(self.loads.min())

    def __len__(self) -> int:
        return len(self.loads)

    def __getitem__(self, v: int) -> int:
        return int(self.loads[v])

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LoadVector):
            return np.array_equal(self.loads, other.loads)
        return NotImplemented

    def tolist(self) -> list[int]:
        return self.loads.tolist()

    def __repr__(self) -> str:
        return f"LoadVector({self.loads.tolist()})"


@dataclass(frozen=True)
class WeightFn:
    """Integer vertex labels differing by at most one across every edge."""

    mu: np.ndarray

    @classmethod
    def for_graph(cls, g: Graph, mu: Sequence[int] | np.ndarray) -> "WeightFn":
        arr = np.array(mu, dtype=np.int64)
        if arr.shape != (g.n,):
            raise ValueError(f"weight function needs {g.n} entries, got {arr.shape}")
        for u, v in g.edges():
            if abs(int(arr[u]) - int(arr[v])) > 1:
                raise ValueError(f"weights differ by more than 1 across edge ({u}, {v}): {arr[u]} vs {arr[v]}")
        return cls(arr)

    @classmethod
    def zero(cls, g: Graph) -> "WeightFn":
        return cls(np.zeros(g.n, dtype=np.int64))

    @classmethod
    def distance_to(cls, g: Graph, v: int, sign: int = 1) -> "WeightFn":
        """``sign * d(v, .)``; vertices outside v's component get 0."""
        d = bfs_distances(g, v)
        d[d < 0] = 0
        return cls.for_graph(g, sign * d)

    def weights(self, loads: np.ndarray) -> np.ndarray:
        return np.asarray(loads, dtype=np.int64) + self.mu


@dataclass
class RunRecord:
    final_loads: LoadVector
    balls: int
    max_load: int
    min_load: int
    cover_time: int | None
    blanket_times: dict[float, int | None] = field(default_factory=dict)
    trace: np.ndarray | None = None

    def to_dict(self) -> dict:
        d = {
            "balls": self.balls,
            "final_loads": self.final_loads.tolist(),
            "max_load": self.max_load,
            "min_load": self.min_load,
            "cover_time": self.cover_time,
            "blanket_times": {repr(float(k)): v for k, v in sorted(self.blanket_times.items())},
        }
        if self.trace is not None:
            d["trace"] = self.trace.tolist()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def trace_csv(self) -> str:
        if self.trace is None:
            raise ValueError("run was recorded without a trace")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ball", "birthplace", "allocated", "path_length"])
        for i, (u, v, h) in enumerate(self.trace.tolist(), 1):
            w.writerow([i, u, v, h])
        return buf.getvalue()


def cover_cap(n: int) -> int:
    """Ball budget for until-cover runs: 10 n ln n (at least 10 n)."""
    return max(math.ceil(10 * n * math.log(n)), 10 * n)


# --- single local-search step (pure Python, pluggable tie-breaking) ------

TieBreak = Callable[[int, list[int]], int]


def plan_tiebreak(plan: RngPlan, trial: int, ball: int) -> TieBreak:
    """Tie-break rule of ball ``ball``: highest ``tie_key`` among the candidates."""
    def choose(vertex: int, candidates: list[int]) -> int:
        return max(candidates, key=lambda w: plan.tie_key(trial, ball, vertex, w))
    return choose


def local_search_step(g: Graph, loads: Sequence[int] | np.ndarray, birthplace: int,
                      tiebreak: TieBreak) -> tuple[int, int]:
    """Walk from ``birthplace`` to the first local minimum; returns (vertex, hops).

    At each hop the ball moves to a neighbor of minimum load if that load is
    strictly smaller than the current one; ``tiebreak(vertex, candidates)``
    picks among equal-minimum neighbors. ``loads`` is not modified.
    """
    g._check_vertex(birthplace)
    cur, hops = birthplace, 0
    while True:
        nb = [int(w) for w in g.neighbors(cur)]
        if not nb:
            return cur, hops
        low = min(loads[w] for w in nb)
        if low >= loads[cur]:
            return cur, hops
        cands = [w for w in nb if loads[w] == low]
        cur = cands[0] if len(cands) == 1 else tiebreak(cur, cands)
        hops += 1


# --- full runs --------------------------------------------------------------

def _seed(plan: RngPlan) -> np.uint64:
    return np.uint64(plan.seed)


def _deltas(deltas: Sequence[float]) -> np.ndarray:
    arr = np.array(sorted(set(float(d) for d in deltas)), dtype=np.float64)
    if (arr <= 1.0).any():
        raise ValueError(f"blanket deltas must exceed 1, got {deltas}")
    return arr


def _stop_code(stop: str, m: int | None, deltas: np.ndarray) -> int:
    if stop not in _STOPS:
        raise ValueError(f"unknown stop rule {stop!r}; expected one of {sorted(_STOPS)}")
    if stop == "balls" and (m is None or m < 0):
        raise ValueError("stop='balls' needs m >= 0")
    if stop == "blanket" and deltas.size == 0:
        raise ValueError("stop='blanket' needs at least one delta > 1")
    return _STOPS[stop]


def _record(loads: np.ndarray, balls: int, cover: int, deltas: np.ndarray, blanket: np.ndarray,
            trace: np.ndarray | None) -> RunRecord:
    return RunRecord(
        final_loads=LoadVector(loads),
        balls=int(balls),
        max_load=int(loads.max()),
        min_load=int(loads.min()),
        cover_time=int(cover) if cover >= 0 else None,
        blanket_times={float(d): (int(b) if b >= 0 else None) for d, b in zip(deltas, blanket)},
        trace=trace,
    )


def run_local_search(g: Graph, m: int | None = None, plan: RngPlan = RngPlan(0), *,
                     mu: WeightFn | None = None, stop: str = "balls", deltas: Sequence[float] = (),
                     trial: int = 0, cap: int | None = None, check: str = "local",
                     checkpoint_every: int | None = None, trace: bool = False,
                     births: Sequence[int] | None = None) -> RunRecord:
    """Allocate balls by local search.

    ``stop`` is ``"balls"`` (exactly ``m``), ``"cover"`` or ``"blanket"``
    (every requested delta reached); the latter two give up after ``cap``
    balls (default ``cover_cap(n)``). ``check`` selects per-ball assertions:
    ``"local"`` re-checks smoothness on the edges of the receiving vertex
    (equivalent to all edges, since only that load changed), ``"full"``
    scans every edge after every ball. With ``mu`` given, every ball is also
    checked for weight descent. ``checkpoint_every`` additionally verifies
    the distance-transform identity ``X_v = min_u (X_u + d(v, u))`` every
    that many balls. Violations raise ``InvariantViolation``.
    """
    if check not in _CHECKS:
        raise ValueError(f"unknown check mode {check!r}")
    dl = _deltas(deltas)
    code = _stop_code(stop, m, dl)
    n = g.n
    if cap is None:
        cap = cover_cap(n)
    budget = m if code == K.STOP_BALLS else cap
    mu_arr = mu.mu if mu is not None else np.zeros(0, dtype=np.int64)
    if mu is not None and mu_arr.shape != (n,):
        raise ValueError("weight function does not match graph size")
    b_arr = np.asarray(births, dtype=np.int64) if births is not None else np.zeros(0, dtype=np.int64)
    if births is not None:
        if b_arr.size and (b_arr.min() < 0 or b_arr.max() >= n):
            raise ValueError("birthplace out of range")
        budget = min(budget, b_arr.size)

    loads = np.zeros(n, dtype=np.int64)
    done = 0
    cover = -1
    blanket = np.full(dl.size, -1, dtype=np.int64)
    traces = []
    step = checkpoint_every if checkpoint_every else max(budget, 1)
    while True:
        chunk = min(step, budget - done)
        cb = b_arr[done:done + chunk]
        todo = np.flatnonzero(blanket < 0)
        balls, c, bl, status, bad, tr = K.local_search_loop(
            g.indptr, g.indices, loads, cb, mu_arr, code, chunk, chunk,
            _seed(plan), trial, dl[todo], _CHECKS[check], trace, done)
        if status != K.OK:
            raise InvariantViolation(_STATUS[status], int(bad), loads.copy())
        if cover < 0:
            cover = c
        blanket[todo] = bl
        done += balls
        if trace:
            traces.append(tr)
        if checkpoint_every and check != "none" and not event_equivalence_holds(g, loads):
            raise InvariantViolation("event-equivalence", done, loads.copy())
        if balls < chunk or done >= budget:
            break
        if code == K.STOP_COVER and cover >= 0:
            break
        if code == K.STOP_BLANKET and (blanket >= 0).all():
            break
    tr_all = np.concatenate(traces) if trace else None
    return _record(loads, done, cover, dl, blanket, tr_all)


def run_one_choice(g: Graph, m: int | None = None, plan: RngPlan = RngPlan(0), **kw) -> RunRecord:
    """Each ball lands on its birthplace (same BIRTH stream as local search)."""
    return run_d_choice(g, m, 1, plan, **kw)


def run_d_choice(g: Graph, m: int | None, d: int, plan: RngPlan = RngPlan(0), *, stop: str = "balls",
                 deltas: Sequence[float] = (), trial: int = 0, cap: int | None = None,
                 trace: bool = False) -> RunRecord:
    """Each ball samples ``d`` uniform bins and joins a least loaded one (ties uniform)."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    dl = _deltas(deltas)
    code = _stop_code(stop, m, dl)
    if cap is None:
        cap = cover_cap(g.n)
    loads = np.zeros(g.n, dtype=np.int64)
    balls, cover, blanket, tr = K.choice_loop(
        loads, d, code, m if m is not None else 0, cap, _seed(plan), trial, dl, trace, 0)
    return _record(loads, balls, cover, dl, blanket, tr if trace else None)


def poisson_count(mean_m: float, plan: RngPlan, trial: int = 0) -> int:
    if not mean_m > 0:
        raise ValueError(f"Poisson mean must be positive, got {mean_m}")
    return int(plan.numpy(POISSON, trial).poisson(mean_m))


def run_poissonized(g: Graph, process: str, mean_m: float, plan: RngPlan = RngPlan(0), *,
                    trial: int = 0, d: int = 2, **kw) -> RunRecord:
    """Draw ``K ~ Poisson(mean_m)`` and run ``process`` with exactly ``K`` balls."""
    k = poisson_count(mean_m, plan, trial)
    if process == "local-search":
        return run_local_search(g, k, plan, trial=trial, **kw)
    if process == "one-choice":
        return run_one_choice(g, k, plan, trial=trial, **kw)
    if process == "d-choice":
        return run_d_choice(g, k, d, plan, trial=trial, **kw)
    raise ValueError(f"process {process!r} cannot be Poissonized")


@dataclass
class CoverRecord:
    rounds: int | None
    covered: np.ndarray

    def to_dict(self) -> dict:
        return {"cover_time": self.rounds, "covered": int(self.covered.sum()), "n": int(self.covered.size)}


def run_coupon_collector(g: Graph, plan: RngPlan = RngPlan(0), *, trial: int = 0,
                         cap: int | None = None) -> CoverRecord:
    """Cover the chosen node, else its highest-ranked uncovered neighbor, until all are covered."""
    if cap is None:
        cap = cover_cap(g.n)
    rounds, _, _, covered, _ = K.coupon_loop(g.indptr, g.indices, _seed(plan), trial, cap, False)
    return CoverRecord(int(rounds) if rounds >= 0 else None, covered)


# --- checkpoint identity ------------------------------------------------------

def distance_transform(g: Graph, loads: Sequence[int] | np.ndarray) -> np.ndarray:
    """``T_v = min_u (loads_u + d(v, u))`` over ``u`` reachable from ``v``."""
    loads = np.asarray(loads, dtype=np.int64)
    best = loads.copy()
    heap = [(int(x), v) for v, x in enumerate(loads.tolist())]
    heapq.heapify(heap)
    while heap:
        t, v = heapq.heappop(heap)
        if t > best[v]:
            continue
        for w in g.neighbors(v):
            if t + 1 < best[w]:
                best[w] = t + 1
                heapq.heappush(heap, (t + 1, int(w)))
    return best


def event_equivalence_holds(g: Graph, loads: Sequence[int] | np.ndarray) -> bool:
    """``X_v >= l`` iff ``min_u (X_u + d(v, u)) >= l`` for every ``v`` and ``l``."""
    return bool(np.array_equal(distance_transform(g, loads), np.asarray(loads)))
