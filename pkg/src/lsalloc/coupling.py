"""Couplings between local search and its comparison processes, run as exact checks.

Each coupled run shares randomness by stream address (see ``rng``), so the
relation between the two processes is asserted for every ball, not
estimated. A run returns a ``ViolationReport`` that is empty when the
relation held throughout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .alloc import WeightFn
from .graph import Graph
from .rng import CASE, RngPlan


@dataclass
class ViolationReport:
    kind: str
    cases: int = 0
    violations: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def extend(self, other: "ViolationReport") -> None:
        self.cases += other.cases
        self.violations.extend(other.violations)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "cases": self.cases, "ok": self.ok, "violations": self.violations}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def majorizes(a: Sequence[int], b: Sequence[int]) -> bool:
    """True iff each sum of the k largest entries of ``a`` is at least that of ``b``."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.sum() != b.sum():
        raise ValueError(f"sum mismatch: {a.sum()} vs {b.sum()}")
    pa = np.cumsum(np.sort(a)[::-1])
    pb = np.cumsum(np.sort(b)[::-1])
    return bool((pa >= pb).all())


def coupled_majorization_run(g: Graph, mu: WeightFn, m: int, plan: RngPlan = RngPlan(0),
                             trial: int = 0) -> ViolationReport:
    """Rank coupling of local search with 1-choice; checks the 1-choice weights majorize after every ball.

    Also records whether the 1-choice maximum load stayed at least the
    local-search maximum (the top-prefix consequence when ``mu`` is zero).
    """
    if mu.mu.shape != (g.n,):
        raise ValueError("weight function does not match graph size")
    status, bad, x, xb, max_ok = K.majorization_loop(
        g.indptr, g.indices, mu.mu, m, np.uint64(plan.seed), trial)
    rep = ViolationReport("majorization", cases=1)
    if status != K.OK:
        rep.violations.append({
            "trial": trial, "ball": int(bad),
            "what": "majorization" if status == K.MAJORIZATION else "weight-descent",
            "local_search_loads": x.tolist(), "one_choice_loads": xb.tolist(), "mu": mu.mu.tolist(),
        })
    elif not max_ok and not mu.mu.any():
        rep.violations.append({"trial": trial, "what": "max-load order", "ball": None,
                               "local_search_loads": x.tolist(), "one_choice_loads": xb.tolist()})
    return rep


def _run_births(g: Graph, births: Sequence[int], plan: RngPlan, trial: int) -> np.ndarray:
    loads = np.zeros(g.n, dtype=np.int64)
    b = np.asarray(births, dtype=np.int64)
    K.local_search_loop(g.indptr, g.indices, loads, b, np.zeros(0, dtype=np.int64), K.STOP_BALLS,
                        b.size, b.size, np.uint64(plan.seed), trial, np.zeros(0), K.CHECK_NONE, False, 0)
    return loads


def coupled_lipschitz_run(g: Graph, birthplaces: Sequence[int], i: int, alt_birthplace: int,
                          plan: RngPlan = RngPlan(0), trial: int = 0) -> int:
    """L1 distance between runs differing only in the birthplace of ball ``i`` (1-based).

    Both runs break ties with the same per-(ball, vertex) neighbor rankings.
    """
    k = len(birthplaces)
    if not 1 <= i <= k:
        raise ValueError(f"ball index must satisfy 1 <= i <= {k}, got {i}")
    g._check_vertex(alt_birthplace)
    alt = list(birthplaces)
    alt[i - 1] = alt_birthplace
    x = _run_births(g, birthplaces, plan, trial)
    y = _run_births(g, alt, plan, trial)
    return int(np.abs(x - y).sum())


def coupled_removal_run(g: Graph, birthplaces: Sequence[int], i: int,
                        plan: RngPlan = RngPlan(0), trial: int = 0) -> int:
    """L1 distance on ``V`` between the full run and the run without ball ``i``.

    Ball ``i`` is redirected to an extra isolated vertex, where it stays and
    never influences another ball; restricting to the original vertices
    gives the run with ball ``i`` removed.
    """
    k = len(birthplaces)
    if not 1 <= i <= k:
        raise ValueError(f"ball index must satisfy 1 <= i <= {k}, got {i}")
    h = g.add_isolated_vertex()
    alt = list(birthplaces)
    alt[i - 1] = g.n
    x = _run_births(h, birthplaces, plan, trial)
    y = _run_births(h, alt, plan, trial)
    return int(np.abs(x[:g.n] - y[:g.n]).sum())


def coupled_coupon_run(g: Graph, rounds: int, plan: RngPlan = RngPlan(0), trial: int = 0) -> ViolationReport:
    """Coupon collector against local search with shared birthplaces and neighbor rankings.

    Checks that every covered node carries a ball after each round.
    """
    r, status, bad, covered, loads = K.coupon_loop(g.indptr, g.indices, np.uint64(plan.seed), trial, rounds, True)
    rep = ViolationReport("coupon", cases=1)
    if status != K.OK:
        rep.violations.append({"trial": trial, "round": int(bad), "covered": np.flatnonzero(covered).tolist(),
                               "local_search_loads": loads.tolist()})
    return rep


# --- randomized case drivers ---------------------------------------------------

def _case_rng(plan: RngPlan, case: int) -> np.random.Generator:
    return plan.numpy(CASE, case)


def lipschitz_cases(g: Graph, k: int, cases: int, plan: RngPlan = RngPlan(0)) -> ViolationReport:
    """Random birthplace sequences of length ``k``; L1 distance must stay at most 2."""
    rep = ViolationReport("lipschitz")
    for c in range(cases):
        rng = _case_rng(plan, c)
        births = rng.integers(0, g.n, size=k).tolist()
        i = int(rng.integers(1, k + 1))
        alt = int(rng.integers(0, g.n))
        d = coupled_lipschitz_run(g, births, i, alt, plan, trial=c)
        rep.cases += 1
        if d > 2:
            rep.violations.append({"case": c, "births": births, "i": i, "alt": alt, "distance": d})
    return rep


def removal_cases(g: Graph, k: int, cases: int, plan: RngPlan = RngPlan(0)) -> ViolationReport:
    """Random birthplace sequences of length ``k``; removing one ball must move exactly one unit."""
    rep = ViolationReport("removal")
    for c in range(cases):
        rng = _case_rng(plan, c)
        births = rng.integers(0, g.n, size=k).tolist()
        i = int(rng.integers(1, k + 1))
        d = coupled_removal_run(g, births, i, plan, trial=c)
        rep.cases += 1
        if d != 1:
            rep.violations.append({"case": c, "births": births, "i": i, "distance": d})
    return rep


def majorization_cases(g: Graph, mu: WeightFn, m: int, cases: int, plan: RngPlan = RngPlan(0)) -> ViolationReport:
    rep = ViolationReport("majorization")
    for c in range(cases):
        rep.extend(coupled_majorization_run(g, mu, m, plan, trial=c))
    return rep


def coupon_cases(g: Graph, rounds: int, cases: int, plan: RngPlan = RngPlan(0)) -> ViolationReport:
    rep = ViolationReport("coupon")
    for c in range(cases):
        rep.extend(coupled_coupon_run(g, rounds, plan, trial=c))
    return rep
