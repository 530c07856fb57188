"""Neighborhood-growth radii R1, R2 and their gamma variants.

Natural logarithms throughout. For a vertex ``u``

    rho1(u) = min{r >= 1 : r * |B_u^r| * ln r >= ln n}
    rho2(u) = min{r >= 1 : r * |B_u^r|        >= ln n}

and R1, R2 are the maxima over ``u``. Both conditions are monotone in ``r``,
so the gamma variants (largest ``r`` for which at least ``ceil(n^(1/2+gamma))``
vertices still fail the condition) are order statistics of ``rho - 1``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .graph import Graph, ball_sizes

log = logging.getLogger(__name__)


class GrowthError(ValueError):
    pass


@numba.njit(cache=True, nogil=True)
def _cond(kind, r, size, log_n):
    if kind == 1:
        return r * size * math.log(r) >= log_n
    return r * size >= log_n


@numba.njit(cache=True, nogil=True)
def _rho_all(indptr, indices, kind):
    """Per-vertex rho by early-stopped BFS; -1 where no r <= n qualifies."""
    n = indptr.shape[0] - 1
    log_n = math.log(n)
    out = np.full(n, -1, dtype=np.int64)
    stamp = np.full(n, -1, dtype=np.int64)
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    for u in range(n):
        stamp[u] = u
        frontier[0] = u
        fsize = 1
        size = 1
        r = 0
        while r < n:
            r += 1
            if fsize > 0:
                nsize = 0
                for i in range(fsize):
                    x = frontier[i]
                    for k in range(indptr[x], indptr[x + 1]):
                        w = indices[k]
                        if stamp[w] != u:
                            stamp[w] = u
                            nxt[nsize] = w
                            nsize += 1
                for i in range(nsize):
                    frontier[i] = nxt[i]
                fsize = nsize
                size += nsize
            if _cond(kind, r, size, log_n):
                out[u] = r
                break
    return out


def per_vertex_rho(g: Graph, kind: int) -> np.ndarray:
    """``rho1`` (kind=1) or ``rho2`` (kind=2) for every vertex."""
    if kind not in (1, 2):
        raise ValueError(f"kind must be 1 or 2, got {kind}")
    if g.n == 1:
        return np.ones(1, dtype=np.int64)
    rho = _rho_all(g.indptr, g.indices, kind)
    if (rho < 0).any():
        u = int(np.argmax(rho < 0))
        raise GrowthError(f"no radius r <= n satisfies the R{kind} condition at vertex {u}")
    return rho


def rho_from_profile(g: Graph, u: int, kind: int) -> int:
    """Slow reference: rho from a full ``ball_sizes`` profile."""
    if g.n == 1:
        return 1
    sizes = ball_sizes(g, u, g.n)
    log_n = math.log(g.n)
    for r in range(1, g.n + 1):
        val = r * sizes[r] * (math.log(r) if kind == 1 else 1.0)
        if val >= log_n:
            return r
    raise GrowthError(f"no radius r <= n satisfies the R{kind} condition at vertex {u}")


def compute_r1(g: Graph) -> int:
    return int(per_vertex_rho(g, 1).max())


def compute_r2(g: Graph) -> int:
    return int(per_vertex_rho(g, 2).max())


def _quota(n: int, gamma: float) -> int:
    if not (0.0 < gamma <= 0.5):
        raise ValueError(f"gamma must lie in (0, 1/2], got {gamma}")
    k = math.ceil(n ** (0.5 + gamma))
    if k > n:
        raise GrowthError(f"subset size {k} exceeds n={n}")
    return k


def gamma_from_rho(rho: np.ndarray, gamma: float) -> int:
    """Largest r >= 1 failing the condition on at least ``ceil(n^(1/2+gamma))`` vertices, else 0."""
    n = len(rho)
    k = _quota(n, gamma)
    kth = int(np.sort(rho - 1)[::-1][k - 1])
    return max(kth, 0)


def compute_r1_gamma(g: Graph, gamma: float) -> int:
    return gamma_from_rho(per_vertex_rho(g, 1), gamma)


def compute_r2_gamma(g: Graph, gamma: float) -> int:
    return gamma_from_rho(per_vertex_rho(g, 2), gamma)


@dataclass
class GrowthReport:
    n: int
    per_vertex_rho1: np.ndarray
    per_vertex_rho2: np.ndarray
    r1: int
    r2: int
    r1_gamma: dict[float, int] = field(default_factory=dict)
    r2_gamma: dict[float, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "r1": self.r1,
            "r2": self.r2,
            "r1_gamma": {repr(float(k)): v for k, v in sorted(self.r1_gamma.items())},
            "r2_gamma": {repr(float(k)): v for k, v in sorted(self.r2_gamma.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def growth_report(g: Graph, gammas: tuple[float, ...] = ()) -> GrowthReport:
    rho1 = per_vertex_rho(g, 1)
    rho2 = per_vertex_rho(g, 2)
    r1, r2 = int(rho1.max()), int(rho2.max())
    if r1 > r2:
        # R1 <= R2 is only guaranteed once R2 >= 3 (ln r >= 1 there)
        log.warning("R1=%d exceeds R2=%d on this graph (n=%d)", r1, r2, g.n)
    return GrowthReport(
        n=g.n,
        per_vertex_rho1=rho1,
        per_vertex_rho2=rho2,
        r1=r1,
        r2=r2,
        r1_gamma={gm: gamma_from_rho(rho1, gm) for gm in gammas},
        r2_gamma={gm: gamma_from_rho(rho2, gm) for gm in gammas},
    )
