"""Brute-force references, written independently of the package code paths."""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from fractions import Fraction

import networkx as nx


def to_nx(g) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges())
    return h


def exact_local_search(adj: list[list[int]], m: int) -> dict[tuple[int, ...], Fraction]:
    """Exact law of the load vector after ``m`` balls.

    Birthplaces are uniform; at every hop the ball moves to a uniformly
    chosen neighbor among those of minimum load, provided that load is
    strictly below the current one.
    """
    n = len(adj)
    dist = {tuple([0] * n): Fraction(1)}
    for _ in range(m):
        nxt: dict[tuple[int, ...], Fraction] = defaultdict(Fraction)
        for loads, p in dist.items():
            for u in range(n):
                for v, q in _walk_law(adj, loads, u).items():
                    new = list(loads)
                    new[v] += 1
                    nxt[tuple(new)] += p * q / n
        dist = dict(nxt)
    return dist


def _walk_law(adj, loads, u) -> dict[int, Fraction]:
    nb = adj[u]
    if not nb:
        return {u: Fraction(1)}
    low = min(loads[w] for w in nb)
    if low >= loads[u]:
        return {u: Fraction(1)}
    cands = [w for w in nb if loads[w] == low]
    out: dict[int, Fraction] = defaultdict(Fraction)
    for w in cands:
        for v, q in _walk_law(adj, loads, w).items():
            out[v] += q / len(cands)
    return out


def exact_d_choice_distinct(n: int, d: int) -> Fraction:
    """P(two balls land on distinct bins) for d-choice with uniform tie-breaking."""
    total = Fraction(0)
    choices = list(itertools.product(range(n), repeat=d))
    for c1 in choices:
        # first ball: all bins empty, uniform among the d sampled positions
        for first in c1:
            p1 = Fraction(1, len(choices)) / d
            for c2 in choices:
                loads = [0] * n
                loads[first] = 1
                low = min(loads[c] for c in c2)
                pos = [c for c in c2 if loads[c] == low]
                for second in pos:
                    if second != first:
                        total += p1 * Fraction(1, len(choices)) / len(pos)
    return total


def lipschitz_law(adj, births: list[int], i: int, alt: int) -> dict[int, Fraction]:
    """Law of the L1 distance when both runs share every neighbor permutation.

    Enumerates one permutation per (ball, vertex) that a walk might consult.
    """
    n = len(adj)
    k = len(births)
    slots = [(b, v) for b in range(k) for v in range(n) if len(adj[v]) > 1]
    perms = [list(itertools.permutations(adj[v])) for _, v in slots]
    law: dict[int, Fraction] = defaultdict(Fraction)
    weight = Fraction(1, math.prod(len(p) for p in perms)) if perms else Fraction(1)
    alt_births = list(births)
    alt_births[i - 1] = alt
    for combo in itertools.product(*perms):
        rank = {slot: order for slot, order in zip(slots, combo)}
        x = _run_with_ranks(adj, births, rank)
        y = _run_with_ranks(adj, alt_births, rank)
        law[sum(abs(a - b) for a, b in zip(x, y))] += weight
    return dict(law)


def _run_with_ranks(adj, births, rank, skip=None):
    loads = [0] * len(adj)
    for b, u in enumerate(births):
        if b == skip:
            continue
        cur = u
        while True:
            nb = adj[cur]
            if not nb:
                break
            low = min(loads[w] for w in nb)
            if low >= loads[cur]:
                break
            order = rank.get((b, cur), tuple(nb))
            cur = next(w for w in order if loads[w] == low)
        loads[cur] += 1
    return loads


def brute_gamma(g, gamma: float, kind: int) -> int:
    """max r with at least n^(1/2+gamma) vertices failing the condition, from full ball profiles."""
    h = to_nx(g)
    n = g.n
    log_n = math.log(n)
    dist = dict(nx.all_pairs_shortest_path_length(h))
    best = 0
    for r in range(1, n + 1):
        failing = 0
        for u in range(n):
            size = sum(1 for d in dist[u].values() if d <= r)
            val = r * size * (math.log(r) if kind == 1 else 1)
            if val < log_n:
                failing += 1
        if failing >= n ** (0.5 + gamma):
            best = r
    return best


def growth_radius(ball_size, n: int, kind: int) -> int:
    """min r >= 1 with r |B^r| (ln r) >= ln n for a size function ``ball_size(r)``."""
    if n == 1:
        return 1
    r = 1
    while True:
        val = r * ball_size(r) * (math.log(r) if kind == 1 else 1)
        if val >= math.log(n):
            return r
        r += 1


def harmonic(n: int) -> float:
    return math.fsum(1.0 / k for k in range(1, n + 1))


def removal_law(adj, births: list[int], i: int) -> dict[int, Fraction]:
    """Law of the L1 distance between the run and the run without ball ``i``, shared rankings."""
    n = len(adj)
    k = len(births)
    slots = [(b, v) for b in range(k) for v in range(n) if len(adj[v]) > 1]
    perms = [list(itertools.permutations(adj[v])) for _, v in slots]
    weight = Fraction(1, math.prod(len(p) for p in perms)) if perms else Fraction(1)
    law: dict[int, Fraction] = defaultdict(Fraction)
    for combo in itertools.product(*perms):
        rank = {slot: order for slot, order in zip(slots, combo)}
        x = _run_with_ranks(adj, births, rank)
        y = _run_with_ranks(adj, births, rank, skip=i - 1)
        law[sum(abs(a - b) for a, b in zip(x, y))] += weight
    return dict(law)
