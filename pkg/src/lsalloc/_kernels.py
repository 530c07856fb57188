"""Compiled inner loops. Internal; the public surface lives in ``alloc`` and ``coupling``.

Balls are numbered from 1. Status codes returned by the loops:
0 ok, 1 smoothness violated, 2 weight descent violated, 3 path longer than
birthplace load, 4 majorization violated, 5 coupon cover not a subset of
loaded vertices.
"""

from __future__ import annotations

import numba
import numpy as np

from .rng import BIRTH, CHOICE, CHOICE_TIE, RANK, TIE, key64, uniform_index

OK = 0
SMOOTHNESS = 1
WEIGHT_DESCENT = 2
PATH_LENGTH = 3
MAJORIZATION = 4
COUPON_SUBSET = 5

STOP_BALLS = 0
STOP_COVER = 1
STOP_BLANKET = 2

CHECK_NONE = 0
CHECK_LOCAL = 1
CHECK_FULL = 2

# tracker slots
_MIN, _CNT_MIN, _MAX, _ZEROS = 0, 1, 2, 3


@numba.njit(cache=True, nogil=True)
def walk(indptr, indices, loads, start, seed, trial, ball):
    """Local search of one ball from ``start``; returns (vertex, hops). Loads untouched."""
    cur = start
    hops = 0
    while True:
        lo = indptr[cur]
        hi = indptr[cur + 1]
        best = loads[cur]
        for k in range(lo, hi):
            if loads[indices[k]] < best:
                best = loads[indices[k]]
        if best >= loads[cur]:
            return cur, hops
        nxt = -1
        nkey = np.uint64(0)
        for k in range(lo, hi):
            w = indices[k]
            if loads[w] == best:
                kw = key64(seed, TIE, trial, ball, cur, w)
                if nxt < 0 or kw > nkey:
                    nxt = w
                    nkey = kw
        cur = nxt
        hops += 1


@numba.njit(cache=True, nogil=True)
def _tracker(loads):
    st = np.zeros(4, dtype=np.int64)
    mn = loads.min()
    st[_MIN] = mn
    st[_CNT_MIN] = np.sum(loads == mn)
    st[_MAX] = loads.max()
    st[_ZEROS] = np.sum(loads == 0)
    return st


@numba.njit(cache=True, nogil=True)
def _bump(loads, v, st):
    old = loads[v]
    loads[v] = old + 1
    if old + 1 > st[_MAX]:
        st[_MAX] = old + 1
    if old == 0:
        st[_ZEROS] -= 1
    if old == st[_MIN]:
        st[_CNT_MIN] -= 1
        if st[_CNT_MIN] == 0:
            st[_MIN] += 1
            st[_CNT_MIN] = np.sum(loads == st[_MIN])


@numba.njit(cache=True, nogil=True)
def _blanket_update(st, m, n, deltas, blanket):
    """Record the first ``m`` where every load lies strictly inside (m/(dn), dm/n); returns all-reached."""
    done = True
    for j in range(deltas.shape[0]):
        if blanket[j] < 0:
            d = deltas[j]
            if st[_MIN] * d * n > m and st[_MAX] * n < d * m:
                blanket[j] = m
            else:
                done = False
    return done


@numba.njit(cache=True, nogil=True)
def _grow(a, need):
    if need <= a.shape[0]:
        return a
    b = np.empty((max(need, 2 * a.shape[0]), a.shape[1]), dtype=a.dtype)
    b[:a.shape[0]] = a
    return b


@numba.njit(cache=True, nogil=True)
def _smooth_at(indptr, indices, loads, v):
    for k in range(indptr[v], indptr[v + 1]):
        diff = loads[v] - loads[indices[k]]
        if diff > 1 or diff < -1:
            return False
    return True


@numba.njit(cache=True, nogil=True)
def _smooth_all(indptr, indices, loads):
    for v in range(indptr.shape[0] - 1):
        if not _smooth_at(indptr, indices, loads, v):
            return False
    return True


@numba.njit(cache=True, nogil=True)
def local_search_loop(indptr, indices, loads, births, mu, stop, n_balls, cap,
                      seed, trial, deltas, check, want_trace, offset):
    """Sequential local-search allocation.

    ``births`` overrides the BIRTH stream when non-empty; ``mu`` (possibly
    empty) enables the weight-descent check. ``offset`` balls have already
    been placed in ``loads``: ball numbers, cover and blanket times are
    absolute. ``n_balls`` and ``cap`` count balls of this call. Returns
    ``(balls, cover, blanket, status, bad_ball, trace)`` where ``trace`` is
    a ``(balls, 3)`` array of (birthplace, allocated, hops).
    """
    n = loads.shape[0]
    st = _tracker(loads)
    blanket = np.full(deltas.shape[0], -1, dtype=np.int64)
    cover = offset if st[_ZEROS] == 0 else -1
    trace = np.empty((1024 if want_trace else 0, 3), dtype=np.int64)
    use_mu = mu.shape[0] == n
    limit = n_balls if stop == STOP_BALLS else cap
    if births.shape[0] > 0 and births.shape[0] < limit:
        limit = births.shape[0]
    status = OK
    bad = -1
    m = 0
    while m < limit:
        if stop == STOP_COVER and cover >= 0:
            break
        i = offset + m + 1
        if births.shape[0] > 0:
            u = births[m]
        else:
            u = uniform_index(seed, BIRTH, trial, i, 0, 0, n)
        v, hops = walk(indptr, indices, loads, u, seed, trial, i)
        if check != CHECK_NONE and status == OK:
            if hops > loads[u]:
                status = PATH_LENGTH
                bad = i
            elif use_mu and loads[v] + mu[v] > loads[u] + mu[u]:
                status = WEIGHT_DESCENT
                bad = i
        _bump(loads, v, st)
        m += 1
        if want_trace:
            trace = _grow(trace, m)
            trace[m - 1, 0] = u
            trace[m - 1, 1] = v
            trace[m - 1, 2] = hops
        if check == CHECK_LOCAL and status == OK and not _smooth_at(indptr, indices, loads, v):
            status = SMOOTHNESS
            bad = i
        elif check == CHECK_FULL and status == OK and not _smooth_all(indptr, indices, loads):
            status = SMOOTHNESS
            bad = i
        if cover < 0 and st[_ZEROS] == 0:
            cover = offset + m
        if deltas.shape[0] > 0:
            if _blanket_update(st, offset + m, n, deltas, blanket) and stop == STOP_BLANKET:
                break
    return m, cover, blanket, status, bad, trace[:m].copy()


@numba.njit(cache=True, nogil=True)
def choice_loop(loads, d, stop, n_balls, cap, seed, trial, deltas, want_trace, offset):
    """1-choice (d=1, bin = BIRTH stream) and d-choice allocation."""
    n = loads.shape[0]
    st = _tracker(loads)
    blanket = np.full(deltas.shape[0], -1, dtype=np.int64)
    cover = offset if st[_ZEROS] == 0 else -1
    trace = np.empty((1024 if want_trace else 0, 3), dtype=np.int64)
    limit = n_balls if stop == STOP_BALLS else cap
    m = 0
    while m < limit:
        if stop == STOP_COVER and cover >= 0:
            break
        i = offset + m + 1
        if d == 1:
            v = uniform_index(seed, BIRTH, trial, i, 0, 0, n)
            u = v
        else:
            v = -1
            vkey = np.uint64(0)
            u = -1
            for j in range(d):
                c = uniform_index(seed, CHOICE, trial, i, j, 0, n)
                if j == 0:
                    u = c
                kc = key64(seed, CHOICE_TIE, trial, i, j, 0)
                if v < 0 or loads[c] < loads[v] or (loads[c] == loads[v] and kc > vkey):
                    v = c
                    vkey = kc
        _bump(loads, v, st)
        m += 1
        if want_trace:
            trace = _grow(trace, m)
            trace[m - 1, 0] = u
            trace[m - 1, 1] = v
            trace[m - 1, 2] = 0
        if cover < 0 and st[_ZEROS] == 0:
            cover = offset + m
        if deltas.shape[0] > 0:
            if _blanket_update(st, offset + m, n, deltas, blanket) and stop == STOP_BLANKET:
                break
    return m, cover, blanket, trace[:m].copy()


@numba.njit(cache=True, nogil=True)
def coupon_loop(indptr, indices, seed, trial, cap, coupled):
    """Coupon-collector covering process; optionally run local search in lockstep.

    Both processes read birthplaces from the BIRTH stream and rank the
    neighbors of ``v`` in round ``i`` by the TIE keys at ``(i, v, .)``.
    Returns ``(rounds, status, bad_round, covered, ls_loads)``; ``rounds`` is
    -1 if coverage was not reached within ``cap``.
    """
    n = indptr.shape[0] - 1
    covered = np.zeros(n, dtype=np.bool_)
    loads = np.zeros(n, dtype=np.int64)
    left = n
    status = OK
    bad = -1
    i = 0
    while left > 0 and i < cap:
        i += 1
        v = uniform_index(seed, BIRTH, trial, i, 0, 0, n)
        newly = -1
        if not covered[v]:
            covered[v] = True
            newly = v
            left -= 1
        else:
            best = -1
            bkey = np.uint64(0)
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if not covered[w]:
                    kw = key64(seed, TIE, trial, i, v, w)
                    if best < 0 or kw > bkey:
                        best = w
                        bkey = kw
            if best >= 0:
                covered[best] = True
                newly = best
                left -= 1
        if coupled:
            a, _ = walk(indptr, indices, loads, v, seed, trial, i)
            loads[a] += 1
            # covered and loaded sets only grow, so only the newly covered vertex can break inclusion
            if status == OK and newly >= 0 and loads[newly] == 0:
                status = COUPON_SUBSET
                bad = i
    if coupled and status == OK:
        for x in range(n):
            if covered[x] and loads[x] == 0:
                status = COUPON_SUBSET
                bad = i
                break
    rounds = i if left == 0 else -1
    return rounds, status, bad, covered, loads


@numba.njit(cache=True, nogil=True)
def _majorizes(a, b):
    """Prefix sums of descending ``a`` dominate those of descending ``b``."""
    sa = np.sort(a)[::-1]
    sb = np.sort(b)[::-1]
    ca = 0
    cb = 0
    for k in range(sa.shape[0]):
        ca += sa[k]
        cb += sb[k]
        if ca < cb:
            return False
    return True


@numba.njit(cache=True, nogil=True)
def _rank_order(w):
    """Vertex ids by weight descending, ties by ascending id."""
    return np.argsort(-w, kind="mergesort")


@numba.njit(cache=True, nogil=True)
def majorization_loop(indptr, indices, mu, m_balls, seed, trial):
    """Rank coupling of local search (X) against 1-choice (Xbar) on weights X + mu.

    Each ball draws a uniform rank ``l``; the local-search ball is born at the
    ``l``-th heaviest vertex of its own weight vector and the 1-choice ball
    lands on the ``l``-th heaviest vertex of the 1-choice weight vector.
    Returns ``(status, bad_ball, x, xbar, max_ok)`` where ``max_ok`` records
    that max(Xbar) >= max(X) held after every ball.
    """
    n = mu.shape[0]
    x = np.zeros(n, dtype=np.int64)
    xb = np.zeros(n, dtype=np.int64)
    status = OK
    bad = -1
    max_ok = True
    for i in range(1, m_balls + 1):
        l = uniform_index(seed, RANK, trial, i, 0, 0, n)
        u = _rank_order(x + mu)[l]
        ub = _rank_order(xb + mu)[l]
        v, hops = walk(indptr, indices, x, u, seed, trial, i)
        if x[v] + mu[v] > x[u] + mu[u]:
            status = WEIGHT_DESCENT
            bad = i
            break
        x[v] += 1
        xb[ub] += 1
        if not _majorizes(xb + mu, x + mu):
            status = MAJORIZATION
            bad = i
            break
        if xb.max() < x.max():
            max_ok = False
    return status, bad, x, xb, max_ok
