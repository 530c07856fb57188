"""Immutable graphs in compressed sparse row form, generators and BFS queries."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np

UNREACHABLE = None
INFINITE = math.inf


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``indices[indptr[u]:indptr[u+1]]`` is the sorted neighbor list of ``u``.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    max_degree: int = field(init=False)

    def __post_init__(self) -> None:
        indptr = np.ascontiguousarray(self.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.indices, dtype=np.int64)
        indptr.setflags(write=False)
        indices.setflags(write=False)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        deg = np.diff(indptr)
        object.__setattr__(self, "max_degree", int(deg.max()) if self.n else 0)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]] | np.ndarray) -> "Graph":
        """Build from undirected edges; loops, repeats and bad ids raise ``GraphError``."""
        if n < 1:
            raise GraphError(f"vertex count must be positive, got {n}")
        arr = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64).reshape(-1, 2)
        u, v = arr[:, 0], arr[:, 1]
        bad = (u < 0) | (u >= n) | (v < 0) | (v >= n)
        if bad.any():
            i = int(np.argmax(bad))
            raise GraphError(f"edge ({u[i]}, {v[i]}) out of range for n={n}")
        loops = u == v
        if loops.any():
            raise GraphError(f"self-loop at vertex {u[int(np.argmax(loops))]}")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keys = lo * n + hi
        uniq, counts = np.unique(keys, return_counts=True)
        if (counts > 1).any():
            k = int(uniq[np.argmax(counts > 1)])
            raise GraphError(f"duplicate edge ({k // n}, {k % n})")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(np.bincount(src, minlength=n))
        return cls(n, indptr, dst[order])

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        return int(self.indptr[u + 1] - self.indptr[u])

    def edges(self) -> list[tuple[int, int]]:
        """Each edge once, as ``(u, v)`` with ``u < v``, in lexicographic order."""
        out = []
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    out.append((u, int(v)))
        return out

    @property
    def num_edges(self) -> int:
        return int(self.indptr[-1]) // 2

    def add_isolated_vertex(self) -> "Graph":
        return Graph(self.n + 1, np.append(self.indptr, self.indptr[-1]), self.indices)

    def _check_vertex(self, u: int) -> None:
        if not (0 <= u < self.n):
            raise GraphError(f"invalid vertex {u} for n={self.n}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self) -> int:
        return hash((self.n, self.indptr.tobytes(), self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.num_edges}, max_degree={self.max_degree})"


# --- generators ------------------------------------------------------------

def gen_cycle(n: int) -> Graph:
    if n < 3:
        raise GraphError(f"cycle needs n >= 3, got {n}")
    i = np.arange(n, dtype=np.int64)
    return Graph.from_edges(n, np.stack([i, (i + 1) % n], axis=1))


def gen_path(n: int) -> Graph:
    if n < 1:
        raise GraphError(f"path needs n >= 1, got {n}")
    i = np.arange(n - 1, dtype=np.int64)
    return Graph.from_edges(n, np.stack([i, i + 1], axis=1))


def gen_torus(dims: Sequence[int]) -> Graph:
    """Wrap-around grid. Sides of length 2 give a single edge, sides of 1 none.

    Vertex ``(x_0, ..., x_k)`` has id ``sum(x_i * prod(dims[i+1:]))``.
    """
    dims = [int(d) for d in dims]
    if not dims or any(d < 1 for d in dims):
        raise GraphError(f"torus needs positive side lengths, got {dims}")
    n = math.prod(dims)
    strides = [math.prod(dims[i + 1:]) for i in range(len(dims))]
    edges = set()
    for vid in range(n):
        for side, stride in zip(dims, strides):
            if side < 2:
                continue
            x = (vid // stride) % side
            w = vid - x * stride + ((x + 1) % side) * stride
            edges.add((min(vid, w), max(vid, w)))
    return Graph.from_edges(n, sorted(edges))


def gen_hypercube(dim: int) -> Graph:
    if dim < 0:
        raise GraphError(f"hypercube dimension must be >= 0, got {dim}")
    n = 1 << dim
    return Graph.from_edges(n, ((u, u ^ (1 << b)) for u in range(n) for b in range(dim) if u < u ^ (1 << b)))


def gen_complete(n: int) -> Graph:
    if n < 1:
        raise GraphError(f"complete graph needs n >= 1, got {n}")
    return Graph.from_edges(n, ((u, v) for u in range(n) for v in range(u + 1, n)))


def gen_empty(n: int) -> Graph:
    """``n`` isolated vertices."""
    return Graph.from_edges(n, ())


def gen_random_regular(n: int, d: int, seed: int = 0, max_restarts: int = 1000) -> Graph:
    """Uniform-ish random ``d``-regular simple graph by stub pairing.

    Stubs are paired in shuffled rounds; a pair that would form a loop or a
    repeated edge is put back and reshuffled with the other leftovers. A round
    that cannot place any pair although a valid pair still exists is retried;
    a dead end (no valid pair left) restarts from scratch. Each restart gets a
    budget of ``100 * n`` pairing attempts.
    """
    if n < 1 or d < 0 or d >= n or (n * d) % 2:
        raise GraphError(f"invalid random regular parameters n={n}, d={d} (need 0 <= d < n, n*d even)")
    rng = random.Random(seed)
    for _ in range(max_restarts):
        edges = _try_pairing(n, d, rng, budget=100 * n)
        if edges is not None:
            return Graph.from_edges(n, edges)
    raise GraphError(f"random regular generation failed after {max_restarts} restarts (n={n}, d={d})")


def _try_pairing(n: int, d: int, rng: random.Random, budget: int) -> set[tuple[int, int]] | None:
    edges: set[tuple[int, int]] = set()
    stubs = [v for v in range(n) for _ in range(d)]
    attempts = 0
    while stubs:
        rng.shuffle(stubs)
        left = []
        it = iter(stubs)
        for a, b in zip(it, it):
            attempts += 1
            e = (a, b) if a < b else (b, a)
            if a != b and e not in edges:
                edges.add(e)
            else:
                left += (a, b)
        if attempts > budget:
            return None
        if len(left) == len(stubs):
            pending = sorted(set(left))
            if not any((u, v) not in edges for i, u in enumerate(pending) for v in pending[i + 1:]):
                return None
        stubs = left
    return edges


def gen_cartesian_product(g1: Graph, g2: Graph) -> Graph:
    """Vertex ``(a, b)`` gets id ``a * g2.n + b``."""
    n2 = g2.n
    edges = []
    for a in range(g1.n):
        for b, c in g2.edges():
            edges.append((a * n2 + b, a * n2 + c))
    for a, c in g1.edges():
        for b in range(n2):
            edges.append((a * n2 + b, c * n2 + b))
    return Graph.from_edges(g1.n * n2, edges)


# --- edge list text format ------------------------------------------------

def load_edge_list(text: str) -> Graph:
    """Parse ``n <count>`` followed by one ``u v`` pair per line; ``#`` starts a comment.

    Each undirected edge may appear once in either orientation.
    """
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 2 or parts[0] != "n":
                raise GraphError(f"line {lineno}: expected header 'n <count>', got {raw!r}")
            n = _parse_int(parts[1], lineno)
            if n < 1:
                raise GraphError(f"line {lineno}: vertex count must be positive")
            continue
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: malformed edge line {raw!r}")
        u, v = _parse_int(parts[0], lineno), _parse_int(parts[1], lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"line {lineno}: vertex id out of range in {raw!r}")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at vertex {u}")
        edges.append((u, v))
    if n is None:
        raise GraphError("missing header line 'n <count>'")
    try:
        return Graph.from_edges(n, edges)
    except GraphError as exc:
        raise GraphError(f"edge list: {exc}") from None


def _parse_int(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GraphError(f"line {lineno}: not an integer: {tok!r}") from None


def save_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"] + [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


# --- BFS queries ----------------------------------------------------------

@numba.njit(cache=True, nogil=True)
def _bfs_dist(indptr, indices, src):
    n = indptr.shape[0] - 1
    dist = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    dist[src] = 0
    queue[0] = src
    head, tail = 0, 1
    while head < tail:
        u = queue[head]
        head += 1
        for k in range(indptr[u], indptr[u + 1]):
            w = indices[k]
            if dist[w] < 0:
                dist[w] = dist[u] + 1
                queue[tail] = w
                tail += 1
    return dist


def bfs_distances(g: Graph, u: int) -> np.ndarray:
    """Hop distance from ``u`` to every vertex; ``-1`` where unreachable."""
    g._check_vertex(u)
    return _bfs_dist(g.indptr, g.indices, u)


def ball_sizes(g: Graph, u: int, r_max: int) -> list[int]:
    """``|B_u^r|`` for ``r = 0..r_max``, grown one BFS layer at a time."""
    g._check_vertex(u)
    if r_max < 0:
        raise GraphError(f"r_max must be >= 0, got {r_max}")
    seen = {u}
    frontier = [u]
    sizes = [1]
    for _ in range(r_max):
        nxt = []
        for x in frontier:
            for w in g.neighbors(x):
                w = int(w)
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
        sizes.append(len(seen))
    return sizes


def distance(g: Graph, u: int, v: int) -> int | None:
    """Shortest-path length, or ``UNREACHABLE`` (None)."""
    g._check_vertex(v)
    d = int(bfs_distances(g, u)[v])
    return d if d >= 0 else UNREACHABLE


def diameter(g: Graph) -> float | int:
    """Largest finite eccentricity, or ``INFINITE`` when disconnected."""
    best = 0
    for u in range(g.n):
        dist = _bfs_dist(g.indptr, g.indices, u)
        if (dist < 0).any():
            return INFINITE
        best = max(best, int(dist.max()))
    return best


def is_connected(g: Graph) -> bool:
    return bool((_bfs_dist(g.indptr, g.indices, 0) >= 0).all())


def all_pairs_distances(g: Graph) -> np.ndarray:
    """Dense ``n x n`` distance matrix (``-1`` = unreachable). Small graphs only."""
    return np.stack([_bfs_dist(g.indptr, g.indices, u) for u in range(g.n)])
