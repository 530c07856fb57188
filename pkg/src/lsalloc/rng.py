"""Counter-based random streams.

Every random quantity in a run is addressed by a tuple
``(kind, trial, ball, vertex, counter)`` and derived from the master seed by
hashing, so two processes that read the same address see the same value.
This is what lets coupled runs share birthplaces and tie-break rankings
exactly instead of drawing them from a shared sequential generator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

MASK64 = (1 << 64) - 1

# stream kinds
BIRTH = 1
TIE = 2
RANK = 3
CHOICE = 4
CHOICE_TIE = 5
POISSON = 6
SWEEP = 7
CASE = 8

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@numba.njit(cache=True, nogil=True)
def mix64(z):
    z = np.uint64(z)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, nogil=True)
def key64(seed, kind, trial, ball, vertex, counter):
    """64-bit value at one stream address."""
    h = mix64(np.uint64(seed) + _GOLDEN)
    h = mix64(h ^ (np.uint64(kind) * _GOLDEN + np.uint64(1)))
    h = mix64(h ^ (np.uint64(trial) * _GOLDEN + np.uint64(2)))
    h = mix64(h ^ (np.uint64(ball) * _GOLDEN + np.uint64(3)))
    h = mix64(h ^ (np.uint64(vertex) * _GOLDEN + np.uint64(4)))
    h = mix64(h ^ (np.uint64(counter) * _GOLDEN + np.uint64(5)))
    return h


@numba.njit(cache=True, nogil=True)
def uniform_index(seed, kind, trial, ball, vertex, counter, n):
    """Uniform integer in ``[0, n)`` at one stream address."""
    u = np.float64(key64(seed, kind, trial, ball, vertex, counter) >> np.uint64(11)) * _INV53
    i = np.int64(u * n)
    if i >= n:
        i = n - 1
    return i


def _u64(x: int) -> int:
    return int(x) & MASK64


@dataclass(frozen=True)
class RngPlan:
    """Master seed plus the addressing scheme above.

    ``birthplace`` and ``tie_key`` are the two streams shared by coupled
    processes: ball ``i`` is born at ``birthplace(trial, i)`` in every process
    built on this plan, and when ball ``i`` sits at vertex ``v`` its neighbors
    are ranked by ``tie_key(trial, i, v, w)`` (higher key = higher rank).
    """

    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "seed", _u64(self.seed))

    def key(self, kind: int, trial: int = 0, ball: int = 0, vertex: int = 0, counter: int = 0) -> int:
        return int(key64(self.seed, kind, _u64(trial), _u64(ball), _u64(vertex), _u64(counter)))

    def index(self, n: int, kind: int, trial: int = 0, ball: int = 0, vertex: int = 0, counter: int = 0) -> int:
        return int(uniform_index(self.seed, kind, _u64(trial), _u64(ball), _u64(vertex), _u64(counter), n))

    def birthplace(self, trial: int, ball: int, n: int) -> int:
        return self.index(n, BIRTH, trial, ball)

    def tie_key(self, trial: int, ball: int, vertex: int, neighbor: int) -> int:
        return self.key(TIE, trial, ball, vertex, neighbor)

    def derive(self, *path: int) -> "RngPlan":
        """Independent child plan, e.g. one per sweep grid point."""
        s = self.seed
        for p in path:
            s = int(key64(s, SWEEP, _u64(p), 0, 0, 0))
        return RngPlan(s)

    def numpy(self, kind: int, trial: int = 0) -> np.random.Generator:
        """Sequential generator for draws that are never shared across processes."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, kind, _u64(trial)]))
