"""xoshiro256** streams for numba kernels.

Each path owns a generator seeded from ``mix(seed) ^ path_index`` through
splitmix64, so results do not depend on how paths are scheduled.  The seed is
mixed first because with a raw XOR, small seeds only permute the path streams
(seeds 1 and 2 would give the same set of paths).
"""

import math

import numpy as np
from numba import njit, uint64

_GOLDEN = uint64(0x9E3779B97F4A7C15)
_MIX1 = uint64(0xBF58476D1CE4E5B9)
_MIX2 = uint64(0x94D049BB133111EB)
_TWO53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _rotl(x, k):
    return (x << uint64(k)) | (x >> uint64(64 - k))


@njit(cache=True)
def mix64(x):
    """splitmix64 finaliser of ``x + golden``."""
    z = uint64(x) + _GOLDEN
    z = (z ^ (z >> uint64(30))) * _MIX1
    z = (z ^ (z >> uint64(27))) * _MIX2
    return z ^ (z >> uint64(31))


@njit(cache=True)
def path_state(seed, index, state):
    """Seed ``state`` for path ``index`` of a run with master ``seed``."""
    seed_state(mix64(seed) ^ uint64(index), state)


@njit(cache=True)
def seed_state(seed, state):
    """Fill ``state`` (uint64[5]) from a 64-bit seed; the last slot is reserved."""
    z = uint64(seed)
    for i in range(4):
        z = z + _GOLDEN
        s = z
        s = (s ^ (s >> uint64(30))) * _MIX1
        s = (s ^ (s >> uint64(27))) * _MIX2
        state[i] = s ^ (s >> uint64(31))


@njit(cache=True)
def next_u64(state):
    s0, s1, s2, s3 = state[0], state[1], state[2], state[3]
    result = _rotl(s1 * uint64(5), 7) * uint64(9)
    t = s1 << uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state[0], state[1], state[2], state[3] = s0, s1, s2, s3
    return result


@njit(cache=True)
def uniform(state):
    """Double in the open interval (0, 1)."""
    return (float(next_u64(state) >> uint64(11)) + 0.5) * _TWO53


@njit(cache=True)
def normal(state):
    # Box-Muller, one variate per call keeps the stream position simple
    u1 = uniform(state)
    u2 = uniform(state)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@njit(cache=True)
def _fill_normals(seed, out):
    state = np.empty(5, dtype=np.uint64)
    seed_state(seed, state)
    for i in range(out.size):
        out[i] = normal(state)


def standard_normals(seed: int, n: int) -> np.ndarray:
    """``n`` standard normals from one stream; used by tests of the generator."""
    out = np.empty(n)
    _fill_normals(np.uint64(seed), out)
    return out
