"""Counter-based splitmix64 streams.

Draw k of path p under seed s is mix(key(s, p) + k * GAMMA) with
key(s, p) = mix(mix(s) + p * GAMMA).  Any path can be replayed in isolation,
so results do not depend on how paths are distributed over workers.
"""

from __future__ import annotations

import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
M1 = np.uint64(0xBF58476D1CE4E5B9)
M2 = np.uint64(0x94D049BB133111EB)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
INV53 = 1.0 / 9007199254740992.0


def mix(z):
    """splitmix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> S30)) * M1
        z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


def path_keys(seed, paths):
    paths = np.asarray(paths, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix(mix(np.uint64(seed) + GAMMA) + paths * GAMMA)


def uniform(keys, counters):
    """Open-interval uniforms for draw ``counters`` of the streams ``keys``."""
    with np.errstate(over="ignore"):
        z = mix(keys + (np.asarray(counters, dtype=np.uint64) + np.uint64(1)) * GAMMA)
    return ((z >> S11).astype(np.float64) + 0.5) * INV53
