"""Deterministic per-replication random streams.

Replication ``i`` of a run seeded with ``root`` draws from
``numpy.random.default_rng(splitmix64(root + i))``. The SplitMix64 finalizer
decorrelates neighbouring integers, so consecutive replication indices give
unrelated PCG64 seeds.
"""
import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(x):
    z = (int(x) + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def split_stream(root_seed, index):
    """Independent generator for replication ``index`` under ``root_seed``."""
    return np.random.default_rng(splitmix64((int(root_seed) + int(index)) & _MASK))
