"""Deterministic random-stream derivation.

Every unit of parallelizable work (bootstrap replicate, recursion branch,
experiment replicate) draws from a generator keyed by (master seed, path),
so results are identical regardless of execution order or thread count.
"""
import os

import numpy as np


def stream(seed, *path):
    """Independent Generator for the work unit identified by ``path``.

    Parameters
    ----------
    seed : int
        Non-negative master seed.
    *path : int
        Non-negative integers identifying the unit of work.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=path))


def derive_seed(seed, *path):
    """Collapse (seed, path) into a fresh non-negative 64-bit master seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=path)
    return int(ss.generate_state(1, np.uint64)[0])


def thread_count():
    """Worker cap from CORRSHIFT_THREADS; defaults to 1 (sequential)."""
    raw = os.environ.get("CORRSHIFT_THREADS", "")
    try:
        count = int(raw)
    except ValueError:
        return 1
    return max(count, 1)
