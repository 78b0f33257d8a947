"""Drawing one-to-one and one-to-many sample sets.

States come from stream 0 and disturbance hints from stream 1 of the run
seed.  Draw ``k`` of the disturbance stream is at counter ``k``; for group
sets draw ``(i, j)`` is at ``i * M + j``.  Work is split into chunks of
consecutive draws that may run on worker threads; chunks are written into
preallocated slots, so the result never depends on the worker count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Union

import numpy as np

from ..core import GroupSampleSet, PairSampleSet, SafeSet
from ..rng import DISTURBANCE_STREAM, STATE_STREAM, RngStream
from .base import BlackBoxSystem

CHUNK = 1 << 17


def _seed_of(seed: Union[int, RngStream]) -> int:
    return seed.seed if isinstance(seed, RngStream) else int(seed)


def _run_chunks(total: int, work, workers: int) -> None:
    bounds = [(s, min(s + CHUNK, total)) for s in range(0, total, CHUNK)]
    if workers <= 1 or len(bounds) == 1:
        for s, e in bounds:
            work(s, e)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # list() re-raises the first worker exception here
        list(pool.map(lambda b: work(*b), bounds))


def draw_pair_samples(sys: BlackBoxSystem, safe_set: SafeSet, N: int,
                      seed: Union[int, RngStream] = 0, workers: int = 1) -> PairSampleSet:
    """``N`` i.i.d. pairs with recorded successors; exactly ``N`` oracle steps."""
    if N < 1:
        raise ValueError("N must be at least 1")
    seed = _seed_of(seed)
    states = safe_set.sample(RngStream(seed, STATE_STREAM), N)
    dstream = RngStream(seed, DISTURBANCE_STREAM)
    D = np.empty((N, sys.n_d))
    Xn = np.empty((N, sys.n))

    def work(s, e):
        hints = dstream.u64_at(np.arange(s, e, dtype=np.uint64))
        D[s:e] = sys.sample_d_batch(hints)
        Xn[s:e] = sys.step_batch(states[s:e], D[s:e])

    _run_chunks(N, work, workers)
    return PairSampleSet(states, D, Xn, seed)


def draw_group_samples(sys: BlackBoxSystem, safe_set: SafeSet, N: int, M: int,
                       seed: Union[int, RngStream] = 0, workers: int = 1) -> GroupSampleSet:
    """``N`` states with ``M`` disturbances each; exactly ``N * M`` oracle steps."""
    if N < 1 or M < 1:
        raise ValueError("N and M must be at least 1")
    seed = _seed_of(seed)
    states = safe_set.sample(RngStream(seed, STATE_STREAM), N)
    dstream = RngStream(seed, DISTURBANCE_STREAM)
    total = N * M
    D = np.empty((total, sys.n_d))
    Xn = np.empty((total, sys.n))

    def work(s, e):
        idx = np.arange(s, e, dtype=np.int64)
        D[s:e] = sys.sample_d_batch(dstream.u64_at(idx.astype(np.uint64)))
        Xn[s:e] = sys.step_batch(states[idx // M], D[s:e])

    _run_chunks(total, work, workers)
    return GroupSampleSet(states, D.reshape(N, M, sys.n_d), Xn.reshape(N, M, sys.n), seed)
