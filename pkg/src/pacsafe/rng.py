"""Counter-based random streams.

Every random number in the package comes from SplitMix64 used in counter
mode: the value at position ``k`` of a stream with key ``K`` is
``mix64(K + (k + 1) * GOLDEN)``, where ``mix64`` is the SplitMix64
finalizer.  A stream key is derived from ``(seed, stream_index)``, so the
pair fully determines the sequence and any position can be computed
without generating the ones before it.  That random access is what lets
sampling be chunked (or split across workers) without changing results.

Fixed stream layout used by the certification pipelines::

    0  state draws
    1  disturbance draws (one 64-bit hint per draw)
    2  Monte Carlo validation
    3  anchor states for the stochastic-barrier objective

Disturbance draws are made from a 64-bit *hint*: the hint is a key for a
private counter stream from which the distribution draws as many words as
it needs (rejection samplers need a variable count).  The same hint always
gives the same disturbance, in this process or in an external plugin.
"""
from __future__ import annotations

import numpy as np
from scipy.special import ndtri

ALGORITHM_ID = "splitmix64-ctr/1"

STATE_STREAM = 0
DISTURBANCE_STREAM = 1
VALIDATION_STREAM = 2
ANCHOR_STREAM = 3

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
# odd constant used to separate stream indices from seeds
_STREAM_GAMMA = 0xD1B54A32D192ED03

_GOLDEN_U = np.uint64(_GOLDEN)
_M1_U = np.uint64(_M1)
_M2_U = np.uint64(_M2)
_TWO_M53 = 1.0 / (1 << 53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1_U
        z = (z ^ (z >> np.uint64(27))) * _M2_U
    return z ^ (z >> np.uint64(31))


def counter_u64(keys, counters) -> np.ndarray:
    """Words at ``counters`` of the streams keyed by ``keys`` (broadcasting)."""
    keys = np.asarray(keys, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = keys + (counters + np.uint64(1)) * _GOLDEN_U
    return mix64_array(z)


def to_open_unit(words: np.ndarray) -> np.ndarray:
    """Map 64-bit words to doubles strictly inside (0, 1)."""
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _TWO_M53


def counter_uniform(keys, counters) -> np.ndarray:
    return to_open_unit(counter_u64(keys, counters))


def counter_normal(keys, counters) -> np.ndarray:
    # inverse-CDF keeps one word per normal, so counters stay aligned
    return ndtri(counter_uniform(keys, counters))


def derive_keys(keys, tag: int) -> np.ndarray:
    """Independent child keys, one per parent key, labelled by ``tag``."""
    keys = np.asarray(keys, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = keys ^ np.uint64(mix64(tag * _STREAM_GAMMA + _GOLDEN))
    return mix64_array(z)


def stream_key(seed: int, stream_index: int) -> int:
    if not 0 <= seed <= _MASK:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if not 0 <= stream_index <= _MASK:
        raise ValueError(f"stream_index must be an unsigned 64-bit integer, got {stream_index}")
    return mix64(mix64(seed + _GOLDEN) ^ mix64((stream_index + 1) * _STREAM_GAMMA))


class RngStream:
    """Sequential cursor over one ``(seed, stream_index)`` counter stream.

    ``u64``/``uniform``/``normal`` consume words from the current position;
    ``u64_at`` reads arbitrary positions without moving the cursor.
    """

    algorithm_id = ALGORITHM_ID

    def __init__(self, seed: int = 0, stream_index: int = 0, position: int = 0):
        self.seed = int(seed)
        self.stream_index = int(stream_index)
        self.key = stream_key(self.seed, self.stream_index)
        self.position = int(position)

    def __repr__(self) -> str:
        return (f"RngStream(seed={self.seed}, stream_index={self.stream_index}, "
                f"position={self.position})")

    def substream(self, stream_index: int) -> "RngStream":
        """Fresh stream with the same seed and another index."""
        return RngStream(self.seed, stream_index)

    def u64_at(self, counters) -> np.ndarray:
        return counter_u64(np.uint64(self.key), counters)

    def u64(self, size: int) -> np.ndarray:
        counters = np.arange(self.position, self.position + size, dtype=np.uint64)
        self.position += size
        return self.u64_at(counters)

    def next_u64(self) -> int:
        return int(self.u64(1)[0])

    def uniform(self, size: int, low=0.0, high=1.0) -> np.ndarray:
        u = to_open_unit(self.u64(size))
        return low + (high - low) * u

    def normal(self, size: int) -> np.ndarray:
        return ndtri(self.uniform(size))

    def skip(self, count: int) -> None:
        self.position += int(count)
