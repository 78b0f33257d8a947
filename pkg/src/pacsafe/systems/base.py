"""Black-box system interface.

Certification code talks to a system only through :meth:`step` /
:meth:`step_batch` and :meth:`sample_d` / :meth:`sample_d_batch`.  The
batched forms exist purely for throughput and must agree with the
single-call forms row by row.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from ..core import SafeSet, as_vector
from ..rng import RngStream
from .distributions import DisturbanceDistribution


class BlackBoxSystem:
    """Abstract discrete-time system ``x+ = f(x, d)`` with a safe set."""

    name: str = "abstract"
    n: int
    n_d: int
    safe_set: SafeSet
    source: str = "builtin"

    def step(self, x, d) -> np.ndarray:
        x = as_vector(x, self.n, "state")
        d = as_vector(d, self.n_d, "disturbance")
        return self.step_batch(x.reshape(1, -1), d.reshape(1, -1))[0]

    def step_batch(self, X: np.ndarray, D: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample_d_hint(self, hint: int) -> np.ndarray:
        """Disturbance determined by a 64-bit hint."""
        return self.sample_d_batch(np.array([hint], dtype=np.uint64))[0]

    def sample_d_batch(self, hints) -> np.ndarray:
        raise NotImplementedError

    def sample_d(self, rng: RngStream) -> np.ndarray:
        """Draw one disturbance, consuming one word of ``rng`` as the hint."""
        return self.sample_d_hint(rng.next_u64())

    def describe(self) -> dict:
        return {"name": self.name, "n": self.n, "n_d": self.n_d,
                "safe_set": self.safe_set.to_dict(), "source": self.source}


class BenchmarkSystem(BlackBoxSystem):
    """In-process system from a vectorised map and a disturbance distribution."""

    def __init__(self, name: str, f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                 safe_set: SafeSet, distribution: DisturbanceDistribution):
        self.name = name
        self._f = f
        self.safe_set = safe_set
        self.distribution = distribution
        self.n = safe_set.dim
        self.n_d = distribution.dim

    def __repr__(self):
        return f"BenchmarkSystem({self.name!r}, n={self.n}, n_d={self.n_d})"

    def step_batch(self, X, D):
        X = np.asarray(X, dtype=np.float64).reshape(-1, self.n)
        D = np.asarray(D, dtype=np.float64).reshape(-1, self.n_d)
        if X.shape[0] != D.shape[0]:
            raise ValueError(f"{X.shape[0]} states but {D.shape[0]} disturbances")
        return np.asarray(self._f(X, D), dtype=np.float64).reshape(X.shape)

    def sample_d_batch(self, hints):
        return self.distribution.from_hints(hints)

    def with_distribution(self, distribution: DisturbanceDistribution) -> "BenchmarkSystem":
        """Same dynamics and safe set under another disturbance law (tests)."""
        if distribution.dim != self.n_d:
            raise ValueError("replacement distribution has the wrong dimension")
        return BenchmarkSystem(self.name, self._f, self.safe_set, distribution)


class CountingSystem(BlackBoxSystem):
    """Wrapper that counts oracle queries (one per row for batched calls)."""

    def __init__(self, inner: BlackBoxSystem):
        self.inner = inner
        self.name = inner.name
        self.n = inner.n
        self.n_d = inner.n_d
        self.safe_set = inner.safe_set
        self.source = inner.source
        self.step_calls = 0
        self.sample_calls = 0

    def step_batch(self, X, D):
        out = self.inner.step_batch(X, D)
        self.step_calls += out.shape[0]
        return out

    def sample_d_batch(self, hints):
        out = self.inner.sample_d_batch(hints)
        self.sample_calls += out.shape[0]
        return out

    def describe(self):
        return self.inner.describe()
