"""Disturbance distributions drawn from 64-bit hints.

Each draw gets its own hint (see :mod:`pacsafe.rng`).  Coordinate ``c`` of
the draw reads words from the child key ``derive_keys(hint, c)``, so the
result for a hint never depends on what else is drawn in the same batch.
All samplers are vectorised over hints.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, SamplingError
from ..rng import counter_normal, counter_uniform, derive_keys

MAX_REJECTION_ATTEMPTS = 10_000

# child-key tags; keep stable, they are part of the draw definition
_TAG_GAMMA_A = 1 << 20
_TAG_GAMMA_B = 2 << 20
_TAG_BOOST = 3 << 20


def _truncated_normal(keys, mean, sd, lo, hi):
    out = np.empty(keys.shape[0])
    pending = np.arange(keys.shape[0])
    attempt = 0
    while pending.size:
        if attempt >= MAX_REJECTION_ATTEMPTS:
            raise SamplingError(
                f"truncated normal rejection exceeded {MAX_REJECTION_ATTEMPTS} attempts; "
                f"window [{lo}, {hi}] holds almost no mass of N({mean}, {sd}^2)")
        z = mean + sd * counter_normal(keys[pending], attempt)
        ok = (z >= lo) & (z <= hi)
        out[pending[ok]] = z[ok]
        pending = pending[~ok]
        attempt += 1
    return out


def _gamma(keys, shape):
    """Marsaglia-Tsang squeeze sampler, unit scale; two words per attempt."""
    boost = shape < 1.0
    a = shape + 1.0 if boost else shape
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(keys.shape[0])
    pending = np.arange(keys.shape[0])
    attempt = 0
    while pending.size:
        if attempt >= MAX_REJECTION_ATTEMPTS:
            raise SamplingError("gamma sampler exceeded its attempt cap")
        k = keys[pending]
        x = counter_normal(k, 2 * attempt)
        u = counter_uniform(k, 2 * attempt + 1)
        v = 1.0 + c * x
        pos = v > 0
        v3 = np.where(pos, v, 1.0) ** 3
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = pos & ((u < 1.0 - 0.0331 * x ** 4)
                            | (np.log(u) < 0.5 * x * x + d * (1.0 - v3 + np.log(v3))))
        out[pending[accept]] = d * v3[accept]
        pending = pending[~accept]
        attempt += 1
    if boost:
        u = counter_uniform(derive_keys(keys, _TAG_BOOST), 0)
        out *= u ** (1.0 / shape)
    return out


@dataclass(frozen=True)
class DisturbanceDistribution:
    """Product distribution with independent coordinates.

    ``kind`` is one of ``uniform`` (params ``lo``, ``hi``),
    ``truncated_normal`` (``mean``, ``sd``, ``lo``, ``hi``), ``beta``
    (``a``, ``b``) or ``constant`` (``value``; a point mass, for tests).
    Parameters are per-coordinate sequences of length ``dim``.
    """

    kind: str
    params: dict

    def __post_init__(self):
        p = {k: tuple(float(v) for v in np.atleast_1d(vals)) for k, vals in self.params.items()}
        object.__setattr__(self, "params", p)
        required = {
            "uniform": ("lo", "hi"),
            "truncated_normal": ("mean", "sd", "lo", "hi"),
            "beta": ("a", "b"),
            "constant": ("value",),
        }
        if self.kind not in required:
            raise ConfigError(f"unknown disturbance distribution kind {self.kind!r}")
        names = required[self.kind]
        if set(p) != set(names):
            raise ConfigError(f"{self.kind} needs parameters {names}, got {sorted(p)}")
        lengths = {len(v) for v in p.values()}
        if len(lengths) != 1:
            raise ConfigError("distribution parameters must all have the same length")
        arr = {k: np.array(v) for k, v in p.items()}
        if "lo" in arr and not np.all(arr["lo"] < arr["hi"]):
            raise ConfigError("distribution support needs lo < hi")
        if "sd" in arr and not np.all(arr["sd"] > 0):
            raise ConfigError("truncated normal needs sd > 0")
        if self.kind == "beta" and not (np.all(arr["a"] > 0) and np.all(arr["b"] > 0)):
            raise ConfigError("beta shape parameters must be positive")

    @classmethod
    def uniform(cls, lo, hi):
        return cls("uniform", {"lo": lo, "hi": hi})

    @classmethod
    def truncated_normal(cls, mean, sd, lo, hi):
        return cls("truncated_normal", {"mean": mean, "sd": sd, "lo": lo, "hi": hi})

    @classmethod
    def beta(cls, a, b):
        return cls("beta", {"a": a, "b": b})

    @classmethod
    def constant(cls, value):
        return cls("constant", {"value": value})

    @property
    def dim(self) -> int:
        return len(next(iter(self.params.values())))

    def from_hints(self, hints) -> np.ndarray:
        """One draw per hint; returns an array of shape ``(len(hints), dim)``."""
        hints = np.asarray(hints, dtype=np.uint64).reshape(-1)
        out = np.empty((hints.shape[0], self.dim))
        p = self.params
        for c in range(self.dim):
            keys = derive_keys(hints, c)
            if self.kind == "uniform":
                u = counter_uniform(keys, 0)
                out[:, c] = p["lo"][c] + (p["hi"][c] - p["lo"][c]) * u
            elif self.kind == "truncated_normal":
                out[:, c] = _truncated_normal(keys, p["mean"][c], p["sd"][c],
                                              p["lo"][c], p["hi"][c])
            elif self.kind == "beta":
                x = _gamma(derive_keys(keys, _TAG_GAMMA_A), p["a"][c])
                y = _gamma(derive_keys(keys, _TAG_GAMMA_B), p["b"][c])
                out[:, c] = x / (x + y)
            else:
                out[:, c] = p["value"][c]
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": {k: list(v) for k, v in self.params.items()}}
