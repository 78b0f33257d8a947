"""Built-in benchmark dynamics.

Each benchmark is a discrete-time map ``x+ = f(x, d)`` written for batches:
``f`` receives states of shape ``(k, n)`` and disturbances ``(k, n_d)``.
Discretisation steps are baked in as published.
"""
from __future__ import annotations

import numpy as np

from ..core import BallSet, BoxSet
from ..errors import ConfigError
from .base import BenchmarkSystem
from .distributions import DisturbanceDistribution as Dist


def _vinc(X, D):
    x, y, d = X[:, 0], X[:, 1], D[:, 0]
    return np.column_stack([
        x + 0.01 * (y - x * (d + 0.5)),
        y + 0.01 * (-(1.0 - x * x) * x - y),
    ])


def _arch(X, D):
    x, y = X[:, 0], X[:, 1]
    return np.column_stack([
        x + 0.01 * (x - x ** 3 + y - x * y * y + D[:, 0]),
        y + 0.01 * (-x + y - x * x * y - y ** 3 + D[:, 1]),
    ])


def _stable3(X, D):
    x, y, z = X[:, 0], X[:, 1], X[:, 2]
    return np.column_stack([
        x + 0.01 * (-x + y - z - x * D[:, 0]),
        y + 0.01 * (-x * (z + 1.0) - y - y * D[:, 1]),
        z + 0.01 * (0.76524 * x - 4.7037 * z - z * D[:, 2]),
    ])


def _lin4(X, D):
    x1, x2, x3, x4 = X.T
    return np.column_stack([
        x1 + 0.01 * (-x1 + D[:, 0]),
        x2 + 0.01 * (x1 - 2.0 * x2),
        x3 + 0.01 * (x1 - 4.0 * x3),
        x4 + 0.01 * (x1 - 3.0 * x4),
    ])


def _poly6(X, D):
    ts = 0.01
    x1, x2, x3, x4, x5, x6 = X.T
    d = D[:, 0]
    return np.column_stack([
        x1 + ts * (x2 * x4 - x1 ** 3),
        x2 + ts * (-3.0 * x1 * x4 - x2 ** 3),
        x3 + ts * (-x3 - 3.0 * x1 * x4 ** 3),
        x4 + ts * (-x4 + x1 * x3),
        x5 + ts * (-x5 + x6 ** 3),
        x6 + ts * (-x5 - x6 + x3 ** 4 - x6 * d),
    ])


def _lotka(X, D):
    r, a, c = 0.5, 1.0, 1.0
    x, y = X[:, 0], X[:, 1]
    s = -0.5 + D[:, 0]
    return np.column_stack([
        r * x - a * y * x,
        s * y + a * c * y * x,
    ])


def _pendulum(X, D):
    x, y, d = X[:, 0], X[:, 1], D[:, 0]
    return np.column_stack([
        x + 0.1 * y,
        y + 0.1 * (-2.0 * y / d + 0.81 * np.sin(x) * np.cos(x) - np.sin(x)),
    ])


def _sank4(X, D):
    ts = 0.01
    x1, x2, x3, x4 = X.T
    return np.column_stack([
        x1 + ts * (-x1 + x2 ** 3 - 3.0 * x3 * x4 + D[:, 0]),
        x2 + ts * (-x1 - x2 ** 3),
        x3 + ts * (x1 * x4 - x3),
        x4 + ts * (x1 * x3 - x4 ** 3),
    ])


def _lorenz7(X, D):
    ts = 0.01
    # column k holds x_{k+1}; indices wrap cyclically
    nxt = np.roll(X, -1, axis=1)   # x_{i+1}
    prev = np.roll(X, 1, axis=1)   # x_{i-1}
    prev2 = np.roll(X, 2, axis=1)  # x_{i-2}
    return X + ts * ((nxt - prev2) * prev - X + D)


def _build():
    return {
        "vinc": lambda: BenchmarkSystem(
            "vinc", _vinc, BallSet([0.0, 0.0], 0.64),
            Dist.truncated_normal([0.0], [0.1], [-0.7], [0.7])),
        "arch": lambda: BenchmarkSystem(
            "arch", _arch, BoxSet([-3.0, -3.0], [3.0, 3.0]),
            Dist.uniform([-0.5, -0.5], [0.5, 0.5])),
        "stable3": lambda: BenchmarkSystem(
            "stable3", _stable3, BoxSet([-1.0] * 3, [1.0] * 3),
            Dist.uniform([1.0, 1.0, 2.0], [2.0, 2.0, 3.0])),
        "lin4": lambda: BenchmarkSystem(
            "lin4", _lin4, BallSet([0.0] * 4, 1.0), Dist.beta([10.0], [10.0])),
        "poly6": lambda: BenchmarkSystem(
            "poly6", _poly6, BallSet([0.0] * 6, 1.0), Dist.uniform([0.5], [1.0])),
        "lotka": lambda: BenchmarkSystem(
            "lotka", _lotka, BallSet([0.0, 0.0], 1.0), Dist.uniform([-1.0], [1.0])),
        "pendulum": lambda: BenchmarkSystem(
            "pendulum", _pendulum, BoxSet([-1.0, -1.0], [1.0, 1.0]),
            Dist.uniform([0.9], [1.1])),
        "sank4": lambda: BenchmarkSystem(
            "sank4", _sank4, BallSet([0.0] * 4, 1.0), Dist.uniform([-1.0], [1.0])),
        "lorenz7": lambda: BenchmarkSystem(
            "lorenz7", _lorenz7, BoxSet([-1.0] * 7, [1.0] * 7),
            Dist.uniform([-1.0] * 7, [1.0] * 7)),
    }


_REGISTRY = _build()

#: benchmark names in example order (example k is ``BUILTIN_NAMES[k - 1]``)
BUILTIN_NAMES = ("vinc", "arch", "stable3", "lin4", "poly6", "lotka", "pendulum", "sank4", "lorenz7")


def builtin(name: str) -> BenchmarkSystem:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ConfigError(f"unknown benchmark {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
