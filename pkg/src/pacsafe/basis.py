"""Barrier templates on a box: Handelman and Bernstein product bases.

Terms are indexed by multi-indices ``(i_1, ..., i_n)`` with each
``i_j in {0..kappa}``, enumerated lexicographically with ``i_1`` varying
slowest (``itertools.product`` order).  The flat position of a multi-index
is therefore its base-``(kappa+1)`` numeral.  Certificates record this
order tag so stored coefficients stay portable.

Each term is a product of per-coordinate factors ``phi_j[i_j](x_j)``:

* handelman: ``(x_j - lo_j)**i * (hi_j - x_j)**(kappa - i)``
* bernstein: ``comb(kappa, i) * psi**i * (1 - psi)**(kappa - i)`` with
  ``psi = (x_j - lo_j) / (hi_j - lo_j)`` clamped to [0, 1]

so a feature vector is the row-wise Kronecker product of the per-coordinate
factor rows.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import SafeSet
from .errors import ConfigError

ORDER_TAG = "lexicographic"
MAX_KAPPA = 60
KINDS = ("handelman", "bernstein")


def _powers(v: np.ndarray, kappa: int) -> np.ndarray:
    """Columns ``v**0 .. v**kappa`` by repeated multiplication."""
    out = np.empty((v.shape[0], kappa + 1))
    out[:, 0] = 1.0
    for i in range(1, kappa + 1):
        np.multiply(out[:, i - 1], v, out=out[:, i])
    return out


class MultiIndexBasis:
    """Product basis of per-coordinate degree ``kappa`` on ``[lo, hi]``."""

    def __init__(self, kind: str, kappa: int, lo, hi):
        if kind not in KINDS:
            raise ConfigError(f"unknown basis kind {kind!r}; expected one of {KINDS}")
        if isinstance(kappa, bool) or not isinstance(kappa, (int, np.integer)) or kappa < 0:
            raise ConfigError(f"kappa must be a nonnegative integer, got {kappa!r}")
        if kappa > MAX_KAPPA:
            raise ConfigError(f"kappa={kappa} exceeds the supported maximum {MAX_KAPPA}")
        lo = np.asarray(lo, dtype=np.float64).reshape(-1)
        hi = np.asarray(hi, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise ConfigError("basis box bounds have different lengths")
        if not np.all(hi > lo):
            raise ConfigError(f"degenerate basis box: need hi > lo in every coordinate ({lo} vs {hi})")
        self.kind = kind
        self.kappa = int(kappa)
        self.lo = lo
        self.hi = hi
        self.n = lo.shape[0]
        self.m = (self.kappa + 1) ** self.n
        self._binom = np.array([math.comb(self.kappa, i) for i in range(self.kappa + 1)],
                               dtype=np.float64)

    def __repr__(self):
        return f"MultiIndexBasis({self.kind!r}, kappa={self.kappa}, n={self.n}, m={self.m})"

    def multi_indices(self):
        """Multi-indices in storage order."""
        return list(itertools.product(range(self.kappa + 1), repeat=self.n))

    def factors(self, X: np.ndarray, j: int) -> np.ndarray:
        """Per-coordinate factor matrix ``(k, kappa+1)`` for coordinate ``j``."""
        x = np.asarray(X, dtype=np.float64)[..., j].reshape(-1)
        if self.kind == "handelman":
            u, v = x - self.lo[j], self.hi[j] - x
            return _powers(u, self.kappa) * _powers(v, self.kappa)[:, ::-1]
        psi = np.clip((x - self.lo[j]) / (self.hi[j] - self.lo[j]), 0.0, 1.0)
        return self._binom * _powers(psi, self.kappa) * _powers(1.0 - psi, self.kappa)[:, ::-1]

    def features(self, X) -> np.ndarray:
        """Term values for a batch ``(k, n)`` (or one point); shape ``(k, m)``."""
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        X = X.reshape(-1, self.n)
        if not np.all(np.isfinite(X)):
            raise ValueError("features requested at non-finite points")
        out = np.ones((X.shape[0], 1))
        for j in range(self.n):
            F = self.factors(X, j)
            out = (out[:, :, None] * F[:, None, :]).reshape(X.shape[0], -1)
        return out[0] if single else out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "kappa": self.kappa, "bbox_lo": self.lo.tolist(),
                "bbox_hi": self.hi.tolist(), "order": ORDER_TAG, "m": self.m}


@dataclass(frozen=True)
class BarrierTemplate:
    """Gated barrier ``h(a, x) = features(x) . a`` on X and ``outside_value`` off X."""

    basis: MultiIndexBasis
    safe_set: SafeSet
    outside_value: float
    U_a: float

    def __post_init__(self):
        if self.basis.n != self.safe_set.dim:
            raise ConfigError("basis and safe set dimensions differ")

    @property
    def m(self) -> int:
        return self.basis.m

    def features(self, X) -> np.ndarray:
        return self.basis.features(X)

    def _check_coeffs(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.float64).reshape(-1)
        if a.shape[0] != self.m:
            raise ValueError(f"coefficient vector has length {a.shape[0]}, expected {self.m}")
        return a

    def eval_batch(self, a, X) -> np.ndarray:
        a = self._check_coeffs(a)
        X = np.asarray(X, dtype=np.float64).reshape(-1, self.basis.n)
        inside = self.safe_set.contains_batch(X)
        out = np.full(X.shape[0], float(self.outside_value))
        if np.any(inside):
            out[inside] = self.basis.features(X[inside]) @ a
        return out

    def eval(self, a, x) -> float:
        """``h(a, x)``; never needs a successor inside X to be evaluated."""
        return float(self.eval_batch(a, np.asarray(x, dtype=np.float64).reshape(1, -1))[0])

    def group_mean_features(self, next_states: np.ndarray):
        """Mean gated features over the ``M`` successors of each state.

        ``next_states`` has shape ``(k, M, n)``.  Returns ``(mean_in, frac_out)``
        where ``mean_in[i] = (1/M) sum_{j: x+_ij in X} features(x+_ij)`` and
        ``frac_out[i]`` is the fraction of successors outside X, so the mean
        barrier value is ``mean_in[i] . a + outside_value * frac_out[i]``.
        """
        Xn = np.asarray(next_states, dtype=np.float64)
        k, M, n = Xn.shape
        inside = self.safe_set.contains_batch(Xn)
        frac_out = 1.0 - inside.mean(axis=1)
        # rows of outside successors become zero so they drop out of the sum
        w = inside.astype(np.float64) / M
        # park outside successors at the centre: their weight is zero, and
        # far-away points could otherwise overflow into 0 * inf = nan
        flat = np.where(inside.reshape(-1, 1), Xn.reshape(-1, n), self.safe_set.centre())
        if n == 1:
            F = self.basis.factors(flat, 0).reshape(k, M, -1) * w[:, :, None]
            return F.sum(axis=1), frac_out
        # left half of the coordinates varies slowest, so sum_j L_j^T R_j
        # flattened row-major is the lexicographic feature mean
        h = n // 2
        left = self._partial(flat, range(h)).reshape(k, M, -1) * w[:, :, None]
        right = self._partial(flat, range(h, n)).reshape(k, M, -1)
        mean_in = np.matmul(left.transpose(0, 2, 1), right).reshape(k, -1)
        return mean_in, frac_out

    def _partial(self, flat, dims) -> np.ndarray:
        out = np.ones((flat.shape[0], 1))
        for j in dims:
            F = self.basis.factors(flat, j)
            out = (out[:, :, None] * F[:, None, :]).reshape(flat.shape[0], -1)
        return out


def rbc_template(safe_set: SafeSet, kappa: int, C: float, U_a: float) -> BarrierTemplate:
    basis = MultiIndexBasis("handelman", kappa, safe_set.bbox_lo, safe_set.bbox_hi)
    return BarrierTemplate(basis, safe_set, float(C), float(U_a))


def sbc_template(safe_set: SafeSet, kappa: int, U_a: float) -> BarrierTemplate:
    basis = MultiIndexBasis("bernstein", kappa, safe_set.bbox_lo, safe_set.bbox_hi)
    return BarrierTemplate(basis, safe_set, 1.0, float(U_a))
