"""Scenario linear programs for the robust and stochastic barrier templates.

Variables are ``z = (a_1, ..., a_m, s)`` where ``s`` is the scalar slack
(``xi`` for the robust programs, ``lambda`` for the stochastic one).  All
rows have the form ``row . z <= rhs``; bounds are kept as bounds.

Robust rows, one per recorded ``(x, d, x+)``, encode
``h(a, x+) >= gamma h(a, x) - xi``:

* ``x+`` in X:  ``(gamma F(x) - F(x+)) . a - xi <= 0``
* ``x+`` off X: ``gamma F(x) . a - xi <= C``  (``h(x+) = C`` moves right)

Stochastic rows, one per sampled state, encode
``mean_j h(a, x+_ij) <= h(a, x_i) + lambda - tau``:

``(mean_in_i - F(x_i)) . a - lambda <= -tau - frac_out_i``

where successors off X contribute the constant 1 through ``frac_out_i``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ..basis import BarrierTemplate
from ..core import GroupSampleSet, PairSampleSet
from ..errors import ConfigError
from .simplex import LpSolution, solve_lp

ROW_CHUNK = 1 << 15


@dataclass(frozen=True)
class LpModel:
    """``min c.z  s.t.  A z <= b,  lo <= z <= hi``.

    ``provenance[r]`` is the sample that produced row ``r``: the pair index
    for one-to-one sets, ``i * M + j`` for robust one-to-many rows, and the
    state index for stochastic rows.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    provenance: np.ndarray
    kind: str                   # "rbc" | "sbc"
    scalar_name: str            # "xi" | "lambda"

    @property
    def n_vars(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def scalar_index(self) -> int:
        return self.n_vars - 1

    def residuals(self, z) -> np.ndarray:
        return self.A @ np.asarray(z, dtype=np.float64) - self.b

    def is_feasible(self, z, tol: float = 1e-9) -> bool:
        z = np.asarray(z, dtype=np.float64)
        return bool(np.all(self.residuals(z) <= tol) and np.all(z >= self.lo) and np.all(z <= self.hi))

    def dump(self, path) -> None:
        """Plain-text dump for cross-checking with other solvers.

        Format: a ``lp-dump 1`` header line, ``vars N`` and ``rows R``, one
        ``obj`` line with the objective coefficients, one ``bound lo hi``
        line per variable, then one ``row rhs c_1 ... c_n`` line per row
        meaning ``sum c_k z_k <= rhs``.  Numbers use ``repr`` precision.
        """
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("lp-dump 1\n")
            fh.write(f"kind {self.kind} scalar {self.scalar_name}\n")
            fh.write(f"vars {self.n_vars}\nrows {self.n_rows}\n")
            fh.write("obj " + " ".join(repr(float(v)) for v in self.c) + "\n")
            for l, h in zip(self.lo, self.hi):
                fh.write(f"bound {float(l)!r} {float(h)!r}\n")
            for r in range(self.n_rows):
                fh.write(f"row {float(self.b[r])!r} " + " ".join(repr(float(v)) for v in self.A[r]) + "\n")

    @staticmethod
    def load(path) -> "LpModel":
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines or lines[0] != "lp-dump 1":
            raise ConfigError(f"{path} is not an LP dump")
        _, kind, _, scalar = lines[1].split()
        c = np.array([float(v) for v in lines[4].split()[1:]])
        n = c.shape[0]
        bounds = np.array([[float(v) for v in ln.split()[1:]] for ln in lines[5:5 + n]])
        rows = [ln.split()[1:] for ln in lines[5 + n:]]
        b = np.array([float(r[0]) for r in rows])
        A = np.array([[float(v) for v in r[1:]] for r in rows]).reshape(len(rows), n)
        return LpModel(c, A, b, bounds[:, 0], bounds[:, 1], np.arange(len(rows)), kind, scalar)


def build_rbc_lp(samples: Union[PairSampleSet, GroupSampleSet], template: BarrierTemplate,
                 gamma: float, U_a: float, xi_bar: float) -> LpModel:
    """Robust scenario program over a pair set (one row per pair) or group set (per draw)."""
    if template.basis.kind != "handelman" or not template.outside_value < 0:
        raise ConfigError("robust programs need a Handelman template with negative outside value")
    if samples.N == 0:
        raise ConfigError("empty sample set")
    states = samples.states
    if isinstance(samples, GroupSampleSet):
        M = samples.M
        succ = samples.next_states.reshape(-1, states.shape[1])
    else:
        M = 1
        succ = samples.next_states
    R = succ.shape[0]
    m = template.m
    C = float(template.outside_value)
    A = np.empty((R, m + 1))
    b = np.zeros(R)
    A[:, m] = -1.0
    # features of each state once, reused across its M rows
    Fx = np.empty((samples.N, m))
    for s in range(0, samples.N, ROW_CHUNK):
        Fx[s:s + ROW_CHUNK] = template.features(states[s:s + ROW_CHUNK])
    Fx *= gamma
    for s in range(0, R, ROW_CHUNK):
        e = min(s + ROW_CHUNK, R)
        xs = succ[s:e]
        inside = template.safe_set.contains_batch(xs)
        blk = A[s:e, :m]
        blk[:] = Fx[np.arange(s, e) // M]
        if np.any(inside):
            blk[inside] -= template.features(xs[inside])
        b[s:e] = np.where(inside, 0.0, C)
    c = np.zeros(m + 1)
    c[m] = 1.0
    lo = np.zeros(m + 1)
    hi = np.append(np.full(m, float(U_a)), float(xi_bar))
    return LpModel(c, A, b, lo, hi, np.arange(R), "rbc", "xi")


def build_sbc_lp(samples: GroupSampleSet, template: BarrierTemplate, tau: float, U_a: float,
                 anchors: np.ndarray, state_chunk: Optional[int] = None) -> LpModel:
    """Stochastic scenario program: one row per sampled state."""
    if template.basis.kind != "bernstein" or template.outside_value != 1.0:
        raise ConfigError("the stochastic program needs a Bernstein template with outside value 1")
    if samples.N == 0 or samples.M == 0:
        raise ConfigError("empty sample set")
    anchors = np.asarray(anchors, dtype=np.float64)
    if anchors.ndim != 2 or anchors.shape[0] == 0:
        raise ConfigError("anchor states must be a nonempty (N_o, n) array")
    N, M = samples.N, samples.M
    m = template.m
    A = np.empty((N, m + 1))
    b = np.empty(N)
    A[:, m] = -1.0
    step = state_chunk or max(1, (1 << 18) // M)
    for s in range(0, N, step):
        e = min(s + step, N)
        mean_in, frac_out = template.group_mean_features(samples.next_states[s:e])
        A[s:e, :m] = mean_in - template.features(samples.states[s:e])
        b[s:e] = -tau - frac_out
    c = np.append(template.features(anchors).mean(axis=0), 1.0)
    lo = np.zeros(m + 1)
    hi = np.append(np.full(m, float(U_a)), 1.0)
    return LpModel(c, A, b, lo, hi, np.arange(N), "sbc", "lambda")


def solve(model: LpModel, tie_break: bool = True, **kwargs) -> LpSolution:
    return solve_lp(model.c, model.A, model.b, model.lo, model.hi,
                    scalar_index=model.scalar_index, tie_break=tie_break, **kwargs)
