"""Dense primal active-set simplex for tall, narrow LPs.

Solves ``min c.z  s.t.  A z <= b,  lo <= z <= hi`` with all bounds finite.

The method walks vertices of the feasible polytope.  A vertex is described
by a working set W of ``n`` linearly independent active constraints (rows
or bounds), whose normals form the square matrix ``B``.  Each iteration

1. solves ``B^T mu = -c`` for the multipliers of W; if all ``mu >= 0`` the
   vertex is optimal (KKT);
2. otherwise releases a constraint ``q`` with ``mu_q < 0`` and moves along
   ``p`` with ``B p = -e_q``, which keeps the rest of W active and lowers
   the objective at rate ``mu_q``;
3. stops at the first blocking constraint (two-pass Harris ratio test) and
   swaps it into W.

Only ``B`` (at most ``n x n``) is factorised, so the cost per iteration is
one product ``A p`` over the rows.  That suits the scenario programs: tens
of thousands to a million rows, at most a few hundred columns.

Pricing is Dantzig (most negative multiplier).  After a run of degenerate
steps the solver switches to Bland's smallest-index rule, which cannot
cycle, and switches back after the next nondegenerate step.

Constraint ids: ``[0, R)`` are the rows of ``A``, ``[R, R+E)`` extra rows
added by the solver itself (the objective pin of the tie-break),
``[R+E, R+E+n)`` upper bounds and ``[R+E+n, R+E+2n)`` lower bounds.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from ..errors import SolverError

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-10
DEGENERATE_STREAK = 30
REFRESH_EVERY = 50


@dataclass
class LpSolution:
    status: str                      # optimal | infeasible | bound_hit
    z: np.ndarray
    objective: float
    active_rows: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    iterations: int = 0
    max_violation: float = 0.0

    def to_dict(self) -> dict:
        return {"status": self.status, "objective": self.objective,
                "iterations": self.iterations, "max_violation": self.max_violation,
                "active_rows": self.active_rows.tolist()}


class _ActiveSet:
    """Mutable solver state for one model; bounds may be tightened between solves."""

    def __init__(self, A, b, lo, hi, max_iter):
        self.A = A
        self.b = b
        self.R, self.n = A.shape
        self.E = np.zeros((0, self.n))
        self.e = np.zeros(0)
        self.lo = lo.copy()
        self.hi = hi.copy()
        self.max_iter = max_iter
        self.iterations = 0
        norms = np.zeros(self.R)
        for s in range(0, self.R, 1 << 16):
            # chunked so no full-size |A| temporary is made
            norms[s:s + (1 << 16)] = np.abs(A[s:s + (1 << 16)]).max(axis=1)
        self.rscale = 1.0 / np.where(norms > 0, norms, 1.0)
        self.z: Optional[np.ndarray] = None
        self.W: list[int] = []

    # ids and normals -------------------------------------------------------
    @property
    def _ub0(self):
        return self.R + self.E.shape[0]

    def add_row(self, g, h):
        """Append an extra row; existing bound ids shift by one."""
        shift = lambda i: i + 1 if i >= self._ub0 else i
        self.W = [shift(i) for i in self.W]
        self.E = np.vstack([self.E, np.asarray(g, dtype=np.float64).reshape(1, -1)])
        self.e = np.append(self.e, float(h))

    def normal(self, cid: int) -> np.ndarray:
        if cid < self.R:
            return self.A[cid]
        if cid < self._ub0:
            return self.E[cid - self.R]
        g = np.zeros(self.n)
        k = cid - self._ub0
        if k < self.n:
            g[k] = 1.0
        else:
            g[k - self.n] = -1.0
        return g

    def rhs(self, cid: int) -> float:
        if cid < self.R:
            return self.b[cid]
        if cid < self._ub0:
            return self.e[cid - self.R]
        k = cid - self._ub0
        return self.hi[k] if k < self.n else -self.lo[k - self.n]

    # iteration -------------------------------------------------------------
    def start(self, z, W):
        self.z = np.array(z, dtype=np.float64)
        self.W = list(W)
        self.slack = self.b - self.A @ self.z

    def optimise(self, c: np.ndarray) -> None:
        n = self.n
        degenerate = 0
        since_refresh = 0
        while True:
            if self.iterations >= self.max_iter:
                raise SolverError(f"simplex iteration cap {self.max_iter} reached")
            B = np.array([self.normal(i) for i in self.W])
            try:
                lu = sla.lu_factor(B, check_finite=False)
            except (ValueError, np.linalg.LinAlgError) as exc:
                raise SolverError(f"working-set factorisation failed: {exc}") from None
            if not np.all(np.isfinite(lu[0])) or np.min(np.abs(np.diag(lu[0]))) < 1e-14:
                raise SolverError("working-set matrix became singular")
            mu = sla.lu_solve(lu, -c, trans=1, check_finite=False)
            tol = OPT_TOL * max(1.0, float(np.abs(c).max()))
            neg = np.flatnonzero(mu < -tol)
            if neg.size == 0:
                self._resync(lu)
                return
            bland = degenerate >= DEGENERATE_STREAK
            if bland:
                q = min(neg, key=lambda k: self.W[k])
            else:
                q = int(neg[np.argmin(mu[neg])])
            rhs = np.zeros(n)
            rhs[q] = -1.0
            p = sla.lu_solve(lu, rhs, check_finite=False)

            blocker, t = self._ratio_test(p, bland)
            if blocker is None:
                raise SolverError("LP is unbounded along a feasible direction; bounds must be finite")
            self.z = self.z + t * p
            self.slack -= t * self._Ap
            self.W[q] = blocker
            self.iterations += 1
            since_refresh += 1
            degenerate = degenerate + 1 if t <= 1e-14 else 0
            if since_refresh >= REFRESH_EVERY:
                self._resync()
                since_refresh = 0

    def _resync(self, lu=None):
        """Recompute the vertex from its working set to shed accumulated drift."""
        if lu is None:
            lu = sla.lu_factor(np.array([self.normal(i) for i in self.W]), check_finite=False)
        h = np.array([self.rhs(i) for i in self.W])
        self.z = sla.lu_solve(lu, h, check_finite=False)
        self.slack = self.b - self.A @ self.z

    def _ratio_test(self, p, bland):
        """Blocking constraint and step length along ``p`` (None if unbounded)."""
        n = self.n
        in_W = np.zeros(self.R + self.E.shape[0] + 2 * n, dtype=bool)
        in_W[self.W] = True
        self._Ap = self.A @ p if self.R else np.zeros(0)
        gp = np.concatenate([self._Ap * self.rscale, self.E @ p, p, -p])
        slack = np.concatenate([
            self.slack * self.rscale,
            self.e - self.E @ self.z,
            self.hi - self.z,
            self.z - self.lo,
        ])
        cand = np.flatnonzero((gp > PIVOT_TOL) & ~in_W)
        if cand.size == 0:
            return None, 0.0
        s = np.maximum(slack[cand], 0.0)
        g = gp[cand]
        ratios = s / g
        if bland:
            tmin = ratios.min()
            ties = cand[ratios <= tmin + 1e-15]
            j = int(ties.min())
            return j, float(max(tmin, 0.0))
        # Harris: relaxed bound first, then the largest pivot under it
        t1 = ((s + FEAS_TOL) / g).min()
        ok = ratios <= t1
        k = np.flatnonzero(ok)[np.argmax(g[ok])]
        return int(cand[k]), float(max(ratios[k], 0.0))


def _crash(A, b, lo, hi):
    """Feasible starting vertex, or None when the model needs a phase 1.

    Uses a column whose entries are all negative (the scalar slack variable
    of the scenario programs): with every other variable at its lower bound,
    raising that column's variable far enough satisfies every row.
    """
    R, n = A.shape
    z = lo.astype(np.float64).copy()
    r = b - A @ z
    if R == 0 or np.all(r >= -FEAS_TOL):
        return z, [R + n + k for k in range(n)]
    neg_cols = np.flatnonzero(np.all(A < 0, axis=0)) if R else np.zeros(0, dtype=int)
    for k in neg_cols[::-1]:
        need = (-r) / (-A[:, k])
        i = int(np.argmax(need))
        if need[i] <= 0:
            continue
        zk = lo[k] + need[i]
        if zk > hi[k] + FEAS_TOL:
            continue
        z[k] = min(zk, hi[k])
        W = [R + n + j for j in range(n) if j != k] + [i]
        return z, W
    return None


def _phase1(A, b, lo, hi, max_iter):
    """Feasible vertex via an artificial column; None if the model is infeasible."""
    R, n = A.shape
    viol = float(np.max(A @ lo - b))
    A1 = np.hstack([A, -np.ones((R, 1))])
    lo1 = np.append(lo, 0.0)
    hi1 = np.append(hi, viol + 1.0)
    start = _crash(A1, b, lo1, hi1)
    st = _ActiveSet(A1, b, lo1, hi1, max_iter)
    st.start(*start)
    c1 = np.zeros(n + 1)
    c1[n] = 1.0
    st.optimise(c1)
    if st.z[n] > FEAS_TOL * max(1.0, viol):
        return None, st.iterations
    s_lower = R + (n + 1) + n           # lower bound of the artificial column
    W = list(st.W)
    if s_lower not in W:
        # swap the artificial bound in where it keeps the working set independent
        B = np.array([st.normal(i) for i in W])
        v = np.linalg.solve(B.T, st.normal(s_lower))
        W[int(np.argmax(np.abs(v)))] = s_lower
    W.remove(s_lower)
    # map augmented ids back: rows keep their ids, bound ids lose one slot
    out = []
    for cid in W:
        if cid < R:
            out.append(cid)
        else:
            k = cid - R
            out.append(R + k if k < n + 1 else R + n + (k - (n + 1)))
    return (st.z[:n].copy(), out), st.iterations


def solve_lp(c, A, b, lo, hi, scalar_index: Optional[int] = None, tie_break: bool = True,
             max_iter: int = 200_000, tol: float = FEAS_TOL) -> LpSolution:
    """Optimal vertex of ``min c.z, A z <= b, lo <= z <= hi``.

    With ``tie_break`` the returned point is the lexicographically smallest
    optimum: the objective is pinned at its optimal value and variables are
    minimised one at a time in index order, each fixed before the next.
    """
    c = np.asarray(c, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    R, n = A.shape
    if c.shape != (n,) or b.shape != (R,) or lo.shape != (n,) or hi.shape != (n,):
        raise SolverError("LP data have inconsistent shapes")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise SolverError("all variable bounds must be finite")
    if np.any(lo > hi):
        return LpSolution("infeasible", lo.copy(), float("nan"))

    start = _crash(A, b, lo, hi)
    iters = 0
    if start is None:
        start, iters = _phase1(A, b, lo, hi, max_iter)
        if start is None:
            return LpSolution("infeasible", lo.copy(), float("nan"), iterations=iters)

    st = _ActiveSet(A, b, lo, hi, max_iter)
    st.iterations = iters
    st.start(*start)
    st.optimise(c)
    J = float(c @ st.z)

    if tie_break:
        st.add_row(c, J + 1e-9 * max(1.0, abs(J)))
        for k in range(n):
            if st.z[k] > st.lo[k] + tol:
                e = np.zeros(n)
                e[k] = 1.0
                st.optimise(e)
            # pin; the current vertex stays a vertex
            st.hi[k] = max(st.z[k], st.lo[k])

    z = np.clip(st.z, lo, hi)
    resid = A @ z - b if R else np.zeros(0)
    viol = float(max(resid.max(initial=0.0), 0.0))
    if viol > tol * 1e3:
        raise SolverError(f"solution violates rows by {viol:.3g}; numerical breakdown")
    active = np.array(sorted(i for i in st.W if i < R), dtype=np.int64)
    status = "optimal"
    if scalar_index is not None and z[scalar_index] >= hi[scalar_index] - tol:
        status = "bound_hit"
    return LpSolution(status, z, float(c @ z), active, st.iterations, viol)
