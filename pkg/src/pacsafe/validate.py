"""Monte Carlo cross-checks, trajectory simulation and bound grids.

Everything here draws from stream 2 of the chosen seed, so validation is
independent of the samples a certificate was computed from.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .certify import Certificate, sbc_bound_raw
from .core import Method, as_vector
from .errors import CertificateError, ConfigError
from .planner import plan
from .rng import VALIDATION_STREAM, RngStream
from .systems.base import BlackBoxSystem

CHUNK = 1 << 17


def _stream(rng: Union[RngStream, int, None]) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    return RngStream(0 if rng is None else int(rng), VALIDATION_STREAM)


@dataclass(frozen=True)
class MCEstimate:
    p: float
    se: float
    n: int

    def __float__(self):
        return self.p

    def to_dict(self):
        return asdict(self)


def _se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def _safe_counts(sys: BlackBoxSystem, X: np.ndarray, n_mc: int, rng: RngStream) -> np.ndarray:
    """Number of safe successors out of ``n_mc`` for each row of ``X``."""
    k = X.shape[0]
    counts = np.zeros(k, dtype=np.int64)
    total = k * n_mc
    for s in range(0, total, CHUNK):
        e = min(s + CHUNK, total)
        idx = np.arange(s, e)
        D = sys.sample_d_batch(rng.u64(e - s))
        nxt = sys.step_batch(X[idx // n_mc], D)
        counts += np.bincount(idx // n_mc, weights=sys.safe_set.contains_batch(nxt),
                              minlength=k).astype(np.int64)
    return counts


def mc_one_step(sys: BlackBoxSystem, x, n_mc: int, rng=None) -> MCEstimate:
    """Fraction of ``n_mc`` i.i.d. successors of ``x`` that stay in X."""
    if n_mc < 1:
        raise ValueError("n_mc must be at least 1")
    x = as_vector(x, sys.n, "state")
    c = int(_safe_counts(sys, x.reshape(1, -1), n_mc, _stream(rng))[0])
    p = c / n_mc
    return MCEstimate(p, _se(p, n_mc), n_mc)


def mc_many(sys: BlackBoxSystem, X, n_mc: int, rng=None) -> np.ndarray:
    """Per-state safe fractions for a batch of states."""
    X = np.asarray(X, dtype=np.float64).reshape(-1, sys.n)
    return _safe_counts(sys, X, n_mc, _stream(rng)) / n_mc


@dataclass(frozen=True)
class SweepResult:
    threshold: float
    fraction: float
    se: float
    n_states: int
    n_mc: int

    def to_dict(self):
        return asdict(self)


def mc_state_sweep(sys: BlackBoxSystem, n_states: int, n_mc: int, threshold: float,
                   rng=None) -> SweepResult:
    """Fraction of uniform states whose estimated one-step safety is ``>= threshold``."""
    if n_states < 1 or n_mc < 1:
        raise ValueError("n_states and n_mc must be at least 1")
    rng = _stream(rng)
    X = sys.safe_set.sample(rng, n_states)
    p = _safe_counts(sys, X, n_mc, rng) / n_mc
    frac = float(np.mean(p >= threshold))
    return SweepResult(float(threshold), frac, _se(frac, n_states), n_states, n_mc)


@dataclass(frozen=True)
class Trajectories:
    states: np.ndarray   # (runs, steps + 1, n)
    safe: np.ndarray     # (runs, steps + 1) membership of X at each step

    @property
    def ever_unsafe(self) -> np.ndarray:
        return ~np.all(self.safe, axis=1)


def simulate(sys: BlackBoxSystem, x0, steps: int, runs: int, rng=None) -> Trajectories:
    """``runs`` independent trajectories of ``steps`` steps from ``x0``.

    Trajectories keep evolving after leaving X; ``safe`` flags each step.
    """
    if steps < 0 or runs < 1:
        raise ValueError("steps must be >= 0 and runs >= 1")
    x0 = as_vector(x0, sys.n, "initial state")
    if not sys.safe_set.contains(x0):
        raise ValueError("initial state must lie in the safe set")
    rng = _stream(rng)
    out = np.empty((runs, steps + 1, sys.n))
    out[:, 0] = x0
    for t in range(steps):
        D = sys.sample_d_batch(rng.u64(runs))
        out[:, t + 1] = sys.step_batch(out[:, t], D)
    return Trajectories(out, sys.safe_set.contains_batch(out))


# bound grids ---------------------------------------------------------------

def parse_slice(text: Optional[str]) -> dict:
    """``"3=0.1,4=-0.2"`` -> ``{2: 0.1, 3: -0.2}`` (1-based coordinates in text)."""
    if not text:
        return {}
    out = {}
    for part in text.split(","):
        try:
            k, v = part.split("=")
            j = int(k.strip().lstrip("x")) - 1
            out[j] = float(v)
        except ValueError:
            raise ConfigError(f"bad slice entry {part!r}; expected 'j=value' with 1-based j") from None
        if j < 0:
            raise ConfigError(f"slice coordinate {j + 1} must be >= 1")
    return out


@dataclass(frozen=True)
class BoundGrid:
    axes: tuple           # the two free coordinates (0-based)
    points: np.ndarray    # (r*r, n) full-dimensional grid points
    bound: np.ndarray     # (r*r,) clamped bound, nan off X
    raw: np.ndarray       # unclamped, nan off X
    in_safe_set: np.ndarray

    def write_csv(self, path) -> Path:
        path = Path(path)
        a, b = self.axes
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{a + 1}", f"x{b + 1}", "bound", "in_safe_set"])
            for p, v, ins in zip(self.points, self.bound, self.in_safe_set):
                w.writerow([repr(float(p[a])), repr(float(p[b])), repr(float(v)) if ins else "",
                            "1" if ins else "0"])
        return path


def contour_grid(cert: Certificate, resolution: int, slice_: Optional[dict] = None) -> BoundGrid:
    """Bound ``1 - lambda* - h(a*, x)`` at cell centres of a ``resolution``-square grid.

    Two coordinates vary over the bounding box; for systems with more than
    two states every other coordinate must be fixed by ``slice_``.
    """
    if cert.method is not Method.SBC3:
        raise ConfigError("bound grids need an SBC3 certificate")
    if resolution < 1:
        raise ConfigError("resolution must be at least 1")
    safe = cert.safe_set()
    n = safe.dim
    slice_ = dict(slice_ or {})
    if any(j >= n for j in slice_):
        raise ConfigError(f"slice names a coordinate beyond the state dimension {n}")
    free = [j for j in range(n) if j not in slice_]
    if len(free) != 2:
        raise ConfigError(f"a grid needs exactly two free coordinates; fix {n - 2} of the {n} "
                          f"coordinates with --slice (currently {len(free)} free)")
    a, b = free
    lo, hi = safe.bbox_lo, safe.bbox_hi
    ticks = lambda j: lo[j] + (np.arange(resolution) + 0.5) * (hi[j] - lo[j]) / resolution
    ga, gb = np.meshgrid(ticks(a), ticks(b), indexing="ij")
    pts = np.empty((resolution * resolution, n))
    pts[:, a] = ga.ravel()
    pts[:, b] = gb.ravel()
    for j, v in slice_.items():
        pts[:, j] = v
    inside = safe.contains_batch(pts)
    raw = np.full(pts.shape[0], np.nan)
    if np.any(inside):
        raw[inside] = sbc_bound_raw(cert, pts[inside])
    return BoundGrid((a, b), pts, np.clip(raw, 0.0, 1.0), raw, inside)


# certificate checks --------------------------------------------------------

def validate_certificate(cert: Certificate, sys: BlackBoxSystem, seed: Optional[int] = None,
                         n_states: Optional[int] = None, n_mc: int = 1000) -> dict:
    """Run the checks that match the certificate's method; JSON-ready report."""
    checks = []
    try:
        cert.verify()
        expected = plan(cert.params, int(cert.system["n"]))
        checks.append({"name": "plan_integrity", "passed": True,
                       "details": {"N": expected.N, "M": expected.M}})
    except CertificateError as exc:
        checks.append({"name": "plan_integrity", "passed": False, "details": str(exc)})
        return {"passed": False, "checks": checks}
    if sys.n != int(cert.system["n"]):
        raise CertificateError("system dimension does not match the certificate")
    rng = RngStream(cert.seed if seed is None else int(seed), VALIDATION_STREAM)
    if cert.method.is_rbc:
        if not cert.accepted:
            checks.append({"name": "outer_fraction_sweep", "passed": True,
                           "details": "certificate rejected; no guarantee to test"})
        else:
            thr = 1.0 - cert.params.alpha2
            outer = cert.plan["guarantee"]["outer_frac"]
            res = mc_state_sweep(sys, n_states or 10_000, n_mc, thr, rng)
            ok = res.fraction >= outer - 3.0 * res.se
            checks.append({"name": "outer_fraction_sweep", "passed": bool(ok),
                           "details": {**res.to_dict(), "certified_outer_fraction": outer}})
    else:
        k = n_states or 1000
        X = sys.safe_set.sample(rng, k)
        p = _safe_counts(sys, X, n_mc, rng) / n_mc
        se = np.sqrt(np.maximum(p * (1 - p), 0.0) / n_mc)
        bound = np.clip(sbc_bound_raw(cert, X), 0.0, 1.0)
        holds = bound <= p + 3.0 * se
        frac = float(np.mean(holds))
        checks.append({"name": "bound_dominance", "passed": frac >= 0.95,
                       "details": {"fraction_holding": frac, "required": 0.95, "n_states": k,
                                   "n_mc": n_mc, "mean_bound": float(bound.mean()),
                                   "mean_mc": float(p.mean())}})
    return {"passed": all(c["passed"] for c in checks), "checks": checks}
