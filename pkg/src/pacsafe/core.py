"""Shared domain types: safe sets, sample sets and PAC parameter bundles.

States and disturbances are plain 1-D float arrays; batches are 2-D arrays
with one row per vector.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, fields
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, SamplingError
from .rng import RngStream

REJECTION_ATTEMPTS_PER_POINT = 10_000


def as_vector(x, dim: Optional[int] = None, what: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{what} has dimension {v.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} has non-finite entries: {v}")
    return v


class SafeSet:
    """Compact safe region with a bounding box ``[bbox_lo, bbox_hi]``.

    Membership is inclusive on the boundary.  Subclasses implement
    ``_contains`` on a batch of points.
    """

    kind = "abstract"

    def __init__(self, bbox_lo, bbox_hi):
        lo = as_vector(bbox_lo, what="bbox_lo")
        hi = as_vector(bbox_hi, dim=lo.shape[0], what="bbox_hi")
        if not np.all(lo < hi):
            raise ConfigError(f"bounding box must satisfy lo < hi componentwise: {lo} vs {hi}")
        self.bbox_lo = lo
        self.bbox_hi = hi
        self.bbox_lo.setflags(write=False)
        self.bbox_hi.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.bbox_lo.shape[0]

    def centre(self) -> np.ndarray:
        return 0.5 * (self.bbox_lo + self.bbox_hi)

    def _contains(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=np.float64).reshape(-1)
        if x.shape[0] != self.dim:
            raise ValueError(f"point has dimension {x.shape[0]}, expected {self.dim}")
        return bool(self._contains(x.reshape(1, -1))[0])

    def contains_batch(self, X) -> np.ndarray:
        """Boolean membership for an array of points (last axis = coordinates)."""
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise ValueError(f"points have dimension {X.shape[-1]}, expected {self.dim}")
        flat = X.reshape(-1, self.dim)
        return self._contains(flat).reshape(X.shape[:-1])

    def sample(self, rng: RngStream, count: int) -> np.ndarray:
        """``count`` uniform points by rejection from the bounding box.

        Candidates consume ``dim`` words each, in order; the cursor ends just
        after the last candidate examined, so results do not depend on the
        internal batch size.
        """
        if count < 0:
            raise ValueError("count must be nonnegative")
        n = self.dim
        out = np.empty((count, n))
        if count == 0:
            return out
        width = self.bbox_hi - self.bbox_lo
        filled = 0
        tried = 0
        cap = REJECTION_ATTEMPTS_PER_POINT * count
        while filled < count:
            if tried >= cap:
                raise SamplingError(
                    f"uniform sampling of {self.kind} set accepted {filled}/{count} points "
                    f"after {tried} candidates; set or bounding box is degenerate")
            batch = min(max(2 * (count - filled), 1024), cap - tried)
            start = rng.position
            cand = self.bbox_lo + width * rng.uniform(batch * n).reshape(batch, n)
            ok = np.flatnonzero(self._contains(cand))
            need = count - filled
            if ok.shape[0] >= need:
                last = ok[need - 1]
                out[filled:] = cand[ok[:need]]
                filled = count
                tried += last + 1
                rng.position = start + (last + 1) * n
            else:
                out[filled:filled + ok.shape[0]] = cand[ok]
                filled += ok.shape[0]
                tried += batch
        return out

    def check_bbox(self, rng: RngStream, count: int = 10_000) -> None:
        """Raise if the set is empty at its centre or sampled points leave the box."""
        if not self.contains(self.centre()):
            raise ConfigError(f"{self.kind} safe set does not contain its centre")
        pts = self.sample(rng, count)
        if np.any(pts < self.bbox_lo) or np.any(pts > self.bbox_hi):
            raise ConfigError("sampled member points fall outside the bounding box")

    def to_dict(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_dict(d: dict) -> "SafeSet":
        kind = d.get("kind")
        try:
            if kind == "box":
                return BoxSet(d["lo"], d["hi"])
            if kind == "ball":
                s = BallSet(d["center"], d["radius_squared"])
                if "bbox_lo" in d:
                    s = BallSet(d["center"], d["radius_squared"], d["bbox_lo"], d["bbox_hi"])
                return s
        except KeyError as exc:
            raise ConfigError(f"safe set description missing field {exc}") from None
        raise ConfigError(f"unsupported safe set kind {kind!r} (expected 'box' or 'ball')")


class BoxSet(SafeSet):
    kind = "box"

    def __init__(self, lo, hi):
        super().__init__(lo, hi)

    def _contains(self, X):
        return np.all((X >= self.bbox_lo) & (X <= self.bbox_hi), axis=-1)

    def sample(self, rng: RngStream, count: int) -> np.ndarray:
        u = rng.uniform(count * self.dim).reshape(count, self.dim)
        return self.bbox_lo + (self.bbox_hi - self.bbox_lo) * u

    def to_dict(self):
        return {"kind": "box", "lo": self.bbox_lo.tolist(), "hi": self.bbox_hi.tolist()}


class BallSet(SafeSet):
    """``{x : |x - center|^2 <= radius_squared}``."""

    kind = "ball"

    def __init__(self, center, radius_squared: float, bbox_lo=None, bbox_hi=None):
        c = as_vector(center, what="center")
        if not radius_squared > 0:
            raise ConfigError("ball radius_squared must be positive")
        r = math.sqrt(radius_squared)
        super().__init__(c - r if bbox_lo is None else bbox_lo,
                         c + r if bbox_hi is None else bbox_hi)
        self.center = c
        self.radius_squared = float(radius_squared)

    def centre(self):
        return self.center

    def _contains(self, X):
        diff = X - self.center
        return np.einsum("ij,ij->i", diff, diff) <= self.radius_squared

    def to_dict(self):
        return {"kind": "ball", "center": self.center.tolist(),
                "radius_squared": self.radius_squared,
                "bbox_lo": self.bbox_lo.tolist(), "bbox_hi": self.bbox_hi.tolist()}


class SublevelSet(SafeSet):
    """``{x : g(x) <= 0}`` for a vectorised ``g`` (rows of points -> values)."""

    kind = "sublevel"

    def __init__(self, g: Callable[[np.ndarray], np.ndarray], bbox_lo, bbox_hi):
        super().__init__(bbox_lo, bbox_hi)
        self.g = g

    def _contains(self, X):
        return np.asarray(self.g(X), dtype=np.float64).reshape(-1) <= 0.0

    def to_dict(self):
        raise ConfigError("sublevel safe sets wrap a Python callable and cannot be serialised")


@dataclass(frozen=True)
class PairSampleSet:
    """One disturbance per sampled state; ``next_states[i] = f(states[i], disturbances[i])``."""

    states: np.ndarray          # (N, n)
    disturbances: np.ndarray    # (N, n_d)
    next_states: np.ndarray     # (N, n)
    seed: int

    @property
    def N(self) -> int:
        return self.states.shape[0]

    def __len__(self):
        return self.N


@dataclass(frozen=True)
class GroupSampleSet:
    """``M`` disturbances per sampled state; arrays are indexed ``[i, j]``."""

    states: np.ndarray          # (N, n)
    disturbances: np.ndarray    # (N, M, n_d)
    next_states: np.ndarray     # (N, M, n)
    seed: int

    @property
    def N(self) -> int:
        return self.states.shape[0]

    @property
    def M(self) -> int:
        return self.next_states.shape[1]

    def __len__(self):
        return self.N


class Method(str, enum.Enum):
    RBC1_SCENARIO = "RBC1_scenario"
    RBC1_VC = "RBC1_vc"
    RBC2 = "RBC2"
    SBC3 = "SBC3"

    @classmethod
    def parse(cls, text) -> "Method":
        if isinstance(text, Method):
            return text
        key = str(text).strip().lower().replace("-", "_")
        aliases = {
            "rbc1": cls.RBC1_SCENARIO, "rbc1_scenario": cls.RBC1_SCENARIO,
            "rbc_i": cls.RBC1_SCENARIO, "rbc1_vc": cls.RBC1_VC, "rbc2": cls.RBC2,
            "rbc_ii": cls.RBC2, "sbc3": cls.SBC3, "sbc_iii": cls.SBC3,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ConfigError(f"unknown method {text!r}; expected one of "
                              "rbc1, rbc1_vc, rbc2, sbc3") from None

    @property
    def is_rbc(self) -> bool:
        return self is not Method.SBC3


_OPEN_UNIT = ("alpha1", "alpha2", "delta", "delta1", "delta2", "l", "tau", "gamma")


@dataclass(frozen=True)
class PacParams:
    """Probability levels and template hyperparameters for one certification run.

    Defaults are the one-to-one robust-barrier settings of the benchmark
    study; :mod:`pacsafe.presets` holds the per-method and per-example values.
    """

    method: Method = Method.RBC1_SCENARIO
    alpha1: float = 0.05
    alpha2: float = 0.05
    delta: float = 1e-6
    delta1: float = 1e-6
    delta2: float = 0.999
    l: float = 0.2
    tau: float = 0.01
    gamma: float = 0.01
    U_a: float = 10.0
    xi_bar: float = 10.0
    C: float = -1.0
    kappa: int = 1
    N_o: int = 1000
    vc_dim: Optional[int] = None
    zero_threshold: float = 1e-9

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        self.validate()

    def validate(self) -> None:
        errors = []
        for name in _OPEN_UNIT:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and 0.0 < v < 1.0):
                errors.append(f"{name}={v!r} must lie in (0, 1)")
        if not self.U_a > 0:
            errors.append(f"U_a={self.U_a!r} must be positive")
        if not self.xi_bar > 0:
            errors.append(f"xi_bar={self.xi_bar!r} must be positive")
        if not self.C < 0:
            errors.append(f"C={self.C!r} must be negative")
        if not (isinstance(self.kappa, int) and self.kappa >= 0):
            errors.append(f"kappa={self.kappa!r} must be a nonnegative integer")
        if not (isinstance(self.N_o, int) and self.N_o >= 1):
            errors.append(f"N_o={self.N_o!r} must be a positive integer")
        if self.vc_dim is not None and not (isinstance(self.vc_dim, int) and self.vc_dim >= 1):
            errors.append(f"vc_dim={self.vc_dim!r} must be a positive integer")
        if not self.zero_threshold >= 0:
            errors.append("zero_threshold must be nonnegative")
        if errors:
            raise ConfigError("; ".join(errors))
        # cross-parameter hypotheses only make sense once each value is in range
        if self.method.is_rbc and not self.xi_bar > -self.C:
            raise ConfigError(f"xi_bar={self.xi_bar} must exceed -C={-self.C}")
        if self.method in (Method.RBC2, Method.SBC3) and not self.alpha1 < self.l * self.delta2:
            raise ConfigError(
                f"hypothesis alpha1 < l*delta2 violated: alpha1={self.alpha1}, "
                f"l*delta2={self.l * self.delta2:g}")
        if self.method is Method.SBC3 and not self.U_a >= 1:
            raise ConfigError(f"U_a={self.U_a} must be >= 1 for the stochastic barrier template")

    def replace(self, **changes) -> "PacParams":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return PacParams(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PacParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
        return cls(**d)
