"""Closed-form sample sizes and the guarantees they buy.

All sizes are ceilings.  The argument of each ceiling is rounded to nine
decimals first so that values which are mathematically integral but land
a hair above the integer in floating point do not gain a spurious sample.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .core import Method, PacParams
from .errors import ConfigError


def _ceil(v: float) -> int:
    return max(1, math.ceil(round(v, 9)))


def _check_open_unit(**values):
    for name, v in values.items():
        if not (isinstance(v, (int, float)) and 0.0 < v < 1.0):
            raise ConfigError(f"{name}={v!r} must lie in (0, 1)")


def _check_pos_int(name, v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ConfigError(f"{name}={v!r} must be a positive integer")


def scenario_N(alpha: float, delta: float, decision_dim: int) -> int:
    """Scenario bound: ``ceil(2/alpha * (ln(1/delta) + decision_dim))``."""
    _check_open_unit(alpha=alpha, delta=delta)
    _check_pos_int("decision_dim", decision_dim)
    return _ceil(2.0 / alpha * (math.log(1.0 / delta) + decision_dim))


def vc_N(alpha: float, delta: float, vc_dim: int) -> int:
    """VC bound: ``ceil(5/alpha * (ln(4/delta) + vc_dim * ln(40/alpha)))``."""
    _check_open_unit(alpha=alpha, delta=delta)
    _check_pos_int("vc_dim", vc_dim)
    return _ceil(5.0 / alpha * (math.log(4.0 / delta) + vc_dim * math.log(40.0 / alpha)))


def hoeffding_M_rbc(alpha2: float, delta2: float, l: float) -> int:
    _check_open_unit(alpha2=alpha2, delta2=delta2, l=l)
    return _ceil(math.log(1.0 / ((1.0 - l) * delta2)) / (2.0 * alpha2 ** 2))


def hoeffding_M_sbc(tau: float, U_a: float, delta2: float, l: float) -> int:
    _check_open_unit(tau=tau, delta2=delta2, l=l)
    if not U_a >= 1:
        raise ConfigError(f"U_a={U_a!r} must be >= 1")
    return _ceil(U_a ** 2 * math.log(1.0 / ((1.0 - l) * delta2)) / (2.0 * tau ** 2))


def rbc2_outer_fraction(alpha1: float, l: float, delta2: float) -> float:
    """Outer probability ``1 - alpha1/(l*delta2)`` of the one-to-many guarantees."""
    _check_open_unit(alpha1=alpha1, l=l, delta2=delta2)
    if not alpha1 < l * delta2:
        raise ConfigError(f"hypothesis alpha1 < l*delta2 violated: alpha1={alpha1}, "
                          f"l*delta2={l * delta2:g}")
    return 1.0 - alpha1 / (l * delta2)


@dataclass(frozen=True)
class Guarantee:
    """``P_x[inner event] >= outer_frac`` holding with probability ``confidence``.

    ``inner_prob`` is the per-state safety level ``1 - alpha2`` for the
    robust methods; for the stochastic method it is ``None`` because the
    per-state level is the learned bound ``1 - lambda* - h(a*, x)``.
    """

    inner_prob: float | None
    outer_frac: float
    confidence: float
    text: str

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class SamplePlan:
    method: Method
    n: int
    kappa: int
    m: int
    decision_dim: int
    N: int
    M: int
    guarantee: Guarantee

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        d["guarantee"] = self.guarantee.to_dict()
        return d


def _pct(p: float) -> str:
    return f"{p:.6g}"


def plan(params: PacParams, n: int) -> SamplePlan:
    """Sample sizes and guarantee for ``params`` on an ``n``-dimensional system."""
    _check_pos_int("n", n)
    params.validate()
    method = params.method
    m = (params.kappa + 1) ** n
    dim = m + 1
    if method is Method.RBC1_SCENARIO or method is Method.RBC1_VC:
        alpha = params.alpha1 * params.alpha2
        if method is Method.RBC1_SCENARIO:
            N = scenario_N(alpha, params.delta, dim)
        else:
            if params.vc_dim is None:
                raise ConfigError("method RBC1_vc needs vc_dim")
            N = vc_N(alpha, params.delta, params.vc_dim)
        M = 1
        inner, outer, conf = 1 - params.alpha2, 1 - params.alpha1, 1 - params.delta
        text = (f"If accepted: with confidence {_pct(conf)}, at least {_pct(outer)} of states x "
                f"(uniform on X) satisfy P_d[f(x,d) in X] >= {_pct(inner)}.")
    elif method is Method.RBC2:
        N = scenario_N(params.alpha1, params.delta1, dim)
        M = hoeffding_M_rbc(params.alpha2, params.delta2, params.l)
        inner = 1 - params.alpha2
        outer = rbc2_outer_fraction(params.alpha1, params.l, params.delta2)
        conf = 1 - params.delta1
        text = (f"If accepted: with confidence {_pct(conf)}, at least {_pct(outer)} of states x "
                f"(uniform on X) satisfy P_d[f(x,d) in X] >= {_pct(inner)}.")
    else:
        N = scenario_N(params.alpha1, params.delta1, dim)
        M = hoeffding_M_sbc(params.tau, params.U_a, params.delta2, params.l)
        inner = None
        outer = rbc2_outer_fraction(params.alpha1, params.l, params.delta2)
        conf = 1 - params.delta1
        text = (f"With confidence {_pct(conf)}, at least {_pct(outer)} of states x (uniform on X) "
                f"satisfy P_d[f(x,d) in X] >= 1 - lambda* - h(a*, x).")
    return SamplePlan(method, n, params.kappa, m, dim, N, M, Guarantee(inner, outer, conf, text))
