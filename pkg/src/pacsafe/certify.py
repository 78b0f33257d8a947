"""End-to-end certification: plan, sample, build the program, solve, decide.

The pipelines see a system only through its oracle methods (``step_batch``
and ``sample_d_batch`` via :mod:`pacsafe.systems.sampling`); the safe set is
the only structural information they use.

A certificate is a self-describing JSON document::

    schema        "pacsafe.certificate/1"
    method        RBC1_scenario | RBC1_vc | RBC2 | SBC3
    system        name, n, n_d, safe_set, source ("builtin" | "plugin"), plugin command
    params        every PacParams field
    plan          N, M, m, decision_dim, kappa, guarantee record
    seed, rng     run seed and generator id
    solver        status, objective, iterations, max_violation, active rows
    basis         kind, kappa, bbox, multi-index order, outside value
    coefficients  a* in basis order
    xi_star                          robust methods
    lambda_star, J_star, vacuous     stochastic method
    verdict       accepted | rejected
    guarantee     text plus the numeric record
    timings       seconds per phase (excluded from determinism checks)
"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .basis import ORDER_TAG, BarrierTemplate, MultiIndexBasis, rbc_template, sbc_template
from .core import Method, PacParams, SafeSet
from .errors import CertificateError, ConfigError
from .planner import SamplePlan, plan
from .rng import ALGORITHM_ID, ANCHOR_STREAM, RngStream
from .scenario_lp import build_rbc_lp, build_sbc_lp, solve
from .systems.base import BlackBoxSystem
from .systems.sampling import draw_group_samples, draw_pair_samples

log = logging.getLogger(__name__)

SCHEMA = "pacsafe.certificate/1"
ACCEPTED, REJECTED = "accepted", "rejected"


@dataclass
class Certificate:
    method: Method
    system: dict
    params: PacParams
    plan: dict
    seed: int
    solver: dict
    basis: dict
    coefficients: np.ndarray
    verdict: str
    guarantee: dict
    xi_star: Optional[float] = None
    lambda_star: Optional[float] = None
    J_star: Optional[float] = None
    vacuous: Optional[bool] = None
    timings: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPTED

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "schema": SCHEMA,
            "version": __version__,
            "method": self.method.value,
            "system": self.system,
            "params": self.params.to_dict(),
            "plan": self.plan,
            "seed": self.seed,
            "rng": ALGORITHM_ID,
            "solver": self.solver,
            "basis": self.basis,
            "coefficients": [float(v) for v in self.coefficients],
        }
        if self.method.is_rbc:
            d["xi_star"] = self.xi_star
        else:
            d["lambda_star"] = self.lambda_star
            d["J_star"] = self.J_star
            d["vacuous"] = self.vacuous
        d["verdict"] = self.verdict
        d["guarantee"] = self.guarantee
        if include_timings:
            d["timings"] = self.timings
        return d

    def to_json(self, include_timings: bool = True) -> str:
        return json.dumps(self.to_dict(include_timings), indent=2, ensure_ascii=False) + "\n"

    def save(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_json(), encoding="utf-8")
        return path

    @classmethod
    def from_dict(cls, d: dict, verify: bool = True) -> "Certificate":
        try:
            if d.get("schema") != SCHEMA:
                raise CertificateError(f"unsupported certificate schema {d.get('schema')!r}")
            params = PacParams.from_dict(d["params"])
            method = Method.parse(d["method"])
            cert = cls(
                method=method, system=d["system"], params=params, plan=d["plan"],
                seed=int(d["seed"]), solver=d["solver"], basis=d["basis"],
                coefficients=np.asarray(d["coefficients"], dtype=np.float64),
                verdict=d["verdict"], guarantee=d["guarantee"], xi_star=d.get("xi_star"),
                lambda_star=d.get("lambda_star"), J_star=d.get("J_star"),
                vacuous=d.get("vacuous"), timings=d.get("timings", {}))
        except (KeyError, TypeError) as exc:
            raise CertificateError(f"certificate is missing or has a malformed field: {exc}") from None
        except ConfigError as exc:
            raise CertificateError(f"certificate parameters are invalid: {exc}") from None
        if verify:
            cert.verify()
        return cert

    @classmethod
    def load(cls, path, verify: bool = True) -> "Certificate":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CertificateError(f"cannot read certificate {path}: {exc}") from None
        return cls.from_dict(d, verify)

    def verify(self) -> None:
        """Re-derive the plan from the embedded inputs and check consistency."""
        if self.method is not self.params.method:
            raise CertificateError("certificate method disagrees with its parameters")
        expected = plan(self.params, int(self.system["n"])).to_dict()
        for key in ("N", "M", "m", "decision_dim", "kappa"):
            if self.plan.get(key) != expected[key]:
                raise CertificateError(
                    f"plan field {key}={self.plan.get(key)!r} does not match the value "
                    f"{expected[key]!r} re-derived from the certificate parameters")
        if self.coefficients.shape[0] != expected["m"]:
            raise CertificateError("coefficient vector length does not match the basis size")
        if np.any(self.coefficients < 0) or np.any(self.coefficients > self.params.U_a):
            raise CertificateError("coefficients fall outside [0, U_a]")
        if self.verdict not in (ACCEPTED, REJECTED):
            raise CertificateError(f"unknown verdict {self.verdict!r}")
        if self.method.is_rbc:
            if self.xi_star is None:
                raise CertificateError("robust certificate lacks xi_star")
            if (self.xi_star <= self.params.zero_threshold) != self.accepted:
                raise CertificateError("verdict is inconsistent with xi_star")

    # reconstruction --------------------------------------------------------
    def safe_set(self) -> SafeSet:
        return SafeSet.from_dict(self.system["safe_set"])

    def template(self) -> BarrierTemplate:
        b = self.basis
        basis = MultiIndexBasis(b["kind"], int(b["kappa"]), b["bbox_lo"], b["bbox_hi"])
        return BarrierTemplate(basis, self.safe_set(), float(b["outside_value"]), self.params.U_a)

    def barrier(self, X) -> np.ndarray:
        """``h(a*, x)`` for a batch of points."""
        return self.template().eval_batch(self.coefficients, X)


# pipelines -----------------------------------------------------------------

def _basis_record(template: BarrierTemplate) -> dict:
    d = template.basis.to_dict()
    d["order"] = ORDER_TAG
    d["outside_value"] = template.outside_value
    return d


def _system_record(sys: BlackBoxSystem) -> dict:
    return sys.describe()


def _solver_record(sol) -> dict:
    d = sol.to_dict()
    d["algorithm"] = "active-set primal simplex, lexicographic tie-break"
    return d


def certify_rbc1(sys: BlackBoxSystem, params: PacParams, seed: int = 0, workers: int = 1) -> Certificate:
    if params.method not in (Method.RBC1_SCENARIO, Method.RBC1_VC):
        raise ConfigError(f"certify_rbc1 needs method RBC1_scenario or RBC1_vc, got {params.method.value}")
    return _certify_rbc(sys, params, seed, workers)


def certify_rbc2(sys: BlackBoxSystem, params: PacParams, seed: int = 0, workers: int = 1) -> Certificate:
    if params.method is not Method.RBC2:
        raise ConfigError(f"certify_rbc2 needs method RBC2, got {params.method.value}")
    return _certify_rbc(sys, params, seed, workers)


def _certify_rbc(sys, params, seed, workers):
    t0 = time.perf_counter()
    pl: SamplePlan = plan(params, sys.n)
    if params.method is Method.RBC2:
        samples = draw_group_samples(sys, sys.safe_set, pl.N, pl.M, seed, workers)
    else:
        samples = draw_pair_samples(sys, sys.safe_set, pl.N, seed, workers)
    t1 = time.perf_counter()
    template = rbc_template(sys.safe_set, params.kappa, params.C, params.U_a)
    model = build_rbc_lp(samples, template, params.gamma, params.U_a, params.xi_bar)
    del samples
    t2 = time.perf_counter()
    sol = solve(model)
    del model
    t3 = time.perf_counter()
    a = sol.z[:-1]
    xi = float(sol.z[-1])
    accepted = xi <= params.zero_threshold
    g = pl.guarantee.to_dict()
    if not accepted:
        g["text"] = f"Rejected (xi* = {xi:.6g} > {params.zero_threshold:g}); no guarantee is asserted."
    log.info("%s on %s: N=%d M=%d xi*=%.3g %s", params.method.value, sys.name, pl.N, pl.M, xi,
             ACCEPTED if accepted else REJECTED)
    return Certificate(
        method=params.method, system=_system_record(sys), params=params, plan=pl.to_dict(),
        seed=int(seed), solver=_solver_record(sol), basis=_basis_record(template),
        coefficients=a, verdict=ACCEPTED if accepted else REJECTED, guarantee=g, xi_star=xi,
        timings={"sample": t1 - t0, "build": t2 - t1, "solve": t3 - t2, "total": t3 - t0})


def draw_anchors(safe_set: SafeSet, N_o: int, seed: int) -> np.ndarray:
    """Anchor states for the stochastic objective, from their own stream."""
    return safe_set.sample(RngStream(seed, ANCHOR_STREAM), N_o)


def certify_sbc3(sys: BlackBoxSystem, params: PacParams, seed: int = 0, workers: int = 1) -> Certificate:
    if params.method is not Method.SBC3:
        raise ConfigError(f"certify_sbc3 needs method SBC3, got {params.method.value}")
    t0 = time.perf_counter()
    pl = plan(params, sys.n)
    anchors = draw_anchors(sys.safe_set, params.N_o, seed)
    samples = draw_group_samples(sys, sys.safe_set, pl.N, pl.M, seed, workers)
    t1 = time.perf_counter()
    template = sbc_template(sys.safe_set, params.kappa, params.U_a)
    model = build_sbc_lp(samples, template, params.tau, params.U_a, anchors)
    del samples
    t2 = time.perf_counter()
    sol = solve(model)
    t3 = time.perf_counter()
    a = sol.z[:-1]
    lam = float(sol.z[-1])
    J = float(sol.objective)
    bound_at_anchors = 1.0 - lam - template.eval_batch(a, anchors)
    vacuous = bool(np.mean(bound_at_anchors <= 0.0) > 0.5)
    g = pl.guarantee.to_dict()
    g["lambda_star"] = lam
    g["text"] = g["text"].replace("lambda*", f"lambda* (= {lam:.6g})")
    log.info("SBC3 on %s: N=%d M=%d J*=%.4f lambda*=%.4f", sys.name, pl.N, pl.M, J, lam)
    return Certificate(
        method=Method.SBC3, system=_system_record(sys), params=params, plan=pl.to_dict(),
        seed=int(seed), solver=_solver_record(sol), basis=_basis_record(template),
        coefficients=a, verdict=ACCEPTED if sol.status in ("optimal", "bound_hit") else REJECTED,
        guarantee=g, lambda_star=lam, J_star=J, vacuous=vacuous,
        timings={"sample": t1 - t0, "build": t2 - t1, "solve": t3 - t2, "total": t3 - t0})


def certify(sys: BlackBoxSystem, params: PacParams, seed: int = 0, workers: int = 1) -> Certificate:
    if params.method is Method.SBC3:
        return certify_sbc3(sys, params, seed, workers)
    if params.method is Method.RBC2:
        return certify_rbc2(sys, params, seed, workers)
    return certify_rbc1(sys, params, seed, workers)


def sbc_bound_raw(cert: Certificate, X) -> np.ndarray:
    """Unclamped ``1 - lambda* - h(a*, x)`` for points of X (batch)."""
    if cert.method is not Method.SBC3:
        raise ConfigError("the probability bound exists only for SBC3 certificates")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    safe = cert.safe_set()
    if not np.all(safe.contains_batch(X)):
        raise ValueError("the bound is defined only for states inside the safe set")
    return 1.0 - cert.lambda_star - cert.barrier(X)


def sbc_bound(cert: Certificate, x) -> float:
    """Lower bound on ``P_d[f(x, d) in X]`` clamped to [0, 1]."""
    return float(np.clip(sbc_bound_raw(cert, x)[0], 0.0, 1.0))


def sbc_bound_batch(cert: Certificate, X) -> np.ndarray:
    return np.clip(sbc_bound_raw(cert, X), 0.0, 1.0)
