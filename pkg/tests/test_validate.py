import csv

import numpy as np
import pytest

from pacsafe.certify import certify, sbc_bound
from pacsafe.core import PacParams
from pacsafe.errors import ConfigError
from pacsafe.rng import RngStream
from pacsafe.systems import builtin
from pacsafe.validate import (contour_grid, mc_many, mc_one_step, mc_state_sweep, parse_slice,
                              simulate, validate_certificate)

SBC = PacParams(method="sbc3", alpha1=0.1, delta1=1e-3, delta2=0.999, l=0.2, tau=0.05,
                U_a=1.1, kappa=2, N_o=200)


@pytest.fixture(scope="module")
def lotka_cert():
    return certify(builtin("lotka"), SBC, seed=0)


def test_mc_one_step_deterministic_parts():
    s = builtin("vinc")
    est = mc_one_step(s, [0.0, 0.0], 1000, rng=1)
    assert est.p == 1.0 and est.se == 0.0 and float(est) == 1.0
    # from (-0.8, -0.5) lotka's x stays at -0.8; y' = -0.5 + 0.1(1.2 - 0.5 d) + ... leaves
    # the unit disc only for some disturbances
    e = mc_one_step(builtin("lotka"), [-0.8, -0.5], 20_000, rng=2)
    assert 0.0 < e.p < 1.0
    assert e.se == pytest.approx(np.sqrt(e.p * (1 - e.p) / 20_000))


def test_mc_matches_closed_form():
    """For lotka, x' = x, so from (x, y) the successor is safe iff |y'| <= sqrt(1 - x^2).

    With d ~ U[-1, 1] entering y' affinely this is an interval probability.
    """
    s = builtin("lotka")
    x, y = -0.8, -0.5
    ds = np.linspace(-1, 1, 200_001)
    nxt = s.step_batch(np.tile([x, y], (ds.size, 1)), ds[:, None])
    exact = np.mean(s.safe_set.contains_batch(nxt))
    est = mc_one_step(s, [x, y], 100_000, rng=3)
    assert abs(est.p - exact) < 4 * est.se + 1e-4


def test_mc_many_and_streams():
    s = builtin("pendulum")
    X = s.safe_set.sample(RngStream(0, 0), 5)
    a = mc_many(s, X, 500, rng=4)
    b = mc_many(s, X, 500, rng=4)
    assert np.array_equal(a, b)
    assert a.shape == (5,) and np.all((a >= 0) & (a <= 1))
    with pytest.raises(ValueError):
        mc_one_step(s, [0, 0], 0)


def test_sweep():
    r = mc_state_sweep(builtin("vinc"), 200, 100, 0.95, rng=0)
    assert r.fraction == 1.0 and r.n_states == 200


def test_simulate():
    s = builtin("lotka")
    tr = simulate(s, [-0.8, -0.5], 5, 50, rng=0)
    assert tr.states.shape == (50, 6, 2)
    assert np.allclose(tr.states[:, 1, 0], -0.8)
    assert tr.safe[:, 0].all()
    assert tr.ever_unsafe.shape == (50,)
    with pytest.raises(ValueError):
        simulate(s, [2.0, 2.0], 5, 5)


def test_parse_slice():
    assert parse_slice("3=0.1,x4=-0.2") == {2: 0.1, 3: -0.2}
    assert parse_slice(None) == {}
    for bad in ("3", "a=1", "0=1"):
        with pytest.raises(ConfigError):
            parse_slice(bad)


def test_grid_and_csv(tmp_path, lotka_cert):
    g = contour_grid(lotka_cert, 20)
    assert g.points.shape == (400, 2) and g.axes == (0, 1)
    inside = g.in_safe_set
    assert 0 < inside.sum() < 400
    assert np.all(np.isnan(g.raw[~inside]))
    k = int(np.flatnonzero(inside)[0])
    assert g.bound[k] == pytest.approx(sbc_bound(lotka_cert, g.points[k]))
    path = g.write_csv(tmp_path / "g.csv")
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["x1", "x2", "bound", "in_safe_set"]
    assert len(rows) == 401
    assert all((r[2] == "") == (r[3] == "0") for r in rows[1:])


def test_grid_needs_two_free_coordinates(lotka_cert):
    with pytest.raises(ConfigError):
        contour_grid(lotka_cert, 10, {0: 0.1})
    with pytest.raises(ConfigError):
        contour_grid(lotka_cert, 10, {5: 0.1})
    with pytest.raises(ConfigError):
        contour_grid(lotka_cert, 0)


def test_grid_slices_higher_dimension():
    p = PacParams(method="sbc3", alpha1=0.1, delta1=1e-3, delta2=0.999, l=0.2, tau=0.1,
                  U_a=1.1, kappa=1, N_o=50)
    cert = certify(builtin("stable3"), p, seed=0)
    g = contour_grid(cert, 8, parse_slice("2=0.5"))
    assert g.axes == (0, 2)
    assert np.all(g.points[:, 1] == 0.5)
    rbc = certify(builtin("vinc"), PacParams(alpha1=0.3, alpha2=0.3, delta=0.01), seed=0)
    with pytest.raises(ConfigError):
        contour_grid(rbc, 10)


def test_validate_certificates(lotka_cert):
    rep = validate_certificate(lotka_cert, builtin("lotka"), n_states=200, n_mc=200)
    assert rep["passed"]
    names = [c["name"] for c in rep["checks"]]
    assert names == ["plan_integrity", "bound_dominance"]
    rbc = certify(builtin("vinc"), PacParams(alpha1=0.3, alpha2=0.3, delta=0.01), seed=0)
    rep = validate_certificate(rbc, builtin("vinc"), n_states=300, n_mc=100)
    assert rep["passed"] and rep["checks"][1]["name"] == "outer_fraction_sweep"
    rej = certify(builtin("lotka"), PacParams(alpha1=0.3, alpha2=0.3, delta=0.01), seed=0)
    assert not rej.accepted
    assert validate_certificate(rej, builtin("lotka"), n_states=10, n_mc=10)["passed"]


def test_validate_flags_tampering(lotka_cert):
    import copy

    bad = copy.deepcopy(lotka_cert)
    bad.plan["M"] += 1
    rep = validate_certificate(bad, builtin("lotka"), n_states=10, n_mc=10)
    assert not rep["passed"] and rep["checks"][0]["name"] == "plan_integrity"
