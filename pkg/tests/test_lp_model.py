import numpy as np
import pytest

from pacsafe.basis import rbc_template, sbc_template
from pacsafe.certify import draw_anchors
from pacsafe.errors import ConfigError
from pacsafe.scenario_lp import LpModel, build_rbc_lp, build_sbc_lp, solve
from pacsafe.systems import builtin, draw_group_samples, draw_pair_samples


@pytest.fixture(scope="module")
def lotka():
    return builtin("lotka")


def test_rbc_rows_and_zero_anchor(lotka):
    P = draw_pair_samples(lotka, lotka.safe_set, 400, seed=1)
    t = rbc_template(lotka.safe_set, 1, -1.0, 10.0)
    model = build_rbc_lp(P, t, 0.01, 10.0, 10.0)
    assert model.A.shape == (400, t.m + 1)
    assert model.kind == "rbc" and model.scalar_name == "xi"
    # a = 0, xi = -C satisfies every row
    z = np.append(np.zeros(t.m), 1.0)
    assert model.is_feasible(z)
    # each row restates h(x+) >= gamma h(x) - xi at a random a
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 10, t.m)
    xi = 3.0
    lhs = model.A @ np.append(a, xi) - model.b
    direct = 0.01 * t.eval_batch(a, P.states) - xi - t.eval_batch(a, P.next_states)
    assert np.allclose(lhs, direct)


def test_rbc_group_rows(lotka):
    G = draw_group_samples(lotka, lotka.safe_set, 30, 7, seed=1)
    t = rbc_template(lotka.safe_set, 1, -1.0, 10.0)
    model = build_rbc_lp(G, t, 0.01, 10.0, 10.0)
    assert model.n_rows == 210
    assert np.array_equal(model.provenance, np.arange(210))


def test_sbc_rows_and_upper_anchor(lotka):
    G = draw_group_samples(lotka, lotka.safe_set, 50, 20, seed=2)
    t = sbc_template(lotka.safe_set, 2, 1.1)
    anchors = draw_anchors(lotka.safe_set, 100, 2)
    model = build_sbc_lp(G, t, 0.01, 1.1, anchors)
    assert model.A.shape == (50, t.m + 1)
    # a = U_a * 1, lambda = tau is feasible (partition of unity)
    z = np.append(np.full(t.m, 1.1), 0.01)
    assert model.is_feasible(z, tol=1e-12)
    # rows restate mean h(x+) <= h(x) + lambda - tau
    rng = np.random.default_rng(1)
    a = rng.uniform(0, 1.1, t.m)
    lam = 0.3
    lhs = model.A @ np.append(a, lam) - model.b
    means = np.array([t.eval_batch(a, G.next_states[i]).mean() for i in range(50)])
    assert np.allclose(lhs, means - t.eval_batch(a, G.states) - lam + 0.01)
    # objective is the anchor mean of h plus lambda
    assert model.c @ np.append(a, lam) == pytest.approx(t.eval_batch(a, anchors).mean() + lam)


def test_sbc_chunking_invariant(lotka):
    G = draw_group_samples(lotka, lotka.safe_set, 37, 9, seed=3)
    t = sbc_template(lotka.safe_set, 1, 1.1)
    anchors = draw_anchors(lotka.safe_set, 10, 3)
    a = build_sbc_lp(G, t, 0.01, 1.1, anchors)
    b = build_sbc_lp(G, t, 0.01, 1.1, anchors, state_chunk=5)
    assert np.array_equal(a.A, b.A) and np.array_equal(a.b, b.b)


def test_template_mismatch_rejected(lotka):
    P = draw_pair_samples(lotka, lotka.safe_set, 5, seed=0)
    G = draw_group_samples(lotka, lotka.safe_set, 5, 2, seed=0)
    with pytest.raises(ConfigError):
        build_rbc_lp(P, sbc_template(lotka.safe_set, 1, 1.1), 0.01, 10, 10)
    with pytest.raises(ConfigError):
        build_sbc_lp(G, rbc_template(lotka.safe_set, 1, -1.0, 10), 0.01, 1.1, np.zeros((1, 2)))
    with pytest.raises(ConfigError):
        build_sbc_lp(G, sbc_template(lotka.safe_set, 1, 1.1), 0.01, 1.1, np.zeros((0, 2)))


def test_dump_load_roundtrip_and_highs(tmp_path, lotka):
    from scipy.optimize import linprog

    G = draw_group_samples(lotka, lotka.safe_set, 40, 10, seed=4)
    t = sbc_template(lotka.safe_set, 2, 1.1)
    model = build_sbc_lp(G, t, 0.01, 1.1, draw_anchors(lotka.safe_set, 50, 4))
    path = tmp_path / "m.lp"
    model.dump(path)
    back = LpModel.load(path)
    for f in ("c", "A", "b", "lo", "hi"):
        assert np.array_equal(getattr(back, f), getattr(model, f))
    assert (back.kind, back.scalar_name) == ("sbc", "lambda")
    ref = linprog(back.c, A_ub=back.A, b_ub=back.b, bounds=list(zip(back.lo, back.hi)), method="highs")
    assert solve(model).objective == pytest.approx(ref.fun, abs=1e-7)


def test_load_rejects_other_files(tmp_path):
    p = tmp_path / "x.lp"
    p.write_text("hello\n")
    with pytest.raises(ConfigError):
        LpModel.load(p)
