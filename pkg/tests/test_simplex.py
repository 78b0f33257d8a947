import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from pacsafe.errors import SolverError
from pacsafe.scenario_lp import solve_lp


def vertex_oracle(c, A, b, lo, hi):
    """Minimum over all vertices: every n-subset of constraints solved as equalities."""
    R, n = A.shape
    G = np.vstack([A, np.eye(n), -np.eye(n)])
    h = np.concatenate([b, hi, -lo])
    combos = np.array(list(itertools.combinations(range(G.shape[0]), n)))
    Bs = G[combos]
    rhs = h[combos]
    ok = np.abs(np.linalg.det(Bs)) > 1e-10
    Z = np.linalg.solve(Bs[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(Z @ G.T <= h + 1e-9, axis=1)
    if not feas.any():
        return None
    return float((Z[feas] @ c).min())


def random_lp(rng, feasible=True):
    n = int(rng.integers(1, 5))
    R = int(rng.integers(1, 13))
    A = rng.normal(size=(R, n))
    lo = -rng.uniform(0.5, 2, n)
    hi = rng.uniform(0.5, 2, n)
    if feasible:
        z0 = rng.uniform(lo, hi)
        b = A @ z0 + rng.uniform(0, 1, R)
    else:
        b = rng.normal(size=R)
    c = rng.normal(size=n)
    return c, A, b, lo, hi


def test_against_vertex_enumeration():
    rng = np.random.default_rng(2024)
    seen_infeasible = 0
    for t in range(100):
        c, A, b, lo, hi = random_lp(rng, feasible=t % 4 != 0)
        ref = vertex_oracle(c, A, b, lo, hi)
        sol = solve_lp(c, A, b, lo, hi, tie_break=False)
        if ref is None:
            seen_infeasible += 1
            assert sol.status == "infeasible"
            continue
        assert sol.status in ("optimal", "bound_hit")
        assert sol.objective == pytest.approx(ref, abs=1e-7)
        assert np.all(A @ sol.z <= b + 1e-9)
        assert np.all(sol.z >= lo) and np.all(sol.z <= hi)


def test_against_highs_tall():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n, R = int(rng.integers(3, 12)), int(rng.integers(50, 400))
        A = rng.normal(size=(R, n))
        lo, hi = -np.ones(n), np.ones(n)
        b = A @ rng.uniform(-0.5, 0.5, n) + rng.uniform(0, 0.5, R)
        c = rng.normal(size=n)
        ref = linprog(c, A_ub=A, b_ub=b, bounds=list(zip(lo, hi)), method="highs")
        sol = solve_lp(c, A, b, lo, hi)
        assert sol.objective == pytest.approx(ref.fun, abs=1e-7)


def test_degenerate_rows():
    # many duplicated rows through the same vertex
    A = np.vstack([np.tile([[1.0, 1.0]], (50, 1)), np.tile([[-1.0, 2.0]], (50, 1))])
    b = np.concatenate([np.ones(50), np.zeros(50)])
    sol = solve_lp([-1.0, -1.0], A, b, np.zeros(2), np.full(2, 5.0), tie_break=False)
    assert sol.objective == pytest.approx(-1.0)


def test_lexicographic_tie_break():
    # min x + y with x + y >= 1: every point of the segment is optimal
    sol = solve_lp([1.0, 1.0], [[-1.0, -1.0]], [-1.0], [0.0, 0.0], [2.0, 2.0])
    assert np.allclose(sol.z, [0.0, 1.0])
    # a flat objective: the lexicographic minimum of the feasible set
    sol = solve_lp([0.0, 0.0, 0.0], [[-1.0, -1.0, -1.0]], [-2.0], np.zeros(3), np.ones(3))
    assert np.allclose(sol.z, [0.0, 1.0, 1.0])


def test_tie_break_is_order_invariant_in_rows():
    rng = np.random.default_rng(3)
    A = -np.abs(rng.normal(size=(40, 4)))
    b = -np.ones(40)
    c = np.array([0.0, 0.0, 0.0, 0.0])
    perm = rng.permutation(40)
    z1 = solve_lp(c, A, b, np.zeros(4), np.full(4, 10.0)).z
    z2 = solve_lp(c, A[perm], b[perm], np.zeros(4), np.full(4, 10.0)).z
    assert np.allclose(z1, z2, atol=1e-9)


def test_needs_phase_one():
    # the origin (crash start) is infeasible: x >= 1, y >= 2
    sol = solve_lp([1.0, 1.0], [[-1.0, 0.0], [0.0, -1.0]], [-1.0, -2.0], [-5.0, -5.0], [5.0, 5.0])
    assert np.allclose(sol.z, [1.0, 2.0])


def test_infeasible_and_bad_input():
    sol = solve_lp([1.0], [[1.0], [-1.0]], [0.0, -1.0], [-5.0], [5.0])
    assert sol.status == "infeasible"
    assert solve_lp([1.0], np.zeros((0, 1)), np.zeros(0), [1.0], [0.0]).status == "infeasible"
    with pytest.raises(SolverError):
        solve_lp([1.0], [[1.0]], [1.0], [-np.inf], [1.0])
    with pytest.raises(SolverError):
        solve_lp([1.0, 2.0], [[1.0]], [1.0], [0.0], [1.0])


def test_bound_hit_status():
    # the scalar is forced to its upper bound
    sol = solve_lp([0.0, 1.0], [[0.0, -1.0]], [-3.0], [0.0, 0.0], [1.0, 3.0], scalar_index=1)
    assert sol.status == "bound_hit"
    sol = solve_lp([0.0, 1.0], [[0.0, -1.0]], [-1.0], [0.0, 0.0], [1.0, 3.0], scalar_index=1)
    assert sol.status == "optimal"
    assert sol.to_dict()["status"] == "optimal"


def test_no_rows():
    sol = solve_lp([1.0, -1.0], np.zeros((0, 2)), np.zeros(0), [0.0, 0.0], [1.0, 2.0])
    assert np.allclose(sol.z, [0.0, 2.0])
