"""Revised-simplex solver versus a from-scratch vertex-enumeration oracle."""

from __future__ import annotations

import numpy as np
import pytest
from _oracles import lp_vertex_oracle

from stratreg import LpProblem, LpStatus, solve_lp


def random_problem(rng: np.random.Generator, boxed: bool) -> LpProblem:
    """Small integer-coefficient instance; boxed ones are never unbounded."""
    m = int(rng.integers(2, 6))
    k = int(rng.integers(2, 5))
    A = rng.integers(-3, 4, size=(m, k)).astype(float)
    x0 = rng.integers(0, 3, size=k).astype(float)
    senses = tuple(str(rng.choice(["<=", ">=", "="])) for _ in range(m))
    b = A @ x0 + rng.integers(-2, 3, size=m)
    c = rng.integers(-4, 5, size=k).astype(float)
    upper = rng.integers(2, 7, size=k).astype(float) if boxed else None
    return LpProblem(c=c, A=A, b=b.astype(float), senses=senses, upper=upper)


def assert_matches_oracle(problem: LpProblem) -> None:
    got = solve_lp(problem)
    want = lp_vertex_oracle(problem)
    assert got.status.name.lower() == want.status, (got.status, want.status)
    if want.status == "optimal":
        assert got.x is not None and got.dual is not None
        assert abs(got.objective_value - want.value) <= 1e-7 * (1.0 + abs(want.value))
        assert_strong_duality(problem, got)


def assert_strong_duality(problem: LpProblem, sol) -> None:
    """Dual feasibility, sign conventions, and a tiny duality gap."""
    y = sol.dual
    assert y.shape == (problem.nrows,)
    for i, sense in enumerate(problem.senses):
        if sense == "<=":
            assert y[i] <= 1e-9
        elif sense == ">=":
            assert y[i] >= -1e-9
    lower = np.zeros(problem.ncols) if problem.lower is None else problem.lower
    reduced = problem.c - problem.A.T @ y
    dual_obj = float(y @ problem.b)
    upper = np.full(problem.ncols, np.inf) if problem.upper is None else problem.upper
    for j in range(problem.ncols):
        # the Lagrangian minimizes reduced[j] * x[j] over [lower, upper]
        r = float(reduced[j])
        if not np.isfinite(upper[j]):
            assert r >= -1e-7, f"negative reduced cost {r} on unbounded column {j}"
            dual_obj += max(r, 0.0) * lower[j]
        elif r >= 0.0:
            dual_obj += r * lower[j]
        else:
            dual_obj += r * upper[j]
    gap = abs(sol.objective_value - dual_obj)
    assert gap <= 1e-8 * (1.0 + abs(sol.objective_value))


class TestKnownInstances:
    def test_textbook_minimum(self):
        sol = solve_lp(LpProblem(c=[1.0, 1.0], A=[[1.0, 2.0]], b=[2.0], senses=(">=",)))
        assert sol.status is LpStatus.OPTIMAL
        assert np.allclose(sol.x, [0.0, 1.0], atol=1e-9)
        assert np.isclose(sol.objective_value, 1.0)
        assert np.allclose(sol.dual, [0.5])

    def test_infeasible(self):
        sol = solve_lp(
            LpProblem(c=[1.0], A=[[1.0], [1.0]], b=[2.0, 1.0], senses=(">=", "<="))
        )
        assert sol.status is LpStatus.INFEASIBLE
        assert sol.x is None and sol.dual is None

    def test_unbounded(self):
        sol = solve_lp(LpProblem(c=[-1.0, 0.0], A=[[0.0, 1.0]], b=[1.0], senses=("<=",)))
        assert sol.status is LpStatus.UNBOUNDED

    def test_upper_bounds_bind(self):
        sol = solve_lp(
            LpProblem(c=[-1.0, -1.0], A=[[1.0, 1.0]], b=[10.0], senses=("<=",), upper=[2.0, 3.0])
        )
        assert sol.status is LpStatus.OPTIMAL
        assert np.allclose(sol.x, [2.0, 3.0])
        assert np.isclose(sol.objective_value, -5.0)
        assert sol.dual.shape == (1,)

    def test_equality_rows(self):
        sol = solve_lp(
            LpProblem(c=[1.0, 2.0, 0.0], A=[[1.0, 1.0, 1.0], [1.0, -1.0, 0.0]], b=[4.0, 0.0], senses=("=", "="))
        )
        assert sol.status is LpStatus.OPTIMAL
        assert np.isclose(sol.objective_value, 0.0)
        assert np.allclose(sol.x, [0.0, 0.0, 4.0], atol=1e-9)

    def test_redundant_rows_keep_duals_aligned(self):
        problem = LpProblem(
            c=[1.0, 1.0],
            A=[[1.0, 2.0], [1.0, 2.0], [2.0, 4.0]],
            b=[2.0, 2.0, 4.0],
            senses=(">=", ">=", ">="),
        )
        sol = solve_lp(problem)
        assert sol.status is LpStatus.OPTIMAL
        assert np.isclose(sol.objective_value, 1.0)
        assert sol.dual.shape == (3,)
        assert np.isclose(sol.dual @ problem.b, 1.0)

    def test_degenerate_vertex_terminates(self):
        # many rows meet at the origin; Bland's rule must avoid cycling
        problem = LpProblem(
            c=[-1.0, -1.0, -1.0],
            A=[[1.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]],
            b=[0.0, 0.0, 0.0, 0.0],
            senses=("<=", "<=", "<=", "<="),
        )
        sol = solve_lp(problem)
        assert sol.status is LpStatus.OPTIMAL
        assert np.isclose(sol.objective_value, 0.0)

    def test_nonzero_lower_bounds(self):
        sol = solve_lp(
            LpProblem(c=[1.0, 1.0], A=[[1.0, 1.0]], b=[1.0], senses=(">=",), lower=[0.5, 0.25])
        )
        assert sol.status is LpStatus.OPTIMAL
        assert np.isclose(sol.objective_value, 1.0)
        assert sol.x.min() >= 0.25 - 1e-12

    def test_input_validation(self):
        with pytest.raises(ValueError, match="senses"):
            LpProblem(c=[1.0], A=[[1.0]], b=[1.0], senses=("??",))
        with pytest.raises(ValueError, match="finite"):
            LpProblem(c=[np.inf], A=[[1.0]], b=[1.0], senses=("<=",))
        with pytest.raises(ValueError, match="upper"):
            LpProblem(c=[1.0], A=[[1.0]], b=[1.0], senses=("<=",), lower=[2.0], upper=[1.0])


class TestAgainstOracle:
    def test_boxed_instances(self):
        rng = np.random.default_rng(2024)
        for _ in range(80):
            assert_matches_oracle(random_problem(rng, boxed=True))

    def test_open_instances(self):
        rng = np.random.default_rng(4048)
        for _ in range(60):
            assert_matches_oracle(random_problem(rng, boxed=False))

    def test_complementary_slackness(self):
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 40:
            problem = random_problem(rng, boxed=True)
            sol = solve_lp(problem)
            if sol.status is not LpStatus.OPTIMAL:
                continue
            checked += 1
            slack = problem.A @ sol.x - problem.b
            for i, sense in enumerate(problem.senses):
                if sense != "=" and abs(slack[i]) > 1e-7:
                    assert abs(sol.dual[i]) <= 1e-7, f"row {i} slack {slack[i]} dual {sol.dual[i]}"
