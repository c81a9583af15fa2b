"""Shared instances used across the test modules.

``classroom`` is the two-feature exam setting (test score, homework score)
with three actions (cheat on the test, study, cheat on homework) where only
study carries over between rounds and only study counts for the principal.
``cube_slice`` is a small instance whose incentivizable set fills the whole
reduced search cube, which makes it useful for exercising the random-walk
optimizer away from degenerate vertices.  ``nonconvex_pair`` is an instance
where two incentivizable policies have a non-incentivizable midpoint.
"""

from __future__ import annotations

import numpy as np
import pytest

from stratreg import CostModel, GameParams


def make_params(
    W,
    omega,
    lam=None,
    *,
    T: int = 3,
    cost_model: CostModel = CostModel.FIXED_BUDGET,
    s0=None,
    feature_names: tuple[str, ...] = (),
    action_names: tuple[str, ...] = (),
) -> GameParams:
    W = np.array(W, dtype=float)
    d = W.shape[1]
    return GameParams(
        W=W,
        omega=np.array(omega, dtype=float),
        lam=np.ones(d) if lam is None else np.array(lam, dtype=float),
        s0=np.zeros(d) if s0 is None else np.array(s0, dtype=float),
        T=T,
        cost_model=cost_model,
        feature_names=feature_names,
        action_names=action_names,
    )


def classroom_params(T: int = 3, cost_model: CostModel = CostModel.FIXED_BUDGET) -> GameParams:
    return make_params(
        [[3.0, 1.0, 0.0], [0.0, 1.0, 3.0]],
        [0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        T=T,
        cost_model=cost_model,
        feature_names=("test", "homework"),
        action_names=("cheat_test", "study", "cheat_homework"),
    )


@pytest.fixture
def classroom() -> GameParams:
    return classroom_params()


@pytest.fixture
def classroom_quadratic() -> GameParams:
    return classroom_params(cost_model=CostModel.QUADRATIC)


@pytest.fixture
def cube_slice() -> GameParams:
    """Every reduced point is incentivizable: the walk has room to move."""
    return make_params([[2.0, 1.0], [0.0, 1.0]], [0.0, 0.5], [0.0, 1.0], T=3)


@pytest.fixture
def nonconvex_pair() -> GameParams:
    """All-first-action and all-third-action are members; their midpoint is not."""
    return make_params([[2.0, 1.0, 0.0], [0.0, 1.0, 1.9]], [0.0, 0.4, 0.0], [0.0, 1.0, 0.0], T=3)


def identity_quadratic(T: int, d: int = 2) -> GameParams:
    return make_params(np.eye(d), np.ones(d), np.ones(d), T=T, cost_model=CostModel.QUADRATIC)


def random_column_positive_W(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """Nonnegative conversion matrix with a positive entry in every column."""
    W = rng.uniform(0.0, 2.0, size=(n, d)) * (rng.random((n, d)) < 0.6)
    for j in range(d):
        if W[:, j].max() <= 0.0:
            W[rng.integers(n), j] = rng.uniform(0.5, 2.0)
    return W


def random_params(
    rng: np.random.Generator,
    *,
    T_range: tuple[int, int] = (1, 4),
    n_range: tuple[int, int] = (1, 3),
    d_range: tuple[int, int] = (2, 4),
    cost_model: CostModel = CostModel.FIXED_BUDGET,
) -> GameParams:
    T = int(rng.integers(T_range[0], T_range[1] + 1))
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    d = int(rng.integers(d_range[0], d_range[1] + 1))
    return make_params(
        random_column_positive_W(rng, n, d),
        rng.uniform(0.0, 1.0, size=d),
        rng.uniform(0.0, 1.0, size=d),
        T=T,
        cost_model=cost_model,
    )


def random_assessment(rng: np.random.Generator, T: int, n: int):
    from stratreg import AssessmentPolicy

    return AssessmentPolicy(rng.dirichlet(np.ones(n), size=T))


ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    """Echo one PASS/FAIL line per acceptance criterion after the run."""
    if ACCEPTANCE_RESULTS:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
