"""Best responses under both cost models, checked against slow searches."""

from __future__ import annotations

import numpy as np
import pytest
from _oracles import coordinate_ascent_quadratic, fd_gradient
from conftest import classroom_params, make_params, random_assessment, random_params

from stratreg import (
    AssessmentPolicy,
    CostModel,
    EffortPolicy,
    GuardExceeded,
    agent_brute_force_oracle,
    best_response_fixed_budget,
    best_response_quadratic,
    simulate_trajectory,
)


class TestFixedBudget:
    def test_classroom_uniform_studies_then_cheats(self, classroom):
        br = best_response_fixed_budget(classroom, AssessmentPolicy.uniform(3, 2))
        assert br.efforts.efforts.tolist() == [[0, 1, 0], [0, 1, 0], [1, 0, 0]]
        assert br.tie_sets == ((1,), (1,), (0, 2))
        assert br.is_unique == (True, True, False)

    def test_first_round_studies_for_any_policy(self, classroom):
        # study always scores 3 in round one (both features, two more rounds of
        # carry-over) while either cheat scores at most 3, and ties break toward
        # the principal's preferred action
        rng = np.random.default_rng(3)
        for _ in range(30):
            policy = random_assessment(rng, 3, 2)
            br = best_response_fixed_budget(classroom, policy)
            assert br.efforts.efforts[0, 1] == 1.0
            # round two studies exactly when neither cheat coefficient 3*theta
            # exceeds the two remaining rounds of study value
            expect_study = 3.0 * policy.rules[1].max() <= 2.0 + 1e-9
            assert bool(br.efforts.efforts[1, 1] == 1.0) == expect_study

    def test_tie_breaks_prefer_principal_then_low_index(self):
        # both actions convert identically; only the second pleases the principal
        params = make_params([[1.0, 1.0]], [0.0, 0.0], [0.0, 1.0], T=1)
        br = best_response_fixed_budget(params, AssessmentPolicy.uniform(1, 1))
        assert br.efforts.efforts.tolist() == [[0.0, 1.0]]
        assert br.tie_sets == ((0, 1),)
        # equal principal weight falls back to the lowest action index
        params = make_params([[1.0, 1.0]], [0.0, 0.0], [0.0, 0.0], T=1)
        br = best_response_fixed_budget(params, AssessmentPolicy.uniform(1, 1))
        assert br.efforts.efforts.tolist() == [[1.0, 0.0]]

    def test_full_budget_every_round(self):
        rng = np.random.default_rng(17)
        for _ in range(25):
            params = random_params(rng)
            br = best_response_fixed_budget(params, random_assessment(rng, params.T, params.n))
            assert np.allclose(br.efforts.round_sums(), 1.0)

    def test_beats_brute_force_grid(self):
        rng = np.random.default_rng(23)
        for _ in range(12):
            params = random_params(rng, T_range=(1, 3), d_range=(2, 3))
            policy = random_assessment(rng, params.T, params.n)
            br = best_response_fixed_budget(params, policy)
            grid_best = agent_brute_force_oracle(params, policy, grid_k=4)
            u_br = simulate_trajectory(params, policy, br.efforts).agent_utility
            u_grid = simulate_trajectory(params, policy, grid_best).agent_utility
            assert u_br >= u_grid - 1e-9

    def test_rejects_quadratic_instances(self, classroom_quadratic):
        with pytest.raises(ValueError, match="cost model"):
            best_response_fixed_budget(classroom_quadratic, AssessmentPolicy.uniform(3, 2))


class TestQuadratic:
    def test_classroom_uniform_closed_form(self, classroom_quadratic):
        eff = best_response_quadratic(classroom_quadratic, AssessmentPolicy.uniform(3, 2))
        assert eff.efforts.tolist() == [[1.5, 3.0, 1.5], [1.5, 2.0, 1.5], [1.5, 1.0, 1.5]]

    def test_matches_coordinate_ascent(self):
        rng = np.random.default_rng(5)
        for _ in range(6):
            params = random_params(rng, T_range=(1, 3), d_range=(2, 3), cost_model=CostModel.QUADRATIC)
            policy = random_assessment(rng, params.T, params.n)
            closed = best_response_quadratic(params, policy)
            slow = coordinate_ascent_quadratic(params, policy)
            assert np.abs(closed.efforts - slow).max() <= 1e-5

    def test_gradient_vanishes_on_support(self):
        rng = np.random.default_rng(6)
        for _ in range(6):
            params = random_params(rng, T_range=(1, 3), d_range=(2, 3), cost_model=CostModel.QUADRATIC)
            policy = random_assessment(rng, params.T, params.n)
            closed = best_response_quadratic(params, policy).efforts
            g = fd_gradient(params, policy, closed)
            assert np.abs(g[closed > 1e-8]).max(initial=0.0) <= 1e-6

    def test_rejects_fixed_budget_instances(self, classroom):
        with pytest.raises(ValueError, match="cost model"):
            best_response_quadratic(classroom, AssessmentPolicy.uniform(3, 2))


class TestBruteForceGuard:
    def test_guard_trips_on_large_enumerations(self):
        params = classroom_params(T=3)
        with pytest.raises(GuardExceeded):
            agent_brute_force_oracle(params, AssessmentPolicy.uniform(3, 2), grid_k=200)

    def test_quadratic_grid_brackets_closed_form(self, classroom_quadratic):
        policy = AssessmentPolicy.uniform(3, 2)
        grid = agent_brute_force_oracle(classroom_quadratic, policy, grid_k=3)
        u_grid = simulate_trajectory(classroom_quadratic, policy, grid).agent_utility
        closed = best_response_quadratic(classroom_quadratic, policy)
        u_closed = simulate_trajectory(classroom_quadratic, policy, closed).agent_utility
        assert u_closed >= u_grid - 1e-9
