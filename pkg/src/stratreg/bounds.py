"""Closed-form horizon bounds with simulation self-checks.

Two questions about a target action j: how long a game must be before a
static single-feature assessment policy can put the agent's whole budget on
j for the first t rounds (fixed budget), and how long before cumulative
effort E on j is attainable (quadratic costs).  Both bounds come from
explicit formulas; the returned horizon is always re-verified by simulating
the corresponding policy, and simulation is the final arbiter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import lp
from .agent import best_response_fixed_budget, best_response_quadratic
from .core import AssessmentPolicy, CostModel, EffortPolicy, GameParams

__all__ = [
    "HorizonBound",
    "InfeasibleCarryOver",
    "implementability_horizon",
    "effort_level_horizon",
    "quadratic_reachable",
]

_CEIL_SNAP = 1e-12


class InfeasibleCarryOver(ValueError):
    """The target action does not accumulate, so no horizon can work."""


@dataclass(frozen=True)
class HorizonBound:
    """A sufficient horizon plus the certificate that produced it.

    ``chosen_feature`` is the feature the static policy weights;
    ``binding_competitor`` the action whose coefficient is hardest to beat
    (None when there is none to beat); ``raw_gap`` the pre-ceiling value.
    When ``feasible`` is False the other fields are None.
    """

    feasible: bool
    horizon: int | None
    chosen_feature: int | None
    binding_competitor: int | None
    raw_gap: float | None


def _snap_ceil(x: float) -> int:
    return int(math.ceil(x - _CEIL_SNAP))


def _plays_action(params: GameParams, m: int, j: int, t: int, horizon: int) -> bool:
    """Does weighting feature m alone keep j coefficient-maximal in rounds 1..t?"""
    trial = replace(params, T=horizon, s0=np.zeros(params.d))
    policy = AssessmentPolicy.single_feature(horizon, params.n, m)
    response = best_response_fixed_budget(trial, policy)
    return all(j in response.tie_sets[i] for i in range(t))


def implementability_horizon(
    params: GameParams, j: int, t: int, statement_order: bool = False
) -> HorizonBound:
    """Shortest certified horizon making action j dominant through round t.

    Under the static policy weighting feature m, action z earns
    W[m,z] * (1 + (T - round) * omega[z]); beating competitor z from round t
    on needs T - t >= (W[m,z] - W[m,j]) / (omega[j] W[m,j] - omega[z] W[m,z])
    whenever that denominator is positive.  The default search minimizes over
    features m whose denominator is positive against every competitor, taking
    the worst competitor inside, and the candidate horizon t + ceil(gap) is
    confirmed by simulation (bumping by one round if the check fails).
    ``statement_order=True`` instead maximizes over competitors of the
    per-competitor best feature; that reading can be smaller, mixes features,
    and is reported for comparison without a simulation certificate.
    """
    if params.cost_model is not CostModel.FIXED_BUDGET:
        raise ValueError("implementability horizons apply to the fixed budget cost model")
    d, n = params.d, params.n
    if not 0 <= j < d:
        raise ValueError(f"action index {j} out of range")
    if t < 1:
        raise ValueError("t must be at least 1")
    W, omega = params.W, params.omega
    others = [z for z in range(d) if z != j]

    def ratio(m: int, z: int) -> float | None:
        denom = omega[j] * W[m, j] - omega[z] * W[m, z]
        if denom <= 0:
            return None
        return max(0.0, W[m, z] - W[m, j]) / denom

    gap: float | None = None
    feature: int | None = None
    competitor: int | None = None
    if statement_order:
        # For each competitor pick its easiest feature, then take the worst competitor.
        gap, feature = 0.0, 0
        for z in others:
            best_m: int | None = None
            best_r: float | None = None
            for m in range(n):
                r = ratio(m, z)
                if r is not None and (best_r is None or r < best_r):
                    best_m, best_r = m, r
            if best_r is None:
                return HorizonBound(False, None, None, None, None)
            if competitor is None or best_r > gap:
                gap, feature, competitor = best_r, best_m, z
    else:
        for m in range(n):
            ratios = [ratio(m, z) for z in others]
            if any(r is None for r in ratios):
                continue
            worst = max(ratios) if ratios else 0.0
            if gap is None or worst < gap:
                gap = worst
                feature = m
                competitor = others[int(np.argmax(ratios))] if ratios else None
        if gap is None:
            return HorizonBound(False, None, None, None, None)

    assert gap is not None and feature is not None
    candidate = t + _snap_ceil(gap)
    if statement_order:
        # Comparison value only: the per-competitor features may differ, so no
        # single static policy certifies this bound and simulation is skipped.
        return HorizonBound(True, candidate, feature, competitor, float(gap))
    for horizon in (candidate, candidate + 1):
        if _plays_action(params, feature, j, t, horizon):
            return HorizonBound(True, horizon, feature, competitor, float(gap))
    raise RuntimeError("simulation rejected both candidate horizons; formula inconsistent")


def effort_level_horizon(params: GameParams, j: int, E: float) -> HorizonBound:
    """Shortest horizon accumulating total effort E on action j (quadratic costs).

    The static policy weights the feature with the largest conversion W[m,j];
    the agent then invests W[m,j] (1 + (T - round) omega[j]) in j each round,
    and the quadratic formula inverts the resulting cumulative sum.  Raises
    :class:`InfeasibleCarryOver` when omega[j] is zero.
    """
    if params.cost_model is not CostModel.QUADRATIC:
        raise ValueError("effort-level horizons apply to the quadratic cost model")
    if not 0 <= j < params.d:
        raise ValueError(f"action index {j} out of range")
    if E <= 0:
        raise ValueError("target effort level must be positive")
    oj = float(params.omega[j])
    if oj <= 0:
        raise InfeasibleCarryOver(
            f"action {j} has zero carry-over; cumulative effort cannot be driven to {E}"
        )
    m = int(np.argmax(params.W[:, j]))
    wmj = float(params.W[m, j])
    if wmj <= 0:
        raise InfeasibleCarryOver(f"action {j} converts to no feature")
    raw = 0.5 - 1.0 / oj + 0.5 * math.sqrt((2.0 / oj - 1.0) ** 2 + 8.0 * E / (oj * wmj))
    candidate = max(1, _snap_ceil(raw))
    for horizon in (candidate, candidate + 1):
        if _cumulative_effort(params, m, j, horizon) >= E - 1e-9:
            return HorizonBound(True, horizon, m, None, float(raw))
    raise RuntimeError("simulation rejected both candidate horizons; formula inconsistent")


def _cumulative_effort(params: GameParams, m: int, j: int, horizon: int) -> float:
    trial = replace(params, T=horizon)
    policy = AssessmentPolicy.single_feature(horizon, params.n, m)
    efforts = best_response_quadratic(trial, policy)
    return float(efforts.efforts[:, j].sum())


def quadratic_reachable(params: GameParams, t: int, horizon: int, e: np.ndarray) -> bool:
    """Can round t of some assessment policy with the given horizon induce effort e?

    Feasibility of nonnegative weight rows theta_t .. theta_horizon, each of
    mass at most one, with W' theta_t + (W Omega)' (theta_{t+1} + ... +
    theta_horizon) = e, decided by linear programming.  Rows may be empty (a
    round that scores nothing), matching the sub-stochastic scale on which
    recovered assessments live; that is what makes larger horizons pure
    relaxations, so the reachable sets are nested across horizons.
    """
    if params.cost_model is not CostModel.QUADRATIC:
        raise ValueError("reachability applies to the quadratic cost model")
    if not 1 <= t <= horizon:
        raise ValueError("need 1 <= t <= horizon")
    e = np.asarray(e, dtype=float).reshape(-1)
    if e.shape != (params.d,):
        raise ValueError(f"e must have length {params.d}")
    n, d = params.n, params.d
    k = horizon - t + 1
    head = params.W.T  # (d, n): current-round conversion
    tail = (params.W * params.omega).T  # (d, n): carried conversion
    A_feat = np.hstack([head] + [tail] * (k - 1))
    A_simplex = np.zeros((k, k * n))
    for i in range(k):
        A_simplex[i, i * n : (i + 1) * n] = 1.0
    problem = lp.LpProblem(
        c=np.zeros(k * n),
        A=np.vstack([A_feat, A_simplex]),
        b=np.concatenate([e, np.ones(k)]),
        senses=tuple([lp.EQ] * d + [lp.LEQ] * k),
    )
    sol = lp.solve_lp(problem)
    if sol.status is lp.LpStatus.OPTIMAL:
        return True
    if sol.status is lp.LpStatus.INFEASIBLE:
        return False
    raise lp.NumericalFailure(f"reachability test returned {sol.status.value}")
