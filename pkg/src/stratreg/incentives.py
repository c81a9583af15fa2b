"""Membership oracle for incentivizable effort policies and policy recovery.

An effort policy is incentivizable (some assessment policy makes it a best
response) exactly when no alternative effort schedule weakly dominates it:
matching every round's feature vector while spending strictly less total
effort.  That test is a linear program; its optimal dual multipliers double
as an (unnormalized) assessment policy that incentivizes the input, which is
how :func:`recover_assessment` produces certificates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp
from .core import (
    AssessmentPolicy,
    BUDGET_TOL,
    CostModel,
    EffortPolicy,
    GameParams,
    coefficient_vectors,
)
from .agent import best_response_fixed_budget

__all__ = [
    "MEMBERSHIP_TOL",
    "VALIDATION_TOL",
    "SUPPORT_TOL",
    "MembershipVerdict",
    "RecoveredAssessment",
    "ValidationFailed",
    "domination_lp",
    "MembershipOracle",
    "membership",
    "recover_assessment",
]

MEMBERSHIP_TOL = 1e-6
VALIDATION_TOL = 1e-7
SUPPORT_TOL = 1e-9


class ValidationFailed(RuntimeError):
    """Recovered dual weights fail to incentivize the input efforts."""


@dataclass(frozen=True)
class MembershipVerdict:
    """Outcome of the domination test.

    ``kappa`` is the least total effort any schedule needs to match the input
    round-for-round; the input (with horizon T) is incentivizable iff
    kappa >= T - tol.  When it is not, ``witness`` is a cheaper dominating
    schedule.
    """

    kappa: float
    incentivizable: bool
    witness: EffortPolicy | None


@dataclass(frozen=True)
class RecoveredAssessment:
    """Dual certificate that the input efforts are a best response.

    ``policy`` holds the raw per-round dual weight vectors.  They are
    meaningful only jointly: rescaling individual rounds changes the induced
    best responses, so no per-round normalization is applied.  For reporting
    convenience ``rescaled_policy`` divides every round by the largest row
    l1 norm; ``in_simplex`` records whether that version happens to have all
    rows on the simplex (usually it does not).
    """

    policy: AssessmentPolicy
    rescaled_policy: AssessmentPolicy
    gamma: np.ndarray
    validated: bool
    in_simplex: bool


def _feature_targets(params: GameParams, efforts: np.ndarray) -> np.ndarray:
    """Round-by-round feature vectors W (Omega-carried efforts + current)."""
    carried = np.vstack(
        [np.zeros((1, params.d)), np.cumsum(efforts[:-1] * params.omega, axis=0)]
    )
    return (carried + efforts) @ params.W.T


class MembershipOracle:
    """Reusable domination test for one game instance.

    The constraint matrix depends only on the instance, so it is assembled
    once; each :meth:`check` call only rewrites the right-hand side.  The
    initial state contributes identically to both sides of every dominance
    row and cancels, so it never appears.
    """

    def __init__(self, params: GameParams):
        if params.cost_model is not CostModel.FIXED_BUDGET:
            raise ValueError("membership is defined for the fixed budget cost model")
        self.params = params
        T, n, d = params.T, params.n, params.d
        WO = params.W * params.omega
        A = np.zeros((T * n + T, T * d))
        for t in range(T):
            for tau in range(t + 1):
                A[t * n : (t + 1) * n, tau * d : (tau + 1) * d] = params.W if tau == t else WO
        for t in range(T):
            A[T * n + t, t * d : (t + 1) * d] = 1.0
        self._A = A
        self._senses = tuple([lp.GEQ] * (T * n) + [lp.LEQ] * T)
        self._c = np.ones(T * d)

    def problem_for(self, efforts: EffortPolicy, objective: np.ndarray | None = None) -> lp.LpProblem:
        params = self.params
        E = efforts.efforts
        if E.shape != (params.T, params.d):
            raise ValueError(
                f"dimension mismatch: efforts are {E.shape}, expected {(params.T, params.d)}"
            )
        if not efforts.within_budget(BUDGET_TOL):
            raise ValueError("efforts exceed the unit budget in some round")
        b = np.concatenate([_feature_targets(params, E).reshape(-1), np.ones(params.T)])
        return lp.LpProblem(
            c=self._c if objective is None else objective,
            A=self._A,
            b=b,
            senses=self._senses,
        )

    def check(self, efforts: EffortPolicy, tol: float = MEMBERSHIP_TOL) -> MembershipVerdict:
        params = self.params
        sol = lp.solve_lp(self.problem_for(efforts))
        if sol.status is not lp.LpStatus.OPTIMAL:
            raise lp.NumericalFailure(f"domination test returned {sol.status.value}")
        kappa = float(sol.objective_value)
        ok = kappa >= params.T - tol
        witness = None
        if not ok:
            witness = EffortPolicy(
                np.maximum(sol.x.reshape(params.T, params.d), 0.0)
            )
        return MembershipVerdict(kappa=kappa, incentivizable=ok, witness=witness)


def domination_lp(params: GameParams, efforts: EffortPolicy) -> lp.LpProblem:
    """Least total effort needed to match ``efforts`` feature-for-feature.

    Variables are the T*d entries of the alternative schedule (round-major);
    rows are T*n feature dominance constraints (>=) grouped per round,
    followed by T unit-budget constraints (<=).
    """
    return MembershipOracle(params).problem_for(efforts)


def membership(
    params: GameParams, efforts: EffortPolicy, tol: float = MEMBERSHIP_TOL
) -> MembershipVerdict:
    """One-shot domination test; build a :class:`MembershipOracle` for loops."""
    return MembershipOracle(params).check(efforts, tol)


def _validate_duals(
    params: GameParams,
    efforts: np.ndarray,
    lam_rows: np.ndarray,
    gamma: np.ndarray,
) -> bool:
    policy = AssessmentPolicy(lam_rows, unnormalized=True)
    C = coefficient_vectors(params, policy)
    scale = 1.0 + np.abs(1.0 + gamma)
    if (C - (1.0 + gamma)[:, None] > VALIDATION_TOL * scale[:, None]).any():
        return False
    support = efforts > SUPPORT_TOL
    gap = np.abs(C - (1.0 + gamma)[:, None])
    if (gap[support] > VALIDATION_TOL * np.broadcast_to(scale[:, None], C.shape)[support]).any():
        return False
    response = best_response_fixed_budget(params, policy, tie_tol=VALIDATION_TOL)
    for t in range(params.T):
        ties = set(response.tie_sets[t])
        if not set(np.flatnonzero(support[t]).tolist()) <= ties:
            return False
    return True


def recover_assessment(params: GameParams, efforts: EffortPolicy) -> RecoveredAssessment:
    """Extract an incentivizing assessment policy from the domination duals.

    The multipliers on the round-t dominance rows form the round-t weight
    vector; the (negated) multipliers on the budget rows give the per-round
    score level 1 + gamma_t that every supported action attains.  Inputs must
    pass :func:`membership`.  If the first dual solution is degenerate in a
    way that breaks validation, the objective is perturbed infinitesimally
    with a fixed seed and the program is re-solved once.
    """
    oracle = MembershipOracle(params)
    E = efforts.efforts
    T, n = params.T, params.n
    sol = lp.solve_lp(oracle.problem_for(efforts))
    if sol.status is not lp.LpStatus.OPTIMAL:
        raise lp.NumericalFailure(f"domination test returned {sol.status.value}")
    if sol.objective_value < params.T - MEMBERSHIP_TOL:
        raise ValueError(
            f"efforts are not incentivizable (kappa={sol.objective_value:.9g} < T={params.T})"
        )

    def extract(solution: lp.LpSolution) -> tuple[np.ndarray, np.ndarray]:
        lam_rows = np.maximum(solution.dual[: T * n].reshape(T, n), 0.0)
        gamma = np.maximum(-solution.dual[T * n :], 0.0)
        return lam_rows, gamma

    lam_rows, gamma = extract(sol)
    validated = _validate_duals(params, E, lam_rows, gamma)
    if not validated:
        rng = np.random.default_rng(0)
        perturbed = np.ones(T * params.d) + 1e-9 * rng.uniform(size=T * params.d)
        sol2 = lp.solve_lp(oracle.problem_for(efforts, objective=perturbed))
        if sol2.status is lp.LpStatus.OPTIMAL:
            cand_rows, cand_gamma = extract(sol2)
            if _validate_duals(params, E, cand_rows, cand_gamma):
                lam_rows, gamma, validated = cand_rows, cand_gamma, True
    if not validated:
        raise ValidationFailed(
            "recovered dual weights do not incentivize the input efforts within tolerance"
        )
    policy = AssessmentPolicy(lam_rows, unnormalized=True)
    norms = np.abs(lam_rows).sum(axis=1)
    top = float(norms.max())
    rescaled_rows = lam_rows / top if top > 0 else lam_rows
    in_simplex = bool(np.all(np.abs(rescaled_rows.sum(axis=1) - 1.0) <= 1e-9))
    rescaled = AssessmentPolicy(rescaled_rows, unnormalized=not in_simplex)
    return RecoveredAssessment(
        policy=policy,
        rescaled_policy=rescaled,
        gamma=gamma,
        validated=True,
        in_simplex=in_simplex,
    )
