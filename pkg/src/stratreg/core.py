"""Game-instance model, validation, and forward simulation.

A principal scores an agent over ``T`` rounds.  Each round the agent splits
effort across ``d`` actions; effort converts into ``n`` observable features
through a nonnegative matrix ``W`` and partially persists between rounds
through a diagonal carry-over matrix stored as the vector ``omega``.  The
principal announces one weight vector per round (an assessment policy) and
pays the agent the weighted feature score; the principal's own payoff weights
the agent's cumulative effort by the diagonal ``lam``.

All public types are frozen dataclasses wrapping read-only arrays, so values
can be shared freely across threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CostModel",
    "GameParams",
    "AssessmentPolicy",
    "EffortPolicy",
    "Trajectory",
    "ValidationReport",
    "validate_params",
    "simulate_trajectory",
    "coefficient_vectors",
    "SIMPLEX_TOL",
    "NONNEG_TOL",
    "BUDGET_TOL",
]

SIMPLEX_TOL = 1e-9
NONNEG_TOL = 1e-9
BUDGET_TOL = 1e-9


class CostModel(enum.Enum):
    """Agent cost structure: per-round unit effort budget, or quadratic cost."""

    FIXED_BUDGET = "fixed_budget"
    QUADRATIC = "quadratic"


def _readonly(values, shape_hint: str = "") -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class GameParams:
    """One game instance.

    ``W`` is the n x d effort-to-feature conversion matrix, ``omega`` the
    length-d diagonal of the carry-over matrix, ``lam`` the length-d diagonal
    of the principal's preference matrix, ``s0`` the initial accumulated
    state.  ``feature_offset`` is an optional additive shift applied to every
    observation vector (defaults to zero); baseline feature levels can
    usually be encoded through ``s0`` instead when ``W @ s0`` realizes them.
    """

    W: np.ndarray
    omega: np.ndarray
    lam: np.ndarray
    s0: np.ndarray
    T: int
    cost_model: CostModel
    feature_names: tuple[str, ...] = ()
    action_names: tuple[str, ...] = ()
    feature_offset: np.ndarray | None = None

    def __post_init__(self) -> None:
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.size == 0:
            raise ValueError("W must be a non-empty 2-D matrix")
        n, d = W.shape
        omega = np.array(self.omega, dtype=float).reshape(-1)
        lam = np.array(self.lam, dtype=float).reshape(-1)
        s0 = np.array(self.s0, dtype=float).reshape(-1)
        if omega.shape != (d,):
            raise ValueError(f"omega must have length {d} (one entry per action)")
        if lam.shape != (d,):
            raise ValueError(f"lam must have length {d} (one entry per action)")
        if s0.shape != (d,):
            raise ValueError(f"s0 must have length {d} (one entry per action)")
        if self.feature_offset is None:
            offset = np.zeros(n)
        else:
            offset = np.array(self.feature_offset, dtype=float).reshape(-1)
            if offset.shape != (n,):
                raise ValueError(f"feature_offset must have length {n}")
        if not isinstance(self.cost_model, CostModel):
            raise ValueError("cost_model must be a CostModel")
        fnames = tuple(self.feature_names) or tuple(f"f{i + 1}" for i in range(n))
        anames = tuple(self.action_names) or tuple(f"a{j + 1}" for j in range(d))
        if len(fnames) != n:
            raise ValueError(f"feature_names must have {n} entries")
        if len(anames) != d:
            raise ValueError(f"action_names must have {d} entries")
        for name, val in (
            ("W", _readonly(W)),
            ("omega", _readonly(omega)),
            ("lam", _readonly(lam)),
            ("s0", _readonly(s0)),
            ("feature_offset", _readonly(offset)),
            ("T", int(self.T)),
            ("feature_names", fnames),
            ("action_names", anames),
        ):
            object.__setattr__(self, name, val)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of semantic validation: ok flag plus one message per violation."""

    ok: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def validate_params(params: GameParams) -> ValidationReport:
    """Check the semantic invariants of a game instance.

    Returns a report instead of raising so callers can surface every
    violation at once (the CLI prints them all).
    """
    bad: list[str] = []
    W, omega, lam = params.W, params.omega, params.lam
    if params.T < 1:
        bad.append(f"T: horizon must be at least 1, got {params.T}")
    if not np.isfinite(W).all():
        bad.append("W: contains non-finite entries")
    else:
        rows, cols = np.nonzero(W < 0)
        for i, j in zip(rows, cols):
            bad.append(f"W[{i},{j}]: negative conversion rate")
        for j in range(params.d):
            if not (W[:, j] > 0).any():
                bad.append(
                    f"W column {j} ({params.action_names[j]}): non-monotone column, no positive entry"
                )
    for j in range(params.d):
        if not np.isfinite(omega[j]) or omega[j] < 0 or omega[j] > 1:
            bad.append(f"omega[{j}]: carry-over outside [0, 1]")
    for j in range(params.d):
        if not np.isfinite(lam[j]) or lam[j] < 0:
            bad.append(f"lambda[{j}]: negative preference weight")
    if not np.isfinite(params.s0).all():
        bad.append("s0: contains non-finite entries")
    if not np.isfinite(params.feature_offset).all():
        bad.append("feature_offset: contains non-finite entries")
    return ValidationReport(ok=not bad, violations=tuple(bad))


@dataclass(frozen=True)
class AssessmentPolicy:
    """Per-round feature weight vectors, one row per round.

    Rows must lie on the probability simplex unless ``unnormalized`` is set,
    which admits nonnegative weight vectors of any scale (used for policies
    recovered from optimization duals, which carry meaning only jointly and
    must not be rescaled per round).
    """

    rules: np.ndarray
    unnormalized: bool = False

    def __post_init__(self) -> None:
        rules = np.array(self.rules, dtype=float)
        if rules.ndim != 2 or rules.size == 0:
            raise ValueError("rules must be a non-empty 2-D array (rounds x features)")
        if not np.isfinite(rules).all():
            raise ValueError("rules contain non-finite entries")
        if (rules < -SIMPLEX_TOL).any():
            raise ValueError("rules contain negative weights")
        if not self.unnormalized:
            sums = rules.sum(axis=1)
            off = np.flatnonzero(np.abs(sums - 1.0) > SIMPLEX_TOL)
            if off.size:
                raise ValueError(
                    f"rule rows {off.tolist()} do not sum to 1 (pass unnormalized=True for raw weights)"
                )
        object.__setattr__(self, "rules", _readonly(rules))

    @classmethod
    def uniform(cls, T: int, n: int) -> "AssessmentPolicy":
        return cls(np.full((T, n), 1.0 / n))

    @classmethod
    def single_feature(cls, T: int, n: int, k: int) -> "AssessmentPolicy":
        """The static policy putting all weight on feature ``k`` every round."""
        rules = np.zeros((T, n))
        rules[:, k] = 1.0
        return cls(rules)

    @property
    def horizon(self) -> int:
        return self.rules.shape[0]

    @property
    def n(self) -> int:
        return self.rules.shape[1]


@dataclass(frozen=True)
class EffortPolicy:
    """Per-round effort vectors, one row per round; entries are nonnegative.

    Budget feasibility is cost-model dependent, so it is not enforced here;
    use :meth:`within_budget` where the unit budget applies.
    """

    efforts: np.ndarray

    def __post_init__(self) -> None:
        eff = np.array(self.efforts, dtype=float)
        if eff.ndim != 2 or eff.size == 0:
            raise ValueError("efforts must be a non-empty 2-D array (rounds x actions)")
        if not np.isfinite(eff).all():
            raise ValueError("efforts contain non-finite entries")
        if (eff < -NONNEG_TOL).any():
            raise ValueError("efforts contain negative entries")
        object.__setattr__(self, "efforts", _readonly(eff))

    @classmethod
    def from_actions(cls, actions, d: int) -> "EffortPolicy":
        """Full-budget policy playing one named action index per round."""
        eff = np.zeros((len(actions), d))
        for t, j in enumerate(actions):
            eff[t, int(j)] = 1.0
        return cls(eff)

    @property
    def horizon(self) -> int:
        return self.efforts.shape[0]

    @property
    def d(self) -> int:
        return self.efforts.shape[1]

    def round_sums(self) -> np.ndarray:
        return self.efforts.sum(axis=1)

    def within_budget(self, tol: float = BUDGET_TOL) -> bool:
        return bool((self.round_sums() <= 1.0 + tol).all())


@dataclass(frozen=True)
class Trajectory:
    """Realized play: states entering each round, observations, and payoffs."""

    states: np.ndarray
    observables: np.ndarray
    scores: np.ndarray
    agent_utility: float
    principal_utility: float


def _check_shapes(params: GameParams, policy: AssessmentPolicy, efforts: EffortPolicy) -> None:
    if policy.rules.shape != (params.T, params.n):
        raise ValueError(
            f"dimension mismatch: policy is {policy.rules.shape}, expected {(params.T, params.n)}"
        )
    if efforts.efforts.shape != (params.T, params.d):
        raise ValueError(
            f"dimension mismatch: efforts are {efforts.efforts.shape}, expected {(params.T, params.d)}"
        )


def simulate_trajectory(
    params: GameParams, policy: AssessmentPolicy, efforts: EffortPolicy
) -> Trajectory:
    """Roll the dynamics forward and price both sides.

    Round t observes o_t = W (s_t + e_t) + offset where the state s_t carries
    s_0 plus the omega-discounted sum of all earlier efforts.  The agent earns
    the sum of per-round scores (minus half the squared effort norm under the
    quadratic cost model); the principal earns the lam-weighted l1 norm of
    total effort.
    """
    _check_shapes(params, policy, efforts)
    E = efforts.efforts
    d = params.d
    carried = np.vstack([np.zeros((1, d)), np.cumsum(E[:-1] * params.omega, axis=0)])
    states = params.s0 + carried
    observables = (states + E) @ params.W.T + params.feature_offset
    scores = (policy.rules * observables).sum(axis=1)
    agent = float(scores.sum())
    if params.cost_model is CostModel.QUADRATIC:
        agent -= 0.5 * float((E**2).sum())
    principal = float(np.abs(params.lam * E.sum(axis=0)).sum())
    return Trajectory(
        states=_readonly(states),
        observables=_readonly(observables),
        scores=_readonly(scores),
        agent_utility=agent,
        principal_utility=principal,
    )


def coefficient_vectors(params: GameParams, policy: AssessmentPolicy) -> np.ndarray:
    """Per-round gradient of the agent's total score with respect to effort.

    Row t is c_t = theta_t' W + (sum of later theta rows)' W Omega: the direct
    score this round plus everything a unit of effort keeps earning later
    through carry-over.  Accepts unnormalized policies.
    """
    rules = policy.rules
    if rules.shape != (params.T, params.n):
        raise ValueError(
            f"dimension mismatch: policy is {rules.shape}, expected {(params.T, params.n)}"
        )
    WO = params.W * params.omega
    rev = np.cumsum(rules[::-1], axis=0)[::-1]
    suffix = np.vstack([rev[1:], np.zeros((1, params.n))])
    return rules @ params.W + suffix @ WO
