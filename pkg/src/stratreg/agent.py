"""Agent best responses to an announced assessment policy.

Under the fixed budget the agent's total score is linear in each round's
effort with per-round coefficient vectors from
:func:`stratreg.core.coefficient_vectors`, so a best response concentrates
the whole budget on a maximal coefficient.  Under the quadratic cost the
problem is separable and strictly concave with a closed-form maximizer.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from .core import (
    AssessmentPolicy,
    CostModel,
    EffortPolicy,
    GameParams,
    coefficient_vectors,
)

__all__ = [
    "TIE_TOL",
    "GRID_GUARD",
    "BestResponse",
    "GuardExceeded",
    "best_response_fixed_budget",
    "best_response_quadratic",
    "agent_brute_force_oracle",
]

logger = logging.getLogger(__name__)

TIE_TOL = 1e-9
GRID_GUARD = 10_000_000


class GuardExceeded(ValueError):
    """Requested enumeration exceeds the hard size guard."""


@dataclass(frozen=True)
class BestResponse:
    """A maximizing effort policy plus the per-round argmax structure.

    ``tie_sets[t]`` lists every action whose round-t coefficient is within
    ``TIE_TOL`` of the maximum; ``is_unique[t]`` says the set is a singleton.
    """

    efforts: EffortPolicy
    tie_sets: tuple[tuple[int, ...], ...]
    is_unique: tuple[bool, ...]


def _require_model(params: GameParams, model: CostModel) -> None:
    if params.cost_model is not model:
        raise ValueError(f"cost model must be {model.value}, got {params.cost_model.value}")


def best_response_fixed_budget(
    params: GameParams, policy: AssessmentPolicy, tie_tol: float = TIE_TOL
) -> BestResponse:
    """Budget-one best response, breaking coefficient ties in the principal's favor.

    Among tied actions the one with the largest ``lam`` weight wins, then the
    lowest index, which makes the selection deterministic and lets horizon
    arguments place the full budget on the action the principal prefers.
    """
    _require_model(params, CostModel.FIXED_BUDGET)
    C = coefficient_vectors(params, policy)
    T, d = C.shape
    eff = np.zeros((T, d))
    tie_sets: list[tuple[int, ...]] = []
    unique: list[bool] = []
    for t in range(T):
        top = C[t].max()
        ties = np.flatnonzero(C[t] >= top - tie_tol)
        pick = int(ties[np.argmax(params.lam[ties])])
        eff[t, pick] = 1.0
        tie_sets.append(tuple(int(j) for j in ties))
        unique.append(ties.size == 1)
    return BestResponse(EffortPolicy(eff), tuple(tie_sets), tuple(unique))


def best_response_quadratic(params: GameParams, policy: AssessmentPolicy) -> EffortPolicy:
    """Closed-form maximizer of score minus half the squared effort norm.

    The optimum equals the per-round coefficient vectors; nonnegativity only
    binds if the policy carries negative weights, in which case clamping is
    applied and reported through a warning.
    """
    _require_model(params, CostModel.QUADRATIC)
    C = coefficient_vectors(params, policy)
    if (C < -1e-12).any():
        logger.warning("quadratic best response clamped %d negative coordinates", int((C < -1e-12).sum()))
    return EffortPolicy(np.maximum(C, 0.0))


def _batch_utilities(params: GameParams, policy: AssessmentPolicy, batch: np.ndarray) -> np.ndarray:
    """Agent utility for a (B, T, d) stack of effort policies."""
    omega = params.omega
    carried = np.concatenate(
        [np.zeros((batch.shape[0], 1, params.d)), np.cumsum(batch[:, :-1] * omega, axis=1)],
        axis=1,
    )
    states = params.s0 + carried
    obs = (states + batch) @ params.W.T + params.feature_offset
    utils = np.einsum("btn,tn->b", obs, policy.rules)
    if params.cost_model is CostModel.QUADRATIC:
        utils = utils - 0.5 * (batch**2).sum(axis=(1, 2))
    return utils


def _budget_grid(d: int, grid_k: int) -> np.ndarray:
    """All effort vectors with entries i/grid_k summing to at most one."""
    points = []
    for combo in itertools.product(range(grid_k + 1), repeat=d):
        if sum(combo) <= grid_k:
            points.append(combo)
    return np.array(points, dtype=float) / grid_k


def agent_brute_force_oracle(
    params: GameParams, policy: AssessmentPolicy, grid_k: int
) -> EffortPolicy:
    """Grid search over effort policies; slow reference for testing.

    Fixed budget: per-round simplex grids of resolution 1/grid_k including
    interior points.  Quadratic: per-coordinate grids over [0, box] where the
    box generously bounds any maximizer.  Raises :class:`GuardExceeded` when
    the enumeration would exceed ``GRID_GUARD`` policies.
    """
    T, d = params.T, params.d
    if params.cost_model is CostModel.FIXED_BUDGET:
        rounds = _budget_grid(d, grid_k)
        if len(rounds) ** T > GRID_GUARD:
            raise GuardExceeded(f"{len(rounds)}^{T} effort policies exceed guard {GRID_GUARD}")
        axes = [rounds] * T
    else:
        theta_mass = float(np.abs(policy.rules).sum(axis=1).max())
        box = (1.0 + (T - 1) * float(params.omega.max())) * theta_mass * float(params.W.max()) + 1.0
        line = np.linspace(0.0, box, grid_k + 1)
        if (grid_k + 1) ** (T * d) > GRID_GUARD:
            raise GuardExceeded(f"(grid_k+1)^(T*d) exceeds guard {GRID_GUARD}")
        coords = np.array(list(itertools.product(line, repeat=d)))
        axes = [coords] * T
    best_u = -np.inf
    best_pol: np.ndarray | None = None
    chunk: list[np.ndarray] = []
    chunk_size = 200_000 // max(1, T * d)

    def flush() -> None:
        nonlocal best_u, best_pol
        if not chunk:
            return
        batch = np.stack(chunk)
        utils = _batch_utilities(params, policy, batch)
        i = int(np.argmax(utils))
        if utils[i] > best_u + 1e-15:
            best_u = float(utils[i])
            best_pol = batch[i].copy()
        chunk.clear()

    for combo in itertools.product(*axes):
        chunk.append(np.stack(combo))
        if len(chunk) >= chunk_size:
            flush()
    flush()
    assert best_pol is not None
    return EffortPolicy(best_pol)
