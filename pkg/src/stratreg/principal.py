"""Principal-side solvers: pick the assessment policy maximizing total effort value.

The fixed-budget problem is an optimization of a linear objective over the
convex set of incentivizable effort policies, accessed only through the
membership test.  The solver is simulated annealing with hit-and-run sampling
over that set: every incentivizable policy spends the full budget each round,
so each round is parameterized by its first d-1 coordinates and the walk
lives in the T*(d-1)-dimensional affine hull.  The quadratic-cost problem has
a closed-form optimal policy.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .agent import GuardExceeded, GRID_GUARD, best_response_fixed_budget, best_response_quadratic
from .core import (
    AssessmentPolicy,
    CostModel,
    EffortPolicy,
    GameParams,
)
from .incentives import MembershipOracle, RecoveredAssessment, recover_assessment

__all__ = [
    "AnnealConfig",
    "Diagnostics",
    "MembershipOracleFailure",
    "OuterRadius",
    "QuadraticSolution",
    "SolveMethod",
    "SolveResult",
    "initial_point",
    "outer_radius",
    "simplex_grid",
    "solve_fixed_budget_anneal",
    "solve_fixed_budget_grid",
    "solve_quadratic",
]

logger = logging.getLogger(__name__)

_BISECT_STEPS = 12


class MembershipOracleFailure(RuntimeError):
    """The membership test failed inside the annealing loop."""


class SolveMethod(enum.Enum):
    ANNEAL = "anneal"
    GRID = "grid"
    QUADRATIC = "quadratic"


@dataclass(frozen=True)
class AnnealConfig:
    """Annealing knobs.

    ``epsilon``/``delta`` are the target optimality gap and failure
    probability; together with ``r`` (an asserted inscribed-ball radius at
    the starting point, not verified by the solver) they set the cooling
    phase count ceil(sqrt(N) * ln(R N / (r eps delta))) for N = T*(d-1).
    ``walk_steps`` mixing steps plus ``samples_per_phase`` recorded steps are
    taken per phase; both default to small multiples of N sized for desk
    runs.  ``radius_override`` replaces the safe outer radius bound.
    """

    epsilon: float = 0.05
    delta: float = 0.2
    seed: int = 0
    r: float = 1e-3
    samples_per_phase: int | None = None
    walk_steps: int | None = None
    radius_override: float | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if self.r <= 0.0:
            raise ValueError("r must be positive")
        for field in ("samples_per_phase", "walk_steps"):
            val = getattr(self, field)
            if val is not None and val < 1:
                raise ValueError(f"{field} must be positive when given")


@dataclass(frozen=True)
class Diagnostics:
    phases: int = 0
    oracle_calls: int = 0
    policies_scanned: int = 0
    no_progress: bool = False


@dataclass(frozen=True)
class SolveResult:
    """Best effort policy found, its dual certificate, and the run record."""

    efforts: EffortPolicy
    assessment: RecoveredAssessment
    value: float
    method: SolveMethod
    diagnostics: Diagnostics


@dataclass(frozen=True)
class OuterRadius:
    """Radius of a ball around the product of round-simplex centroids.

    ``safe`` = sqrt(T (d-1) / d) always covers the full-budget affine hull
    (centroid-to-vertex distance of one round simplex, times sqrt(T)).
    ``reference`` = sqrt(T (d-1) / (2 (T (d-1) + 1))) is a smaller published
    constant reported for comparison; it is below the covering radius
    whenever d > 1, so the solver uses ``safe``.
    """

    safe: float
    reference: float


def outer_radius(T: int, d: int) -> OuterRadius:
    N = T * (d - 1)
    safe = math.sqrt(T * (d - 1) / d) if d > 0 else 0.0
    reference = math.sqrt(N / (2.0 * (N + 1))) if N > 0 else 0.0
    return OuterRadius(safe=safe, reference=reference)


def initial_point(params: GameParams, seed_policy: AssessmentPolicy) -> EffortPolicy:
    """An incentivizable starting point: the best response to ``seed_policy``."""
    return best_response_fixed_budget(params, seed_policy).efforts


def _candidate_efforts(params: GameParams, rng: np.random.Generator, extra: int = 3) -> list[np.ndarray]:
    """Incentivizable seeds: best responses to a small portfolio of policies.

    Tie-broken best responses sit at vertices of the round simplices where
    hit-and-run chords collapse, so the walk starts from their average (still
    incentivizable, by convexity) while the vertices themselves stay in the
    running as value candidates.
    """
    T, n = params.T, params.n
    policies = [AssessmentPolicy.uniform(T, n)]
    policies += [AssessmentPolicy.single_feature(T, n, m) for m in range(n)]
    policies += [AssessmentPolicy(rng.dirichlet(np.ones(n), size=T)) for _ in range(extra)]
    return [best_response_fixed_budget(params, p).efforts.efforts for p in policies]


def _principal_value(params: GameParams, efforts: np.ndarray) -> float:
    return float(np.abs(params.lam * efforts.sum(axis=0)).sum())


def _expand(x: np.ndarray, T: int, d: int) -> np.ndarray:
    X = x.reshape(T, d - 1)
    last = 1.0 - X.sum(axis=1, keepdims=True)
    return np.concatenate([X, last], axis=1)


def _polytope_chord(x: np.ndarray, u: np.ndarray, T: int, d: int) -> tuple[float, float]:
    """Exact parameter interval keeping every reconstructed coordinate >= 0."""
    X = x.reshape(T, d - 1)
    U = u.reshape(T, d - 1)
    vals = np.concatenate([X.reshape(-1), 1.0 - X.sum(axis=1)])
    slopes = np.concatenate([U.reshape(-1), -U.sum(axis=1)])
    lo, hi = -np.inf, np.inf
    pos = slopes > 1e-14
    neg = slopes < -1e-14
    if pos.any():
        lo = float((-vals[pos] / slopes[pos]).max())
    if neg.any():
        hi = float((vals[neg] / -slopes[neg]).min())
    lo = min(lo, 0.0)
    hi = max(hi, 0.0)
    return lo, hi


def solve_fixed_budget_anneal(params: GameParams, cfg: AnnealConfig | None = None) -> SolveResult:
    """Simulated annealing over the incentivizable set via hit-and-run.

    Cooling schedule tau_i = R (1 - 1/sqrt(N))^i.  The walk starts from the
    average of best responses to a portfolio of seed policies; the portfolio
    members themselves stay in the running as value candidates, so the result
    is never worse than the best seed.  Each step draws a random direction,
    clips it exactly against the nonnegativity polytope, certifies the
    incentivizable part of the chord by 12-step bisection on the membership
    test, then samples from the exponential restriction of the target density
    along the chord.  Every accepted point is re-checked by the oracle, and
    ``no_progress`` reports a walk that never moved (the incentivizable set
    can have empty interior, in which case chords carry no certified length).
    """
    if params.cost_model is not CostModel.FIXED_BUDGET:
        raise ValueError("annealing applies to the fixed budget cost model")
    cfg = cfg or AnnealConfig()
    T, d, n = params.T, params.d, params.n
    rng = np.random.default_rng(cfg.seed)
    candidates = _candidate_efforts(params, rng)

    if d == 1:
        start = EffortPolicy(candidates[0])
        assessment = recover_assessment(params, start)
        return SolveResult(
            efforts=start,
            assessment=assessment,
            value=_principal_value(params, start.efforts),
            method=SolveMethod.ANNEAL,
            diagnostics=Diagnostics(phases=0, oracle_calls=0),
        )

    N = T * (d - 1)
    radius = cfg.radius_override if cfg.radius_override is not None else outer_radius(T, d).safe
    if radius <= cfg.r:
        raise ValueError("outer radius must exceed the inscribed radius r")
    phases = max(1, math.ceil(math.sqrt(N) * math.log(radius * N / (cfg.r * cfg.epsilon * cfg.delta))))
    shrink = 1.0 - 1.0 / math.sqrt(N) if N >= 2 else 0.5
    samples = cfg.samples_per_phase if cfg.samples_per_phase is not None else max(4, N)
    mixing = cfg.walk_steps if cfg.walk_steps is not None else max(8, 2 * N)

    oracle = MembershipOracle(params)
    calls = 0

    def is_member(x: np.ndarray) -> bool:
        nonlocal calls
        calls += 1
        E = np.maximum(_expand(x, T, d), 0.0)
        try:
            return oracle.check(EffortPolicy(E)).incentivizable
        except Exception as exc:  # pragma: no cover - numerical escape hatch
            raise MembershipOracleFailure(str(exc)) from exc

    # Linear objective in reduced coordinates: f = base + g.x, minimized.
    lam = params.lam
    base = -T * lam[d - 1]
    g = np.tile(lam[d - 1] - lam[: d - 1], T)

    def value_of(x: np.ndarray) -> float:
        return base + float(g @ x)

    reduced = [E[:, : d - 1].reshape(-1) for E in candidates]
    cand_f = [value_of(xc) for xc in reduced]
    best = int(np.argmin(cand_f))
    best_x = reduced[best].copy()
    best_f = cand_f[best]
    # Walk from the candidate average, an interior point of their hull.  The
    # incentivizable set need not be convex, so back the average off toward
    # the best candidate until the oracle accepts it.
    x = np.mean(reduced, axis=0)
    for _ in range(6):
        if is_member(x):
            break
        x = 0.5 * (x + best_x)
    else:
        x = best_x.copy()
    moved = 0.0

    for i in range(phases):
        tau = radius * shrink**i
        for _ in range(mixing + samples):
            u = rng.standard_normal(N)
            norm = float(np.linalg.norm(u))
            if norm < 1e-14:
                continue
            u /= norm
            lo, hi = _polytope_chord(x, u, T, d)
            hi_in = _certify(is_member, x, u, hi)
            lo_in = _certify(is_member, x, u, lo)
            if hi_in - lo_in < 1e-14:
                continue
            lam_step = _sample_exponential(rng, lo_in, hi_in, float(g @ u) / tau)
            cand = x + lam_step * u
            if abs(lam_step) < 1e-14:
                continue
            if not is_member(cand):
                continue  # tolerance edge: stay on the certified chain
            x = cand
            moved += abs(lam_step)
            fx = value_of(x)
            if fx < best_f - 1e-15:
                best_f = fx
                best_x = x.copy()

    best_eff = EffortPolicy(np.maximum(_expand(best_x, T, d), 0.0))
    verdict = oracle.check(best_eff)
    if not verdict.incentivizable:
        raise MembershipOracleFailure("annealing result failed its final membership check")
    assessment = recover_assessment(params, best_eff)
    diag = Diagnostics(phases=phases, oracle_calls=calls, no_progress=moved < 1e-9)
    if diag.no_progress:
        logger.warning("annealing walk never moved; returning the starting point")
    return SolveResult(
        efforts=best_eff,
        assessment=assessment,
        value=_principal_value(params, best_eff.efforts),
        method=SolveMethod.ANNEAL,
        diagnostics=diag,
    )


def _certify(is_member, x: np.ndarray, u: np.ndarray, end: float) -> float:
    """Largest |t| toward ``end`` with x + t u certified inside, via bisection."""
    if abs(end) < 1e-14:
        return 0.0
    if is_member(x + end * u):
        return end
    inside, outside = 0.0, end
    for _ in range(_BISECT_STEPS):
        mid = 0.5 * (inside + outside)
        if is_member(x + mid * u):
            inside = mid
        else:
            outside = mid
    return inside


def _sample_exponential(rng: np.random.Generator, a: float, b: float, kappa: float) -> float:
    """Sample from density proportional to exp(-kappa * t) on [a, b]."""
    width = b - a
    if abs(kappa) * width < 1e-12:
        return float(rng.uniform(a, b))
    alpha, beta = -kappa * a, -kappa * b
    m = max(alpha, beta)
    pa, pb = math.exp(alpha - m), math.exp(beta - m)
    v = pa + rng.uniform() * (pb - pa)
    return -(math.log(v) + m) / kappa


def simplex_grid(n: int, grid_k: int) -> np.ndarray:
    """All weight vectors with entries i/grid_k summing to one, lexicographic."""
    if n < 1:
        raise ValueError("simplex grid needs at least one coordinate")
    if grid_k < 1:
        raise ValueError("grid resolution must be a positive integer")
    points: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], left: int) -> None:
        if len(prefix) == n - 1:
            points.append(prefix + (left,))
            return
        for v in range(left + 1):
            rec(prefix + (v,), left - v)

    rec((), grid_k)
    return np.array(points, dtype=float) / grid_k


def solve_fixed_budget_grid(params: GameParams, grid_k: int) -> SolveResult:
    """Exhaustive baseline over per-round assessment grids of step 1/grid_k.

    Enumerates every combination of grid weight vectors across rounds (guarded
    at ``GRID_GUARD`` policies), plays the principal-favorable best response,
    and keeps the first maximizer in lexicographic order.
    """
    if params.cost_model is not CostModel.FIXED_BUDGET:
        raise ValueError("the grid baseline applies to the fixed budget cost model")
    T, n, d = params.T, params.n, params.d
    grid = simplex_grid(n, grid_k)
    G = len(grid)
    if G**T > GRID_GUARD:
        raise GuardExceeded(f"{G}^{T} assessment policies exceed guard {GRID_GUARD}")
    W = params.W
    WO = W * params.omega
    lam = params.lam
    grid_direct = grid @ W  # (G, d)
    grid_carry = grid @ WO  # (G, d)

    best_value = -np.inf
    best_idx: tuple[int, ...] | None = None
    idx = [0] * T
    while True:
        suffix = np.zeros(d)
        value = 0.0
        for t in range(T - 1, -1, -1):
            c = grid_direct[idx[t]] + suffix
            top = c.max()
            ties = np.flatnonzero(c >= top - 1e-9)
            pick = int(ties[np.argmax(lam[ties])])
            value += lam[pick]
            suffix = suffix + grid_carry[idx[t]]
        if value > best_value + 1e-12:
            best_value = value
            best_idx = tuple(idx)
        # odometer over per-round policy indices, last round cycles fastest
        for pos in range(T - 1, -1, -1):
            idx[pos] += 1
            if idx[pos] < G:
                break
            idx[pos] = 0
        else:
            break

    assert best_idx is not None
    rules = grid[list(best_idx)]
    response = best_response_fixed_budget(params, AssessmentPolicy(rules))
    assessment = recover_assessment(params, response.efforts)
    return SolveResult(
        efforts=response.efforts,
        assessment=assessment,
        value=_principal_value(params, response.efforts.efforts),
        method=SolveMethod.GRID,
        diagnostics=Diagnostics(policies_scanned=G**T),
    )


@dataclass(frozen=True)
class QuadraticSolution:
    policy: AssessmentPolicy
    efforts: EffortPolicy
    value: float


def solve_quadratic(params: GameParams) -> QuadraticSolution:
    """Optimal assessment policy under quadratic effort costs, in closed form.

    The principal's payoff from pointing round t at feature k is the k-th
    entry of lam' (I + (t-1) Omega) W', so each round independently picks the
    argmax feature (lowest index on ties) and the agent responds with the
    coefficient vectors themselves.
    """
    if params.cost_model is not CostModel.QUADRATIC:
        raise ValueError("closed-form solve applies to the quadratic cost model")
    T = params.T
    rounds = 1.0 + np.arange(T)[:, None] * params.omega  # (T, d): diag of I + (t-1) Omega
    scores = (params.lam * rounds) @ params.W.T  # (T, n)
    picks = np.argmax(scores, axis=1)
    rules = np.zeros((T, params.n))
    rules[np.arange(T), picks] = 1.0
    policy = AssessmentPolicy(rules)
    efforts = best_response_quadratic(params, policy)
    return QuadraticSolution(
        policy=policy,
        efforts=efforts,
        value=_principal_value(params, efforts.efforts),
    )
