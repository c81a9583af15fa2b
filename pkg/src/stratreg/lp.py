"""Dense linear-program solver: two-phase revised simplex with exact duals.

Self-contained on purpose: downstream code reads optimal dual multipliers off
specific constraint rows, so the pivoting rules and the dual sign convention
must be fully deterministic and under our control.

Conventions for ``min c.x`` with per-row senses:
  * duals are marginal objective values per unit of rhs: y_i >= 0 on ``>=``
    rows, y_i <= 0 on ``<=`` rows, free on ``=`` rows;
  * Bland's anti-cycling rule is always on (entering: lowest eligible column
    index; leaving: lowest basic variable index among ratio ties);
  * rows and columns are equilibrated by their max-abs entry before solving
    and primal/dual values are mapped back afterwards.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LEQ",
    "GEQ",
    "EQ",
    "LpStatus",
    "LpProblem",
    "LpSolution",
    "NumericalFailure",
    "solve_lp",
    "FEAS_TOL",
]

LEQ = "<="
GEQ = ">="
EQ = "="
_SENSES = (LEQ, GEQ, EQ)

FEAS_TOL = 1e-8
_ENTER_TOL = 1e-9
_RATIO_TOL = 1e-10
_REFRESH_EVERY = 64


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class NumericalFailure(RuntimeError):
    """Iteration cap exceeded or the basis lost numerical control."""


@dataclass(frozen=True)
class LpProblem:
    """min c.x subject to A x (sense) b row-wise, lower <= x <= upper.

    ``lower`` defaults to zero and must be finite; ``upper`` is optional and
    may contain +inf.  Finite upper bounds are handled internally as extra
    rows; their multipliers are not part of the returned dual vector.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: tuple[str, ...]
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self) -> None:
        A = np.array(self.A, dtype=float)
        if A.ndim != 2 or A.size == 0:
            raise ValueError("A must be a non-empty 2-D matrix")
        m, k = A.shape
        c = np.array(self.c, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        if c.shape != (k,):
            raise ValueError(f"c must have length {k}")
        if b.shape != (m,):
            raise ValueError(f"b must have length {m}")
        senses = tuple(self.senses)
        if len(senses) != m or any(s not in _SENSES for s in senses):
            raise ValueError(f"senses must be {m} entries drawn from {_SENSES}")
        if not (np.isfinite(A).all() and np.isfinite(b).all() and np.isfinite(c).all()):
            raise ValueError("A, b, c must be finite")
        lower = np.zeros(k) if self.lower is None else np.array(self.lower, dtype=float).reshape(-1)
        if lower.shape != (k,) or not np.isfinite(lower).all():
            raise ValueError(f"lower must be {k} finite entries")
        upper = None
        if self.upper is not None:
            upper = np.array(self.upper, dtype=float).reshape(-1)
            if upper.shape != (k,):
                raise ValueError(f"upper must have length {k}")
            if (upper < lower).any():
                raise ValueError("upper bound below lower bound")
        for name, val in (("A", A), ("c", c), ("b", b), ("senses", senses), ("lower", lower), ("upper", upper)):
            if isinstance(val, np.ndarray):
                val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def nrows(self) -> int:
        return self.A.shape[0]

    @property
    def ncols(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class LpSolution:
    """Solver outcome; ``x``/``dual`` are None unless status is OPTIMAL."""

    status: LpStatus
    x: np.ndarray | None
    dual: np.ndarray | None
    objective_value: float


class _Workspace:
    """Mutable standard-form state shared by the two simplex phases."""

    __slots__ = ("A", "b", "basis", "Binv", "xB", "row_ids", "iters")

    def __init__(self, A, b, basis, row_ids):
        self.A = A
        self.b = b
        self.basis = basis
        self.Binv = np.eye(A.shape[0])
        self.xB = b.copy()
        self.row_ids = row_ids
        self.iters = 0

    def refactorize(self) -> None:
        Bmat = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(Bmat)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("basis matrix became singular") from exc
        self.xB = self.Binv @ self.b
        if (self.xB < -1e-6).any():
            raise NumericalFailure("basic solution drifted infeasible")
        np.clip(self.xB, 0.0, None, out=self.xB)

    def pivot(self, q: int, r: int, d: np.ndarray) -> None:
        piv = d[r]
        step = self.xB[r] / piv
        self.xB -= step * d
        self.xB[r] = step
        np.clip(self.xB, 0.0, None, out=self.xB)
        self.Binv[r] /= piv
        mask = np.arange(self.A.shape[0]) != r
        self.Binv[mask] -= np.outer(d[mask], self.Binv[r])
        self.basis[r] = q


def _run_simplex(ws: _Workspace, c: np.ndarray, allowed: np.ndarray, max_iter: int) -> LpStatus:
    """Iterate until optimal/unbounded under cost vector ``c``."""
    m, ncols = ws.A.shape
    while True:
        if ws.iters >= max_iter:
            raise NumericalFailure(f"iteration cap {max_iter} exceeded")
        if ws.iters and ws.iters % _REFRESH_EVERY == 0:
            ws.refactorize()
        y = c[ws.basis] @ ws.Binv
        reduced = c - y @ ws.A
        reduced[~allowed] = 0.0
        reduced[ws.basis] = 0.0
        candidates = np.flatnonzero(reduced < -_ENTER_TOL)
        if candidates.size == 0:
            return LpStatus.OPTIMAL
        q = int(candidates[0])  # Bland: lowest index enters
        d = ws.Binv @ ws.A[:, q]
        pos = np.flatnonzero(d > _RATIO_TOL)
        if pos.size == 0:
            return LpStatus.UNBOUNDED
        ratios = ws.xB[pos] / d[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * (1.0 + abs(best))]
        r = int(ties[np.argmin(ws.basis[ties])])  # Bland: lowest basic index leaves
        ws.pivot(q, r, d)
        ws.iters += 1


def solve_lp(problem: LpProblem, max_iter: int | None = None) -> LpSolution:
    """Solve ``problem`` to optimality, infeasibility, or unboundedness.

    Optimal solutions satisfy primal and dual feasibility, complementary
    slackness, and a duality gap at most 1e-8 * (1 + |objective|); these are
    exercised directly by the test suite.
    """
    m0, k = problem.nrows, problem.ncols
    if max_iter is None:
        max_iter = 50 * (m0 + k)
    lb = problem.lower
    A1 = problem.A
    b1 = problem.b - A1 @ lb
    senses = list(problem.senses)
    if problem.upper is not None:
        fin = np.flatnonzero(np.isfinite(problem.upper))
        if fin.size:
            extra = np.zeros((fin.size, k))
            extra[np.arange(fin.size), fin] = 1.0
            A1 = np.vstack([A1, extra])
            b1 = np.concatenate([b1, problem.upper[fin] - lb[fin]])
            senses += [LEQ] * fin.size
    m = A1.shape[0]

    # Equilibrate rows then columns by max-abs; remember factors to undo.
    rscale = np.abs(A1).max(axis=1)
    rscale[rscale == 0] = 1.0
    A2 = A1 / rscale[:, None]
    b2 = b1 / rscale
    colmax = np.abs(A2).max(axis=0)
    colmax[colmax == 0] = 1.0
    cscale = 1.0 / colmax
    A3 = A2 * cscale
    c3 = problem.c * cscale

    flip = np.where(b2 < 0, -1.0, 1.0)
    A4 = A3 * flip[:, None]
    b4 = b2 * flip
    flipped = []
    for i, s in enumerate(senses):
        if flip[i] < 0 and s != EQ:
            flipped.append(GEQ if s == LEQ else LEQ)
        else:
            flipped.append(s)

    # Assemble [structurals | slacks/surpluses | artificials].
    slack_cols: list[np.ndarray] = []
    basis = np.empty(m, dtype=int)
    needs_artificial = []
    for i, s in enumerate(flipped):
        if s == EQ:
            needs_artificial.append(i)
            continue
        col = np.zeros(m)
        col[i] = 1.0 if s == LEQ else -1.0
        slack_cols.append(col)
        if s == LEQ:
            basis[i] = k + len(slack_cols) - 1
        else:
            needs_artificial.append(i)
    nslack = len(slack_cols)
    nart = len(needs_artificial)
    art_cols = np.zeros((m, nart))
    for pos, i in enumerate(needs_artificial):
        art_cols[i, pos] = 1.0
        basis[i] = k + nslack + pos
    blocks = [A4]
    if nslack:
        blocks.append(np.column_stack(slack_cols))
    if nart:
        blocks.append(art_cols)
    A_std = np.hstack(blocks)
    ncols = A_std.shape[1]
    structural = k + nslack

    ws = _Workspace(A_std, b4.copy(), basis, row_ids=np.arange(m))
    c_phase1 = np.zeros(ncols)
    c_phase1[structural:] = 1.0
    allowed_all = np.ones(ncols, dtype=bool)
    status = _run_simplex(ws, c_phase1, allowed_all, max_iter)
    if status is not LpStatus.OPTIMAL:  # phase 1 is bounded below by zero
        raise NumericalFailure("phase 1 terminated abnormally")
    infeas = float(c_phase1[ws.basis] @ ws.xB)
    if infeas > FEAS_TOL * (1.0 + float(np.abs(b4).max())):
        return LpSolution(LpStatus.INFEASIBLE, None, None, float("nan"))

    _drive_out_artificials(ws, structural)

    c_phase2 = np.zeros(ws.A.shape[1])
    c_phase2[:k] = c3
    allowed = np.zeros(ws.A.shape[1], dtype=bool)
    allowed[:structural] = True
    status = _run_simplex(ws, c_phase2, allowed, max_iter)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(LpStatus.UNBOUNDED, None, None, float("nan"))

    ws.refactorize()
    Bmat = ws.A[:, ws.basis]
    try:
        xB = np.linalg.solve(Bmat, ws.b)
        y_hat = np.linalg.solve(Bmat.T, c_phase2[ws.basis])
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("final basis is singular") from exc
    np.clip(xB, 0.0, None, out=xB)
    x_std = np.zeros(ws.A.shape[1])
    x_std[ws.basis] = xB
    x = cscale * x_std[:k] + lb

    dual = np.zeros(m)
    dual[ws.row_ids] = y_hat * flip[ws.row_ids] / rscale[ws.row_ids]
    objective = float(problem.c @ x)
    out_x = x.copy()
    out_dual = dual[:m0].copy()
    out_x.setflags(write=False)
    out_dual.setflags(write=False)
    return LpSolution(LpStatus.OPTIMAL, out_x, out_dual, objective)


def _drive_out_artificials(ws: _Workspace, structural: int) -> None:
    """Pivot zero-level artificials out of the basis, dropping redundant rows."""
    drop_rows: list[int] = []
    for r in range(ws.A.shape[0]):
        if ws.basis[r] < structural:
            continue
        in_basis = np.zeros(ws.A.shape[1], dtype=bool)
        in_basis[ws.basis] = True
        row = ws.Binv[r] @ ws.A[:, :structural]
        row[in_basis[:structural]] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-7)
        if cand.size:
            q = int(cand[0])
            d = ws.Binv @ ws.A[:, q]
            ws.pivot(q, r, d)
        else:
            drop_rows.append(r)
    if not drop_rows:
        return
    keep = np.setdiff1d(np.arange(ws.A.shape[0]), drop_rows)
    ws.A = ws.A[keep]
    ws.b = ws.b[keep]
    ws.basis = ws.basis[keep]
    ws.row_ids = ws.row_ids[keep]
    ws.refactorize()
