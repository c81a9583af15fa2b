"""Figure datasets: effort regions, carry-over sweeps, and worked trajectories.

Each builder returns a :class:`FigureDataset` with fixed headers and rows
sorted for byte-stable CSV output under a fixed seed.  Rendering to PNG is
optional and goes through a headless backend.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .agent import best_response_fixed_budget
from .bounds import InfeasibleCarryOver, implementability_horizon
from .core import AssessmentPolicy, CostModel, EffortPolicy, GameParams, simulate_trajectory
from .incentives import MembershipOracle
from .principal import simplex_grid

__all__ = [
    "FigureDataset",
    "regions_dataset",
    "omega_sweep_dataset",
    "classroom_dataset",
    "write_csv",
    "render_png",
]

_GRID_RESOLUTION = 20
_RANDOM_POLICIES = 120


@dataclass(frozen=True)
class FigureDataset:
    kind: str
    headers: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]


def _format_cell(value) -> str:
    # flags and counters as integers, everything else at 12 significant digits
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def write_csv(dataset: FigureDataset, path: str | Path) -> Path:
    p = Path(path)
    with p.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(dataset.headers)
        for row in dataset.rows:
            writer.writerow([_format_cell(v) for v in row])
    return p


def regions_dataset(
    params: GameParams,
    horizons: tuple[int, ...] = (1, 2, 3, 4, 5),
    *,
    grid_resolution: int = _GRID_RESOLUTION,
    n_random: int = _RANDOM_POLICIES,
    seed: int = 0,
) -> FigureDataset:
    """Average study/cheat split of best responses across sampled policies.

    For every horizon, assessment policies are drawn from a simplex grid:
    the full constant-policy family plus ``n_random`` seeded per-round
    combinations.  Each row records the per-round average effort on
    preference-weighted actions ("study"), on the remaining actions
    ("cheat"), and whether the constant policy at that average effort is
    itself incentivizable.
    """
    if params.cost_model is CostModel.QUADRATIC:
        raise ValueError("effort regions are defined for the fixed-budget cost model")
    study_mask = params.lam > 0
    grid = simplex_grid(params.n, grid_resolution)
    rows: set[tuple] = set()
    for T in horizons:
        if T < 1:
            raise ValueError(f"horizons must be >= 1, got {T}")
        params_T = replace(params, T=int(T))
        oracle = MembershipOracle(params_T)
        rng = np.random.default_rng([seed, int(T)])
        policies = [np.tile(theta, (T, 1)) for theta in grid]
        picks = rng.integers(0, len(grid), size=(n_random, T))
        policies.extend(np.asarray([grid[i] for i in row]) for row in picks)
        for rules in policies:
            br = best_response_fixed_budget(params_T, AssessmentPolicy(rules))
            avg = br.efforts.efforts.mean(axis=0)
            avg_study = float(avg[study_mask].sum())
            avg_cheat = float(avg[~study_mask].sum())
            verdict = oracle.check(EffortPolicy(np.tile(avg, (T, 1))))
            rows.add((int(T), avg_study, avg_cheat, bool(verdict.incentivizable)))
    ordered = tuple(sorted(rows))
    return FigureDataset(
        kind="regions",
        headers=("T", "avg_study", "avg_cheat_total", "incentivizable"),
        rows=ordered,
    )


def omega_sweep_dataset(
    params: GameParams,
    action: int,
    t: int = 1,
    omegas: tuple[float, ...] = tuple(round(0.1 * k, 10) for k in range(1, 11)),
) -> FigureDataset:
    """Rounds beyond ``t`` needed to implement ``action``, per carry-over level.

    The gap column holds ``horizon - t``; an infeasible carry-over level is
    recorded as -1.
    """
    rows = []
    for omega_s in omegas:
        new_omega = np.array(params.omega, dtype=float)
        new_omega[action] = float(omega_s)
        swept = replace(params, omega=new_omega)
        try:
            bound = implementability_horizon(swept, action, t)
            gap = bound.horizon - t if bound.feasible else -1
        except InfeasibleCarryOver:
            gap = -1
        rows.append((float(omega_s), int(gap)))
    return FigureDataset(kind="omega_sweep", headers=("omega_s", "gap"), rows=tuple(rows))


def classroom_dataset(params: GameParams, policy: AssessmentPolicy | None = None) -> FigureDataset:
    """Per-round best-response trajectory table under ``policy`` (uniform default)."""
    if policy is None:
        policy = AssessmentPolicy.uniform(params.T, params.n)
    if params.cost_model is CostModel.QUADRATIC:
        from .agent import best_response_quadratic

        efforts = best_response_quadratic(params, policy)
    else:
        efforts = best_response_fixed_budget(params, policy).efforts
    traj = simulate_trajectory(params, policy, efforts)
    headers = (
        ("round",)
        + tuple(f"theta_{f}" for f in params.feature_names)
        + tuple(f"effort_{a}" for a in params.action_names)
        + tuple(f"obs_{f}" for f in params.feature_names)
        + ("score",)
    )
    rows = []
    for i in range(params.T):
        rows.append(
            (i + 1,)
            + tuple(float(v) for v in policy.rules[i])
            + tuple(float(v) for v in efforts.efforts[i])
            + tuple(float(v) for v in traj.observables[i])
            + (float(traj.scores[i]),)
        )
    return FigureDataset(kind="classroom", headers=headers, rows=tuple(rows))


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_png(dataset: FigureDataset, path: str | Path) -> Path:
    """Render a dataset to a PNG next to its CSV; dispatch is on the kind."""
    plt = _pyplot()
    p = Path(path)
    if dataset.kind == "regions":
        data = np.asarray(dataset.rows, dtype=float)
        horizons = sorted(set(int(v) for v in data[:, 0]))
        fig, axes = plt.subplots(1, len(horizons), figsize=(3 * len(horizons), 3), sharey=True)
        axes = np.atleast_1d(axes)
        for ax, T in zip(axes, horizons):
            sub = data[data[:, 0] == T]
            inc = sub[:, 3] > 0.5
            ax.scatter(sub[inc, 2], sub[inc, 1], s=12, c="tab:green", label="incentivizable")
            ax.scatter(sub[~inc, 2], sub[~inc, 1], s=12, c="tab:red", label="not")
            ax.set_title(f"T={T}")
            ax.set_xlabel("avg cheat")
        axes[0].set_ylabel("avg study")
        axes[0].legend(loc="upper right", fontsize=7)
    elif dataset.kind == "omega_sweep":
        data = np.asarray(dataset.rows, dtype=float)
        fig, ax = plt.subplots(figsize=(4, 3))
        ax.plot(data[:, 0], data[:, 1], marker="o")
        ax.set_xlabel("carry-over")
        ax.set_ylabel("extra rounds needed")
    elif dataset.kind == "classroom":
        data = np.asarray(dataset.rows, dtype=float)
        n_eff = len([h for h in dataset.headers if h.startswith("effort_")])
        start = 1 + len([h for h in dataset.headers if h.startswith("theta_")])
        fig, ax = plt.subplots(figsize=(4, 3))
        bottom = np.zeros(len(data))
        for j in range(n_eff):
            ax.bar(data[:, 0], data[:, start + j], bottom=bottom, label=dataset.headers[start + j])
            bottom += data[:, start + j]
        ax.plot(data[:, 0], data[:, -1], color="black", marker="o", label="score")
        ax.set_xlabel("round")
        ax.legend(fontsize=7)
    else:
        raise ValueError(f"unknown dataset kind {dataset.kind!r}")
    fig.tight_layout()
    fig.savefig(p, dpi=120)
    plt.close(fig)
    return p
