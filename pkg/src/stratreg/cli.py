"""Command line front end.

Verbs: validate, best-response, membership, recover, solve,
bounds implementability, bounds effort-level, figures.

Exit codes: 0 success, 2 input or validation error, 3 solver failure.
``STRAT_SEED`` overrides any ``--seed`` flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .agent import best_response_fixed_budget, best_response_quadratic
from .bounds import InfeasibleCarryOver, effort_level_horizon, implementability_horizon
from .core import AssessmentPolicy, CostModel, EffortPolicy, simulate_trajectory
from .figures import (
    FigureDataset,
    classroom_dataset,
    omega_sweep_dataset,
    regions_dataset,
    render_png,
    write_csv,
)
from .incentives import membership, recover_assessment
from .principal import (
    AnnealConfig,
    solve_fixed_budget_anneal,
    solve_fixed_budget_grid,
    solve_quadratic,
)
from .scenario import (
    ParseError,
    Scenario,
    SolverSettings,
    ValidationError,
    bundled_scenario_path,
    parse_scenario,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3


def _fmt(value: float) -> str:
    return f"{float(value):.12g}"


def _load_scenario(ref: str) -> Scenario:
    path = Path(ref)
    if path.exists():
        return parse_scenario(path)
    return parse_scenario(bundled_scenario_path(ref))


def _load_array(path: str, key: str, shape: tuple[int, int], what: str) -> np.ndarray:
    """Read a JSON file holding either {"<key>": rows} or a bare array of rows."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path} (line {exc.lineno}): {exc.msg}") from exc
    if isinstance(raw, dict):
        unknown = set(raw) - {key}
        if unknown:
            raise ParseError("unknown field", field=sorted(unknown)[0])
        if key not in raw:
            raise ParseError("missing required field", field=key)
        raw = raw[key]
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what} must be a rectangular array of numbers: {exc}") from exc
    if arr.shape != shape:
        raise ParseError(f"{what} must have shape {shape}, got {arr.shape}")
    return arr


def _policy_arg(scn: Scenario, path: str | None) -> AssessmentPolicy:
    params = scn.params
    if path is None:
        return AssessmentPolicy.uniform(params.T, params.n)
    return AssessmentPolicy(_load_array(path, "rules", (params.T, params.n), "policy rules"))


def _efforts_arg(scn: Scenario, path: str) -> EffortPolicy:
    params = scn.params
    return EffortPolicy(_load_array(path, "efforts", (params.T, params.d), "efforts"))


def _action_index(scn: Scenario, text: str) -> int:
    names = scn.params.action_names
    if text in names:
        return names.index(text)
    try:
        idx = int(text)
    except ValueError:
        raise ParseError(f"unknown action {text!r}; expected one of {', '.join(names)} or an index") from None
    if not 0 <= idx < len(names):
        raise ParseError(f"action index {idx} out of range [0, {len(names)})")
    return idx


def _seed_arg(cli_seed: int | None, fallback: int | None) -> int:
    env = os.environ.get("STRAT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ParseError(f"STRAT_SEED must be an integer, got {env!r}") from None
    if cli_seed is not None:
        return cli_seed
    return fallback if fallback is not None else 0


def _print_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    print("  ".join(h.rjust(w) for h, w in zip(headers, widths)))
    for row in rows:
        print("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))


def _round_table(params, policy: AssessmentPolicy, efforts: EffortPolicy, scores) -> None:
    headers = ["round"]
    headers += [f"theta_{f}" for f in params.feature_names]
    headers += [f"effort_{a}" for a in params.action_names]
    headers += ["score"]
    rows = []
    for i in range(params.T):
        row = [str(i + 1)]
        row += [f"{v:.6g}" for v in policy.rules[i]]
        row += [f"{v:.6g}" for v in efforts.efforts[i]]
        row += [f"{scores[i]:.6g}"]
        rows.append(row)
    _print_table(headers, rows)


def cmd_validate(args) -> int:
    scn = _load_scenario(args.scenario)
    params = scn.params
    print(
        f"ok: {scn.name}: T={params.T}, {params.n} features, {params.d} actions, "
        f"{params.cost_model.value} cost model"
    )
    return EXIT_OK


def cmd_best_response(args) -> int:
    scn = _load_scenario(args.scenario)
    params = scn.params
    policy = _policy_arg(scn, args.policy)
    if params.cost_model is CostModel.QUADRATIC:
        efforts = best_response_quadratic(params, policy)
        ties = None
    else:
        br = best_response_fixed_budget(params, policy)
        efforts, ties = br.efforts, br
    traj = simulate_trajectory(params, policy, efforts)
    _round_table(params, policy, efforts, traj.scores)
    print(f"agent utility    {_fmt(traj.agent_utility)}")
    print(f"principal value  {_fmt(traj.principal_utility)}")
    if ties is not None:
        for i, (tie, unique) in enumerate(zip(ties.tie_sets, ties.is_unique)):
            if not unique:
                names = ", ".join(params.action_names[a] for a in tie)
                print(f"round {i + 1}: tie between {names}")
    if args.out:
        write_csv(classroom_dataset(params, policy), args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_membership(args) -> int:
    scn = _load_scenario(args.scenario)
    efforts = _efforts_arg(scn, args.efforts)
    verdict = membership(scn.params, efforts)
    print(f"kappa          {_fmt(verdict.kappa)}")
    print(f"threshold      {_fmt(scn.params.T)}")
    print(f"incentivizable {'yes' if verdict.incentivizable else 'no'}")
    if verdict.witness is not None and not verdict.incentivizable:
        print("dominating witness:")
        for i, row in enumerate(verdict.witness.efforts):
            print(f"  round {i + 1}: " + " ".join(f"{v:.6g}" for v in row))
    return EXIT_OK


def cmd_recover(args) -> int:
    scn = _load_scenario(args.scenario)
    params = scn.params
    efforts = _efforts_arg(scn, args.efforts)
    rec = recover_assessment(params, efforts)
    headers = ["round"] + [f"raw_{f}" for f in params.feature_names]
    headers += [f"rescaled_{f}" for f in params.feature_names] + ["gamma"]
    rows = []
    for i in range(params.T):
        row = [str(i + 1)]
        row += [f"{v:.6g}" for v in rec.policy.rules[i]]
        row += [f"{v:.6g}" for v in rec.rescaled_policy.rules[i]]
        row += [f"{rec.gamma[i]:.6g}"]
        rows.append(row)
    _print_table(headers, rows)
    print(f"validated  {'yes' if rec.validated else 'no'}")
    print(f"in simplex {'yes' if rec.in_simplex else 'no'}")
    if args.out:
        data = tuple(
            (i + 1,)
            + tuple(float(v) for v in rec.policy.rules[i])
            + tuple(float(v) for v in rec.rescaled_policy.rules[i])
            + (float(rec.gamma[i]),)
            for i in range(params.T)
        )
        write_csv(FigureDataset(kind="recover", headers=tuple(headers), rows=data), args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def _anneal_config(scn: Scenario, args) -> AnnealConfig:
    stored = scn.solver or SolverSettings()

    def pick(cli, file_val, default):
        if cli is not None:
            return cli
        if file_val is not None:
            return file_val
        return default

    return AnnealConfig(
        epsilon=pick(args.eps, stored.eps, 0.05),
        delta=pick(args.delta, stored.delta, 0.2),
        seed=_seed_arg(args.seed, stored.seed),
        r=pick(args.r, stored.r, 1e-3),
        samples_per_phase=pick(args.samples_per_phase, stored.samples_per_phase, None),
        walk_steps=pick(args.walk_steps, stored.walk_steps, None),
    )


def cmd_solve(args) -> int:
    scn = _load_scenario(args.scenario)
    params = scn.params
    method = args.method
    if method is None:
        method = "quadratic" if params.cost_model is CostModel.QUADRATIC else "anneal"

    if method == "quadratic":
        sol = solve_quadratic(params)
        traj = simulate_trajectory(params, sol.policy, sol.efforts)
        _round_table(params, sol.policy, sol.efforts, traj.scores)
        basis = [int(np.argmax(row)) for row in sol.policy.rules]
        print("per-round feature: " + " ".join(params.feature_names[b] for b in basis))
        print(f"value  {_fmt(sol.value)}")
        if args.out:
            headers = ("round", "basis_feature")
            headers += tuple(f"theta_{f}" for f in params.feature_names)
            headers += tuple(f"effort_{a}" for a in params.action_names) + ("value",)
            rows = tuple(
                (i + 1, basis[i])
                + tuple(float(v) for v in sol.policy.rules[i])
                + tuple(float(v) for v in sol.efforts.efforts[i])
                + (float(sol.value),)
                for i in range(params.T)
            )
            write_csv(FigureDataset(kind="solve", headers=headers, rows=rows), args.out)
            print(f"wrote {args.out}")
        return EXIT_OK

    if params.cost_model is not CostModel.FIXED_BUDGET:
        raise ParseError(f"method {method!r} applies to the fixed-budget cost model")
    if method == "grid":
        result = solve_fixed_budget_grid(params, args.grid_k)
    else:
        result = solve_fixed_budget_anneal(params, _anneal_config(scn, args))
    policy = result.assessment.rescaled_policy
    scores = simulate_trajectory(params, policy, result.efforts).scores
    _round_table(params, policy, result.efforts, scores)
    if not result.assessment.in_simplex:
        print("note: recovered rules shown at their dual scale; rows do not sum to 1")
    print(f"value  {_fmt(result.value)}")
    diag = result.diagnostics
    if method == "grid":
        print(f"policies scanned  {diag.policies_scanned}")
    else:
        print(f"phases {diag.phases}  oracle calls {diag.oracle_calls}")
        if diag.no_progress:
            print("warning: walk made no progress; seed policy already at the returned point")
    if args.out:
        headers = ("round",)
        headers += tuple(f"theta_{f}" for f in params.feature_names)
        headers += tuple(f"effort_{a}" for a in params.action_names)
        headers += ("value",)
        if method == "grid":
            headers += ("policies_scanned",)
            extras = (diag.policies_scanned,)
        else:
            headers += ("phases", "oracle_calls", "no_progress")
            extras = (diag.phases, diag.oracle_calls, diag.no_progress)
        rows = tuple(
            (i + 1,)
            + tuple(float(v) for v in policy.rules[i])
            + tuple(float(v) for v in result.efforts.efforts[i])
            + (float(result.value),)
            + extras
            for i in range(params.T)
        )
        write_csv(FigureDataset(kind="solve", headers=headers, rows=rows), args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_bounds_implementability(args) -> int:
    scn = _load_scenario(args.scenario)
    action = _action_index(scn, args.action)
    bound = implementability_horizon(scn.params, action, args.round, statement_order=args.statement_order)
    if not bound.feasible:
        print("infeasible: no feature can keep the action optimal through the requested round")
        return EXIT_OK
    print(f"horizon  {bound.horizon}")
    print(f"feature  {scn.params.feature_names[bound.chosen_feature]}")
    if bound.binding_competitor is not None:
        print(f"binding competitor  {scn.params.action_names[bound.binding_competitor]}")
    print(f"raw gap  {_fmt(bound.raw_gap)}")
    return EXIT_OK


def cmd_bounds_effort_level(args) -> int:
    scn = _load_scenario(args.scenario)
    action = _action_index(scn, args.action)
    try:
        bound = effort_level_horizon(scn.params, action, args.effort)
    except InfeasibleCarryOver as exc:
        print(f"infeasible: {exc}")
        return EXIT_OK
    print(f"horizon  {bound.horizon}")
    print(f"feature  {scn.params.feature_names[bound.chosen_feature]}")
    print(f"raw bound  {_fmt(bound.raw_gap)}")
    return EXIT_OK


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


def _float_list_arg(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise ParseError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_figures(args) -> int:
    scn = _load_scenario(args.scenario)
    params = scn.params
    if args.kind == "regions":
        dataset = regions_dataset(
            params,
            horizons=_int_list(args.horizons),
            grid_resolution=args.grid_resolution,
            n_random=args.samples,
            seed=_seed_arg(args.seed, None),
        )
    elif args.kind == "omega_sweep":
        action = _action_index(scn, args.action) if args.action else int(np.argmax(params.lam))
        dataset = omega_sweep_dataset(params, action, t=args.round, omegas=_float_list_arg(args.omegas))
    else:
        dataset = classroom_dataset(params, _policy_arg(scn, args.policy))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_csv(dataset, out_dir / f"{args.kind}.csv")
    print(f"wrote {csv_path}")
    if not args.no_plot:
        png_path = render_png(dataset, out_dir / f"{args.kind}.png")
        print(f"wrote {png_path}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratreg",
        description="Solvers and reports for sequential assessment games with strategic effort.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("scenario", help="scenario file path or bundled scenario name")
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "parse and validate a scenario file")

    p = add("best-response", cmd_best_response, "agent best response to an assessment policy")
    p.add_argument("--policy", help="JSON file with per-round rules (default: uniform)")
    p.add_argument("--out", help="write the per-round trajectory CSV here")

    p = add("membership", cmd_membership, "test whether an effort policy is incentivizable")
    p.add_argument("--efforts", required=True, help="JSON file with per-round efforts")

    p = add("recover", cmd_recover, "recover an assessment policy that incentivizes the efforts")
    p.add_argument("--efforts", required=True, help="JSON file with per-round efforts")
    p.add_argument("--out", help="write recovered rules as CSV")

    p = add("solve", cmd_solve, "optimize the principal's assessment policy")
    p.add_argument("--method", choices=("anneal", "grid", "quadratic"))
    p.add_argument("--grid-k", type=int, default=10, help="grid resolution for --method grid")
    p.add_argument("--eps", type=float, help="target optimality gap")
    p.add_argument("--delta", type=float, help="failure probability")
    p.add_argument("--seed", type=int, help="random seed (STRAT_SEED overrides)")
    p.add_argument("--r", type=float, help="inner radius for the annealing schedule")
    p.add_argument("--samples-per-phase", type=int)
    p.add_argument("--walk-steps", type=int)
    p.add_argument("--out", help="write per-round solution CSV here")

    bounds = sub.add_parser("bounds", help="closed-form horizon bounds")
    bsub = bounds.add_subparsers(dest="bounds_command", required=True)
    p = bsub.add_parser("implementability", help="rounds needed to keep an action optimal through round t")
    p.add_argument("scenario")
    p.add_argument("--action", required=True, help="action name or index")
    p.add_argument("--round", type=int, default=1, help="last round the action must stay optimal")
    p.add_argument("--statement-order", action="store_true", help="report the swapped-quantifier comparison value")
    p.set_defaults(func=cmd_bounds_implementability)
    p = bsub.add_parser("effort-level", help="rounds needed to extract a cumulative effort level")
    p.add_argument("scenario")
    p.add_argument("--action", required=True, help="action name or index")
    p.add_argument("--effort", type=float, required=True, help="cumulative effort target")
    p.set_defaults(func=cmd_bounds_effort_level)

    p = sub.add_parser("figures", help="export figure datasets (CSV, and PNG unless --no-plot)")
    p.add_argument("kind", choices=("regions", "omega_sweep", "classroom"))
    p.add_argument("scenario")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--horizons", default="1,2,3,4,5", help="comma list of T values (regions)")
    p.add_argument("--grid-resolution", type=int, default=20, help="simplex grid resolution (regions)")
    p.add_argument("--samples", type=int, default=120, help="random policies per horizon (regions)")
    p.add_argument("--seed", type=int, help="sampling seed (STRAT_SEED overrides)")
    p.add_argument("--omegas", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0", help="carry-over sweep values")
    p.add_argument("--action", help="swept action (omega_sweep); defaults to the preference-weighted one")
    p.add_argument("--round", type=int, default=1, help="round the action must stay optimal through (omega_sweep)")
    p.add_argument("--policy", help="policy JSON for the classroom kind (default: uniform)")
    p.add_argument("--no-plot", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_figures)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        for violation in exc.violations:
            print(f"invalid scenario: {violation}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    raise SystemExit(main())
