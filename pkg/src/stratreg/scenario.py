"""Scenario files: strict JSON schema for game instances plus solver settings.

The schema is deliberately closed: unknown keys are rejected so that typos
like ``omega`` for ``omega_diag`` fail loudly instead of silently using
defaults.  Parsing errors carry the offending field; semantic violations are
reported all at once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import CostModel, GameParams, validate_params

__all__ = [
    "ParseError",
    "ValidationError",
    "SolverSettings",
    "Scenario",
    "parse_scenario",
    "parse_scenario_text",
    "serialize_scenario",
    "bundled_scenario_names",
    "bundled_scenario_path",
]

_REQUIRED = ("name", "features", "actions", "W", "omega_diag", "lambda_diag", "s0", "T", "cost_model")
_OPTIONAL = ("solver",)
_SOLVER_KEYS = ("eps", "delta", "seed", "r", "samples_per_phase", "walk_steps")


class ParseError(ValueError):
    """Malformed scenario file; ``field`` names the offending entry when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class ValidationError(ValueError):
    """Structurally parseable scenario with semantic violations."""

    def __init__(self, violations: tuple[str, ...]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass(frozen=True)
class SolverSettings:
    """Optional per-scenario annealing settings mirrored from the solver block."""

    eps: float | None = None
    delta: float | None = None
    seed: int | None = None
    r: float | None = None
    samples_per_phase: int | None = None
    walk_steps: int | None = None


@dataclass(frozen=True)
class Scenario:
    name: str
    params: GameParams
    solver: SolverSettings | None


def _expect(obj: dict, key: str, kinds, where: str):
    if key not in obj:
        raise ParseError("missing required field", field=f"{where}{key}")
    val = obj[key]
    if not isinstance(val, kinds):
        raise ParseError(f"expected {kinds}, got {type(val).__name__}", field=f"{where}{key}")
    return val


def _float_list(values, field: str) -> list[float]:
    if not isinstance(values, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise ParseError("expected a list of numbers", field=field)
    return [float(v) for v in values]


def parse_scenario_text(text: str, source: str = "<string>") -> Scenario:
    """Parse scenario JSON text; see :func:`parse_scenario` for the file form."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {source} (line {exc.lineno}): {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ParseError("top level must be a JSON object")
    unknown = set(raw) - set(_REQUIRED) - set(_OPTIONAL)
    if unknown:
        raise ParseError("unknown field", field=sorted(unknown)[0])

    name = _expect(raw, "name", str, "")
    features = _expect(raw, "features", list, "")
    actions = _expect(raw, "actions", list, "")
    if not all(isinstance(f, str) for f in features):
        raise ParseError("expected a list of strings", field="features")
    if not all(isinstance(a, str) for a in actions):
        raise ParseError("expected a list of strings", field="actions")
    W_rows = _expect(raw, "W", list, "")
    W = [_float_list(row, f"W[{i}]") for i, row in enumerate(W_rows)]
    if len(W) != len(features):
        raise ParseError(f"W has {len(W)} rows but there are {len(features)} features", field="W")
    if any(len(row) != len(actions) for row in W):
        raise ParseError("every W row needs one entry per action", field="W")
    omega = _float_list(_expect(raw, "omega_diag", list, ""), "omega_diag")
    lam = _float_list(_expect(raw, "lambda_diag", list, ""), "lambda_diag")
    s0 = _float_list(_expect(raw, "s0", list, ""), "s0")
    for fname, vals in (("omega_diag", omega), ("lambda_diag", lam), ("s0", s0)):
        if len(vals) != len(actions):
            raise ParseError(f"expected {len(actions)} entries, got {len(vals)}", field=fname)
    T = _expect(raw, "T", int, "")
    if isinstance(T, bool):
        raise ParseError("expected an integer", field="T")
    model_name = _expect(raw, "cost_model", str, "")
    try:
        model = CostModel(model_name)
    except ValueError:
        raise ParseError(
            f"must be one of {[m.value for m in CostModel]}, got {model_name!r}", field="cost_model"
        ) from None

    solver = None
    if "solver" in raw:
        block = _expect(raw, "solver", dict, "")
        unknown = set(block) - set(_SOLVER_KEYS)
        if unknown:
            raise ParseError("unknown field", field=f"solver.{sorted(unknown)[0]}")
        kwargs = {}
        for key in _SOLVER_KEYS:
            if key not in block:
                continue
            val = block[key]
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ParseError("expected a number", field=f"solver.{key}")
            if key in ("seed", "samples_per_phase", "walk_steps"):
                if int(val) != val:
                    raise ParseError("expected an integer", field=f"solver.{key}")
                kwargs[key] = int(val)
            else:
                kwargs[key] = float(val)
        solver = SolverSettings(**kwargs)

    try:
        params = GameParams(
            W=np.array(W),
            omega=np.array(omega),
            lam=np.array(lam),
            s0=np.array(s0),
            T=T,
            cost_model=model,
            feature_names=tuple(features),
            action_names=tuple(actions),
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    report = validate_params(params)
    if not report.ok:
        raise ValidationError(report.violations)
    return Scenario(name=name, params=params, solver=solver)


def parse_scenario(path: str | Path) -> Scenario:
    """Load and validate one scenario file.

    Raises :class:`ParseError` for malformed or unknown fields and
    :class:`ValidationError` (listing every violation) for semantic problems
    such as a non-monotone conversion column or carry-over outside [0, 1].
    """
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc}") from exc
    return parse_scenario_text(text, source=str(p))


def serialize_scenario(scenario: Scenario) -> str:
    """JSON text that :func:`parse_scenario_text` maps back to equal values."""
    params = scenario.params
    doc: dict = {
        "name": scenario.name,
        "features": list(params.feature_names),
        "actions": list(params.action_names),
        "W": [[float(v) for v in row] for row in params.W],
        "omega_diag": [float(v) for v in params.omega],
        "lambda_diag": [float(v) for v in params.lam],
        "s0": [float(v) for v in params.s0],
        "T": int(params.T),
        "cost_model": params.cost_model.value,
    }
    if scenario.solver is not None:
        block = {
            key: getattr(scenario.solver, key)
            for key in _SOLVER_KEYS
            if getattr(scenario.solver, key) is not None
        }
        doc["solver"] = block
    return json.dumps(doc, indent=2) + "\n"


def bundled_scenario_names() -> tuple[str, ...]:
    root = resources.files("stratreg").joinpath("data")
    return tuple(sorted(p.name[: -len(".json")] for p in root.iterdir() if p.name.endswith(".json")))


def bundled_scenario_path(name: str) -> Path:
    """Filesystem path of a packaged example scenario such as ``classroom``."""
    root = resources.files("stratreg").joinpath("data")
    candidate = root.joinpath(f"{name}.json")
    if not candidate.is_file():
        raise ParseError(f"no bundled scenario named {name!r}; available: {', '.join(bundled_scenario_names())}")
    return Path(str(candidate))
