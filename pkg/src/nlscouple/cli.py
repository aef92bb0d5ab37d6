"""Command-line interface: configuration parsing and run orchestration.

A run is described by a JSON config document; every field is either
present or defaulted from the table printed by ``--show-defaults``.
Unknown keys are parse errors, constraint violations are reported with
the violated constraint, and all emitted JSON validates against the
schema files shipped under ``nlscouple/schemas``.

Exit codes: 0 success, 1 error, 2 solver non-convergence, 3 expected
nonexistence outcome in ``check`` mode.
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from importlib import resources

import click
import jsonschema

from . import __version__
from ._kernels import BACKEND
from .functionals import Params
from .grid import RadialGrid, build_grid, mass
from .oracle import (
    shoot_ground,
    single_energy_closed_form,
    single_lambda,
)
from .solver import (
    Misuse,
    SolveResult,
    SolverOptions,
    Status,
    check_nonexistence_identity,
    descend,
)
from . import survey

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_NONEXISTENCE = 3

_PROBLEM_KEYS = ("N", "p", "q", "mu1", "mu2", "beta", "a", "b")
_GRID_KEYS = ("r_max", "n_nodes")
_SOLVER_KEYS = ("max_iter", "step0", "backtrack_factor", "tol_grad",
                "tol_pde", "tol_pohozaev", "seed", "collapse_threshold",
                "collapse_tstar")
_SWEEP_KEYS = ("axis", "values")
_OUTPUT_KEYS = ("format", "path")
_TOP_KEYS = ("command", "problem", "grid", "solver", "sweep", "output", "seed")

DEFAULTS = {
    "grid.r_max": "auto (45 concentration lengths)",
    "grid.n_nodes": 40001,
    "solver.max_iter": SolverOptions().max_iter,
    "solver.step0": SolverOptions().step0,
    "solver.backtrack_factor": SolverOptions().backtrack_factor,
    "solver.tol_grad": SolverOptions().tol_grad,
    "solver.tol_pde": SolverOptions().tol_pde,
    "solver.tol_pohozaev": SolverOptions().tol_pohozaev,
    "solver.seed": SolverOptions().seed,
    "solver.collapse_threshold": SolverOptions().collapse_threshold,
    "solver.collapse_tstar": SolverOptions().collapse_tstar,
    "output.format": "json (csv for sweep)",
    "output.path": "stdout",
    "seed": 0,
}


class ConfigError(ValueError):
    """A config document failed parsing or validation."""


@dataclass(frozen=True)
class RunConfig:
    command: str | None
    problem: Params | None
    problem_raw: dict | None
    problem_error: str | None
    grid_r_max: float | None
    grid_n_nodes: int | None
    solver: SolverOptions
    sweep_axis: str | None
    sweep_values: tuple[float, ...] | None
    output_format: str | None
    output_path: str | None
    seed: int


def _reject_unknown(section: dict, allowed: tuple, where: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(
                f"unknown key {key!r} in {where}; allowed keys: "
                + ", ".join(allowed))


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a JSON run configuration."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "config")

    command = doc.get("command")
    if command is not None and command not in (
            "oracle", "solve", "sweep", "threshold", "check"):
        raise ConfigError(
            f"unknown command {command!r}; expected oracle, solve, sweep, "
            "threshold, or check")

    problem = None
    problem_raw = None
    problem_error = None
    if "problem" in doc:
        section = doc["problem"]
        if not isinstance(section, dict):
            raise ConfigError("problem section must be an object")
        _reject_unknown(section, _PROBLEM_KEYS, "problem")
        missing = [k for k in _PROBLEM_KEYS if k not in section
                   and k not in ("q", "mu2", "beta", "b")]
        if missing:
            raise ConfigError(
                "problem section missing keys: " + ", ".join(missing))
        problem_raw = dict(section)
        try:
            problem = Params(
                N=int(section["N"]), p=float(section["p"]),
                q=float(section.get("q", section["p"])),
                mu1=float(section["mu1"]),
                mu2=float(section.get("mu2", section["mu1"])),
                beta=float(section.get("beta", 0.0)),
                a=float(section["a"]),
                b=float(section.get("b", section["a"])))
        except (TypeError, ValueError) as exc:
            problem_error = f"invalid problem parameters: {exc}"
        # the oracle command works on the single equation and accepts
        # parameter sets outside the coupled-system window (e.g. N = 1);
        # every other command needs a fully valid Params, so the error is
        # raised at parse time unless the oracle was requested
        if problem_error is not None and command != "oracle":
            raise ConfigError(problem_error)

    r_max = n_nodes = None
    if "grid" in doc:
        section = doc["grid"]
        if not isinstance(section, dict):
            raise ConfigError("grid section must be an object")
        _reject_unknown(section, _GRID_KEYS, "grid")
        if "r_max" in section:
            r_max = float(section["r_max"])
            if not (r_max > 0):
                raise ConfigError("grid.r_max must be positive")
        if "n_nodes" in section:
            n_nodes = int(section["n_nodes"])
            if n_nodes < 16:
                raise ConfigError("grid.n_nodes must be at least 16")

    solver_kwargs = {}
    if "solver" in doc:
        section = doc["solver"]
        if not isinstance(section, dict):
            raise ConfigError("solver section must be an object")
        _reject_unknown(section, _SOLVER_KEYS, "solver")
        solver_kwargs = dict(section)

    seed = 0
    if "seed" in doc:
        seed = int(doc["seed"])
        solver_kwargs.setdefault("seed", seed)
    try:
        solver = SolverOptions(**solver_kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver options: {exc}") from exc

    sweep_axis = sweep_values = None
    if "sweep" in doc:
        section = doc["sweep"]
        if not isinstance(section, dict):
            raise ConfigError("sweep section must be an object")
        _reject_unknown(section, _SWEEP_KEYS, "sweep")
        if "axis" in section:
            sweep_axis = str(section["axis"])
            if sweep_axis not in survey.SWEEP_AXES:
                raise ConfigError(
                    f"sweep.axis must be one of "
                    f"{', '.join(survey.SWEEP_AXES)}; got {sweep_axis!r}")
        if "values" in section:
            raw = section["values"]
            if not isinstance(raw, list):
                raise ConfigError("sweep.values must be a list of numbers")
            try:
                sweep_values = tuple(float(v) for v in raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(
                    f"sweep.values must be numeric: {exc}") from exc
            for v in sweep_values:
                if not math.isfinite(v):
                    raise ConfigError("sweep.values must be finite")

    output_format = output_path = None
    if "output" in doc:
        section = doc["output"]
        if not isinstance(section, dict):
            raise ConfigError("output section must be an object")
        _reject_unknown(section, _OUTPUT_KEYS, "output")
        if "format" in section:
            output_format = str(section["format"])
            if output_format not in ("json", "csv"):
                raise ConfigError("output.format must be 'json' or 'csv'")
        if "path" in section:
            output_path = str(section["path"])

    return RunConfig(
        command=command, problem=problem, problem_raw=problem_raw,
        problem_error=problem_error, grid_r_max=r_max,
        grid_n_nodes=n_nodes, solver=solver, sweep_axis=sweep_axis,
        sweep_values=sweep_values, output_format=output_format,
        output_path=output_path, seed=seed)


def _load_schema(name: str) -> dict:
    path = resources.files("nlscouple").joinpath("schemas", name)
    return json.loads(path.read_text(encoding="utf-8"))


def _emit(payload: dict, schema_name: str, path: str | None) -> None:
    jsonschema.validate(payload, _load_schema(schema_name))
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write output to {path}: {exc}") from exc


def _grid_for(cfg: RunConfig, params: Params) -> RadialGrid:
    n_nodes = cfg.grid_n_nodes if cfg.grid_n_nodes is not None else 40001
    if cfg.grid_r_max is not None:
        return build_grid(params.N, cfg.grid_r_max, n_nodes)
    return survey.default_grid(params, n_nodes=n_nodes)


def _result_payload(cfg: RunConfig, params: Params, grid: RadialGrid,
                    result: SolveResult) -> dict:
    payload = {
        "params": dataclasses.asdict(params),
        "grid": {"r_max": grid.r_max, "n_nodes": grid.n_nodes},
        "status": result.status.value,
        "energy": result.energy,
        "lambda1": result.lambda1,
        "lambda2": result.lambda2,
        "pohozaev_residual": result.pohozaev_residual,
        "pde_residual": result.pde_residual,
        "grad_residual": result.grad_residual,
        "iterations": result.iterations,
        "mass_u": mass(grid, result.state.u),
        "mass_v": mass(grid, result.state.v),
    }
    if result.identity_lhs is not None:
        payload["identity_lhs"] = result.identity_lhs
        payload["identity_rhs_bound"] = result.identity_rhs_bound
    return payload


def _require_problem(cfg: RunConfig) -> Params:
    if cfg.problem is None:
        raise ConfigError(
            cfg.problem_error or "this command requires a 'problem' section")
    return cfg.problem


def _run_oracle(cfg: RunConfig) -> int:
    # The oracle works on the single scalar equation, so it accepts
    # parameter sets outside the coupled-system window (e.g. N = 1).
    if cfg.problem_raw is None:
        raise ConfigError("this command requires a 'problem' section")
    raw = cfg.problem_raw
    try:
        N = int(raw["N"])
        p = float(raw["p"])
        mu1 = float(raw.get("mu1", 1.0))
        a = float(raw.get("a", 1.0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid problem parameters: {exc}") from None
    if N not in (1, 2, 3, 4):
        raise ConfigError("problem.N must be one of 1, 2, 3, 4")
    if p <= 2.0:
        raise ConfigError("problem.p must exceed 2")
    if N >= 3 and p > 2.0 * N / (N - 2.0):
        raise ConfigError(
            f"problem.p must not exceed the critical exponent "
            f"{2.0 * N / (N - 2.0):g} for N = {N}")
    prof = shoot_ground(N, p)
    payload = {
        "N": N,
        "p": p,
        "w0": prof.w0,
        "residual_sup": prof.residual,
        "backend": BACKEND,
    }
    crit = math.inf if N <= 2 else 2.0 * N / (N - 2.0)
    if 2.0 + 4.0 / N < p < crit:
        payload["lambda1"] = single_lambda(mu1, p, a, N)
        payload["energy"] = single_energy_closed_form(mu1, p, a, N)
    _emit(payload, "oracle.json", cfg.output_path)
    return EXIT_OK


def _run_solve(cfg: RunConfig) -> int:
    params = _require_problem(cfg)
    grid = _grid_for(cfg, params)
    result = descend(params, grid, cfg.solver)
    _emit(_result_payload(cfg, params, grid, result), "solve.json",
          cfg.output_path)
    return EXIT_OK if result.status is Status.CONVERGED else EXIT_NOT_CONVERGED


def _run_threshold(cfg: RunConfig) -> int:
    params = _require_problem(cfg)
    report = survey.threshold_critical(params)
    payload = {
        "params": dataclasses.asdict(params),
        "lhs": report.lhs,
        "rhs": report.rhs,
        "margin": report.margin,
        "sufficient_condition_holds": report.sufficient_condition_holds,
        "used_closed_form": report.used_closed_form,
    }
    _emit(payload, "threshold.json", cfg.output_path)
    return EXIT_OK


def _run_check(cfg: RunConfig) -> int:
    params = _require_problem(cfg)
    grid = _grid_for(cfg, params)
    result = descend(params, grid, cfg.solver)
    identity_ok = check_nonexistence_identity(result, params)
    payload = _result_payload(cfg, params, grid, result)
    payload["identity_ok"] = identity_ok
    _emit(payload, "check.json", cfg.output_path)
    if result.status is Status.CONVERGED:
        click.echo("check: a Converged result contradicts the nonexistence "
                   "prediction", err=True)
        return EXIT_ERROR
    return EXIT_NONEXISTENCE if identity_ok else EXIT_ERROR


def _run_sweep(cfg: RunConfig, jobs: int) -> int:
    params = _require_problem(cfg)
    if cfg.sweep_axis is None or cfg.sweep_values is None:
        raise ConfigError(
            "sweep requires a 'sweep' section with 'axis' and 'values'")
    grid = None
    if cfg.grid_r_max is not None:
        grid = _grid_for(cfg, params)
    records = survey.sweep(params, cfg.sweep_axis, list(cfg.sweep_values),
                           opts=cfg.solver, grid=grid, jobs=jobs)
    fmt = cfg.output_format or "csv"
    if fmt == "csv":
        text = survey.render_csv(records)
        if cfg.output_path is None:
            sys.stdout.write(text)
        else:
            survey.write_csv(records, cfg.output_path)
    else:
        payload = {"records": [survey.record_to_dict(r) for r in records]}
        _emit(payload, "sweep.json", cfg.output_path)
    return EXIT_OK


def _load_config(config_path: str | None, seed: int | None,
                 output: str | None) -> RunConfig:
    if config_path is None:
        raise ConfigError("--config is required for this command")
    try:
        with open(config_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    cfg = parse_config(text)
    if seed is not None:
        cfg = dataclasses.replace(
            cfg, seed=seed,
            solver=dataclasses.replace(cfg.solver, seed=seed))
    if output is not None:
        cfg = dataclasses.replace(cfg, output_path=output)
    return cfg


def _show_defaults() -> None:
    click.echo("defaults:")
    for key, value in DEFAULTS.items():
        click.echo(f"  {key} = {value}")


_shared = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="Path to the JSON run configuration."),
    click.option("--seed", type=int, default=None,
                 help="Override the configured seed."),
    click.option("--output", type=click.Path(), default=None,
                 help="Override the configured output path."),
    click.option("--jobs", type=int, default=1, show_default=True,
                 help="Worker budget for sweep entries."),
    click.option("--show-defaults", is_flag=True, default=False,
                 help="Print the defaults table and exit."),
]


def _with_shared(fn):
    for opt in reversed(_shared):
        fn = opt(fn)
    return fn


def _dispatch(command: str, config_path, seed, output, jobs,
              show_defaults) -> int:
    if show_defaults:
        _show_defaults()
        return EXIT_OK
    try:
        cfg = _load_config(config_path, seed, output)
        if cfg.command is not None and cfg.command != command:
            raise ConfigError(
                f"config names command {cfg.command!r} but {command!r} "
                "was invoked")
        if command == "oracle":
            return _run_oracle(cfg)
        if command == "solve":
            return _run_solve(cfg)
        if command == "threshold":
            return _run_threshold(cfg)
        if command == "check":
            return _run_check(cfg)
        if command == "sweep":
            return _run_sweep(cfg, jobs)
        raise ConfigError(f"unknown command {command!r}")
    except (ConfigError, Misuse, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_ERROR


@click.group(invoke_without_command=True)
@click.option("--show-defaults", is_flag=True, default=False,
              help="Print the defaults table and exit.")
@click.version_option(version=__version__, prog_name="nlscouple")
@click.pass_context
def main(ctx, show_defaults):
    """Normalized ground states of linearly coupled Schrodinger systems."""
    if show_defaults:
        _show_defaults()
        ctx.exit(EXIT_OK)
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())
        ctx.exit(EXIT_OK)


def _register(name):
    @main.command(name=name)
    @_with_shared
    @click.pass_context
    def _cmd(ctx, config_path, seed, output, jobs, show_defaults,
             _name=name):
        ctx.exit(_dispatch(_name, config_path, seed, output, jobs,
                           show_defaults))
    return _cmd


for _name in ("oracle", "solve", "sweep", "threshold", "check"):
    _register(_name)


if __name__ == "__main__":
    main()
