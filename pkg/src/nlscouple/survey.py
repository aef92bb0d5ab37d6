"""Existence thresholds, parameter sweeps, and the nonexistence map.

The survey layer evaluates the sufficient existence condition for the
critical-q case, runs one solve per point along a parameter axis, and
writes deterministic CSV reports.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import io
import math
import time
from dataclasses import dataclass, replace

from .functionals import Params
from .grid import RadialGrid, build_grid
from .oracle import gn_constant, sobolev_closed_form
from .solver import (
    Misuse,
    SolveResult,
    SolverOptions,
    Status,
    check_nonexistence_identity,
    concentration_lengths,
    descend,
)

CSV_HEADER = ("axis,value,N,p,q,mu1,mu2,beta,a,b,energy,lambda1,lambda2,"
              "status,pohozaev_residual,pde_residual,iterations,wall_time")

SWEEP_AXES = ("a", "b", "beta", "mu1", "mu2", "p", "q")


@dataclass(frozen=True)
class ThresholdReport:
    """Evaluation of the sufficient existence condition in the critical-q
    case: lhs < rhs with rhs = (1/N) S^{N/2} / mu2^{N/2-1}."""
    lhs: float
    rhs: float
    margin: float
    sufficient_condition_holds: bool
    used_closed_form: bool


@dataclass(frozen=True)
class SweepRecord:
    axis: str
    value: float
    params: Params
    energy: float
    lambda1: float
    lambda2: float
    status: Status
    pohozaev_residual: float
    pde_residual: float
    iterations: int
    wall_time: float
    threshold: ThresholdReport | None = None
    identity_ok: bool | None = None

    def sort_key(self) -> tuple:
        p = self.params
        return (self.axis, p.N, p.p, p.q, p.mu1, p.mu2, p.beta, p.a, p.b)


def closed_form_lhs(params: Params) -> float:
    """Upper-bound surrogate for m(a,b) + beta sqrt(ab) built from the
    decoupled first component level:

        (1/2 - 1/(p gamma_p)) (gamma_p C_{N,p} mu_1 a^{(p - p gamma_p)/2})
            ^{2/(2 - p gamma_p)} + beta sqrt(ab)
    """
    gp = params.gamma_p
    pgp = params.p * gp
    C = gn_constant(params.N, params.p)
    base = gp * C * params.mu1 * params.a ** ((params.p - pgp) / 2.0)
    return ((0.5 - 1.0 / pgp) * base ** (2.0 / (2.0 - pgp))
            + params.beta * math.sqrt(params.a * params.b))


def threshold_critical(params: Params,
                       m_estimate: float | None = None) -> ThresholdReport:
    """Sufficient existence condition for q = 2* (p mass-supercritical,
    Sobolev-subcritical): compare lhs against (1/N) S^{N/2}/mu2^{N/2-1}.

    When a computed level estimate is available it is used for the lhs;
    otherwise the closed-form surrogate bounds it from above.
    """
    if params.N not in (3, 4):
        raise Misuse("threshold evaluation requires N in {3, 4}")
    if not params.is_q_critical:
        raise Misuse("threshold evaluation requires q = 2N/(N-2)")
    if params.is_p_critical:
        raise Misuse("threshold evaluation requires p < 2N/(N-2)")
    N = params.N
    S = sobolev_closed_form(N)
    rhs = S ** (N / 2.0) / (N * params.mu2 ** (N / 2.0 - 1.0))
    if m_estimate is None:
        lhs = closed_form_lhs(params)
        used_closed_form = True
    else:
        lhs = m_estimate + params.beta * math.sqrt(params.a * params.b)
        used_closed_form = False
    margin = rhs - lhs
    return ThresholdReport(lhs=lhs, rhs=rhs, margin=margin,
                           sufficient_condition_holds=margin > 0.0,
                           used_closed_form=used_closed_form)


def default_grid(params: Params, r_factor: float = 45.0,
                 n_nodes: int = 40001) -> RadialGrid:
    """Grid sized from the expected concentration lengths."""
    lu, lv = concentration_lengths(params)
    r_max = r_factor * max(lu, lv)
    return build_grid(params.N, r_max, n_nodes)


def _one_record(axis: str, value: float, params: Params, grid: RadialGrid,
                opts: SolverOptions, with_threshold: bool,
                with_identity: bool) -> SweepRecord:
    t0 = time.perf_counter()
    result = descend(params, grid, opts)
    wall = time.perf_counter() - t0
    threshold = None
    if with_threshold:
        threshold = threshold_critical(params)
    identity_ok = None
    if with_identity:
        identity_ok = check_nonexistence_identity(result, params)
    return SweepRecord(
        axis=axis, value=value, params=params, energy=result.energy,
        lambda1=result.lambda1, lambda2=result.lambda2, status=result.status,
        pohozaev_residual=result.pohozaev_residual,
        pde_residual=result.pde_residual, iterations=result.iterations,
        wall_time=wall, threshold=threshold, identity_ok=identity_ok)


def _validated_params(base: Params, axis: str, values: list[float]) -> list[Params]:
    if axis not in SWEEP_AXES:
        raise ValueError(
            f"axis must be one of {', '.join(SWEEP_AXES)}; got {axis!r}")
    out = []
    for value in values:
        if not math.isfinite(value):
            raise ValueError(f"axis value {value!r} is not finite")
        try:
            out.append(replace(base, **{axis: float(value)}))
        except ValueError as exc:
            raise ValueError(
                f"axis value {value!r} rejected: {exc}") from exc
    return out


def sweep(base: Params, axis: str, values: list[float],
          opts: SolverOptions | None = None, grid: RadialGrid | None = None,
          jobs: int = 1, with_identity: bool = False) -> list[SweepRecord]:
    """One solve per value of the chosen parameter axis.

    All values are validated against the Params invariants before any
    solve launches; failed solves are recorded, never dropped.  Entries
    are independent and may run concurrently; records are sorted by a
    canonical key so worker scheduling never affects the output.
    """
    if opts is None:
        opts = SolverOptions()
    points = _validated_params(base, axis, values)
    if not points:
        return []
    records: list[SweepRecord] = []
    tasks = []
    for value, params in zip(values, points):
        g = grid if grid is not None else default_grid(params)
        tasks.append((axis, float(value), params, g, opts, False,
                      with_identity))
    if jobs > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(lambda t: _one_record(*t), tasks))
    else:
        records = [_one_record(*t) for t in tasks]
    records.sort(key=SweepRecord.sort_key)
    return records


def nonexistence_map(base: Params, betas: list[float],
                     opts: SolverOptions | None = None,
                     grid: RadialGrid | None = None,
                     jobs: int = 1) -> list[SweepRecord]:
    """Critical-case sweep over beta with the contradiction check attached.

    Every record carries the identity verdict; a Converged record in the
    output marks a genuine failure of the nonexistence prediction and is
    surfaced to the caller unchanged.
    """
    if not (base.is_p_critical and base.is_q_critical):
        raise Misuse("nonexistence map requires p = q = 2N/(N-2)")
    if grid is None:
        grid = build_grid(base.N, 8.0, 2001)
    return sweep(base, "beta", betas, opts=opts, grid=grid, jobs=jobs,
                 with_identity=True)


def _fmt(x: float) -> str:
    return "%.17g" % float(x)


def render_csv(records: list[SweepRecord]) -> str:
    """Deterministic CSV per the survey interface.

    Floats carry 17 significant digits; the wall_time column is left
    empty because timings are not reproducible byte-for-byte.
    """
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for rec in records:
        p = rec.params
        row = [
            rec.axis, _fmt(rec.value), str(p.N), _fmt(p.p), _fmt(p.q),
            _fmt(p.mu1), _fmt(p.mu2), _fmt(p.beta), _fmt(p.a), _fmt(p.b),
            _fmt(rec.energy), _fmt(rec.lambda1), _fmt(rec.lambda2),
            rec.status.value, _fmt(rec.pohozaev_residual),
            _fmt(rec.pde_residual), str(rec.iterations), "",
        ]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def write_csv(records: list[SweepRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_csv(records))


def record_to_dict(rec: SweepRecord) -> dict:
    """JSON-friendly view of one sweep record."""
    out = {
        "axis": rec.axis,
        "value": rec.value,
        "params": dataclasses.asdict(rec.params),
        "energy": rec.energy,
        "lambda1": rec.lambda1,
        "lambda2": rec.lambda2,
        "status": rec.status.value,
        "pohozaev_residual": rec.pohozaev_residual,
        "pde_residual": rec.pde_residual,
        "iterations": rec.iterations,
        "wall_time": rec.wall_time,
    }
    if rec.threshold is not None:
        out["threshold"] = dataclasses.asdict(rec.threshold)
    if rec.identity_ok is not None:
        out["identity_ok"] = rec.identity_ok
    return out
