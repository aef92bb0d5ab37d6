"""Ground states of the coupled system by projected descent.

The level m(a, b) is the infimum of the energy over the Pohozaev manifold
intersected with the mass sphere.  Each iterate is projected onto the
manifold by an exact fiber dilation, so the objective along the iteration
is the fiber-maximized energy phi; the descent direction is the PDE
residual with least-squares multipliers, preconditioned by a shifted
Helmholtz solve so the step size is not limited by the grid spacing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .grid import (
    Field,
    RadialGrid,
    dilate,
    kinetic,
    lp_power,
    mass,
    normalize_mass,
    pair_inner,
    _laplacian_values,
)
from .functionals import (
    FiberCoefficients,
    NoMaximizer,
    PairState,
    Params,
    _tstar_from_coefficients,
    fiber_coefficients,
)


class Misuse(ValueError):
    """An operation was called outside its documented applicability."""


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    MAX_ITER = "MaxIter"
    COLLAPSED = "Collapsed"
    NO_GROUND_STATE = "NoGroundState"


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 50_000
    step0: float = 0.5
    backtrack_factor: float = 0.5
    tol_grad: float = 1e-6
    tol_pde: float = 1e-6
    tol_pohozaev: float = 1e-8
    seed: int = 0
    collapse_threshold: float = 1e-10
    collapse_tstar: float = 1e6

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not (self.step0 > 0):
            raise ValueError("step0 must be positive")
        if not (0.0 < self.backtrack_factor < 1.0):
            raise ValueError("backtrack_factor must lie in (0, 1)")
        for name in ("tol_grad", "tol_pde", "tol_pohozaev",
                     "collapse_threshold", "collapse_tstar"):
            if not (getattr(self, name) > 0):
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Diagnostics:
    pde_residual_u: float
    pde_residual_v: float
    pohozaev: float
    mass_error_u: float
    mass_error_v: float
    nehari_gap: float

    @property
    def pde_residual(self) -> float:
        return max(self.pde_residual_u, self.pde_residual_v)


@dataclass(frozen=True)
class SolveResult:
    state: PairState
    lambda1: float
    lambda2: float
    energy: float
    pohozaev_residual: float
    pde_residual: float
    grad_residual: float
    iterations: int
    status: Status
    identity_lhs: float | None = None
    identity_rhs_bound: float | None = None


def init_state(params: Params, grid: RadialGrid, seed: int,
               scale: tuple[float, float] = (1.0, 1.0)) -> PairState:
    """Nonnegative radially nonincreasing start: Gaussians with widths
    drawn from the seed in [0.5, 2], normalized to the target masses.

    ``scale`` multiplies the two widths; the solver passes the expected
    concentration length so the start is representable on its grid.
    """
    rng = np.random.default_rng(seed)
    sigma_u, sigma_v = rng.uniform(0.5, 2.0, size=2)
    sigma_u *= scale[0]
    sigma_v *= scale[1]
    r = grid.nodes
    u = Field(grid, np.exp(-(r**2) / (2.0 * sigma_u**2)))
    v = Field(grid, np.exp(-(r**2) / (2.0 * sigma_v**2)))
    return PairState(normalize_mass(grid, u, params.a),
                     normalize_mass(grid, v, params.b))


def concentration_lengths(params: Params) -> tuple[float, float]:
    """Expected concentration length 1/sqrt(lambda) of each component.

    Uses the decoupled single-equation multiplier as the estimate; a
    critical power has no normalized single-equation state, so it borrows
    the other component's scale (or 1 when both are critical).
    """
    from . import oracle  # local import; oracle sits below solver

    lam1 = lam2 = None
    if not params.is_p_critical:
        lam1 = oracle.single_lambda(params.mu1, params.p, params.a, params.N)
    if not params.is_q_critical:
        lam2 = oracle.single_lambda(params.mu2, params.q, params.b, params.N)
    if lam1 is None and lam2 is None:
        return 1.0, 1.0
    if lam1 is None:
        lam1 = lam2
    if lam2 is None:
        lam2 = lam1
    return 1.0 / math.sqrt(lam1), 1.0 / math.sqrt(lam2)


def project_pohozaev(params: Params, s: PairState) -> PairState:
    """Dilate (u, v) by the fiber maximizer and renormalize the masses.

    The dilation is mass-preserving analytically; renormalization absorbs
    the interpolation error so the iterate stays on the sphere exactly.
    """
    t = _tstar_from_coefficients(fiber_coefficients(params, s))
    if t == 1.0:
        return s
    g = s.grid
    u = normalize_mass(g, dilate(g, s.u, t), params.a)
    v = normalize_mass(g, dilate(g, s.v, t), params.b)
    return PairState(u, v)


def multipliers(params: Params, s: PairState) -> tuple[float, float]:
    """Least-squares multipliers from testing each equation against its
    own component: lambda_1 = (mu1 |u|_p^p + beta (u,v) - |grad u|^2)/a."""
    g = s.grid
    cross = pair_inner(g, s.u, s.v)
    lam1 = (params.mu1 * lp_power(g, s.u, params.p) + params.beta * cross
            - kinetic(g, s.u)) / params.a
    lam2 = (params.mu2 * lp_power(g, s.v, params.q) + params.beta * cross
            - kinetic(g, s.v)) / params.b
    return lam1, lam2


def _gradient_fields(params: Params, s: PairState,
                     lam1: float, lam2: float) -> tuple[np.ndarray, np.ndarray, float]:
    """PDE residual pair and the scale used for relative residuals."""
    g = s.grid
    u, v = s.u.values, s.v.values
    lap_u = _laplacian_values(g, u)
    lap_v = _laplacian_values(g, v)
    fu = params.mu1 * np.abs(u) ** (params.p - 2.0) * u
    fv = params.mu2 * np.abs(v) ** (params.q - 2.0) * v
    gu = -lap_u + lam1 * u - fu - params.beta * v
    gv = -lap_v + lam2 * v - fv - params.beta * u
    scale = max(
        float(np.max(np.abs(lap_u) + np.abs(lam1 * u) + np.abs(fu)
                     + abs(params.beta) * np.abs(v))),
        float(np.max(np.abs(lap_v) + np.abs(lam2 * v) + np.abs(fv)
                     + abs(params.beta) * np.abs(u))),
        1e-300,
    )
    return gu, gv, scale


def residuals(params: Params, s: PairState,
              lambda1: float, lambda2: float) -> Diagnostics:
    """Sup-scaled PDE residuals, Pohozaev defect, mass errors, and the
    Nehari-type identity gap of a candidate pair."""
    g = s.grid
    gu, gv, scale = _gradient_fields(params, s, lambda1, lambda2)
    c = fiber_coefficients(params, s)
    poho = float(c.pohozaev_at(1.0))
    mu_, mv_ = s.masses()
    # Nehari gap: test both equations against their own components
    cross = pair_inner(g, s.u, s.v)
    nehari = (kinetic(g, s.u) + kinetic(g, s.v)
              + lambda1 * params.a + lambda2 * params.b
              - params.mu1 * lp_power(g, s.u, params.p)
              - params.mu2 * lp_power(g, s.v, params.q)
              - 2.0 * params.beta * cross)
    return Diagnostics(
        pde_residual_u=float(np.max(np.abs(gu))) / scale,
        pde_residual_v=float(np.max(np.abs(gv))) / scale,
        pohozaev=poho,
        mass_error_u=abs(mu_ - params.a) / params.a,
        mass_error_v=abs(mv_ - params.b) / params.b,
        nehari_gap=float(nehari),
    )


def _laplacian_bands(grid: RadialGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(sub, diag, sup) bands of -Lap_h matching grid.laplacian exactly."""
    n = len(grid.nodes)
    N = grid.dimension
    h = grid.h
    r = grid.nodes
    diag = np.full(n, 2.0 / h**2)
    sup = np.zeros(n)   # sup[i] couples node i to node i+1
    sub = np.zeros(n)   # sub[i] couples node i to node i-1
    i = np.arange(1, n - 1)
    coef = (N - 1) / (2.0 * h * r[i])
    sup[i] = -(1.0 / h**2 + coef)
    sub[i] = -(1.0 / h**2 - coef)
    diag[0] = 2.0 * N / h**2
    sup[0] = -2.0 * N / h**2
    sub[-1] = -(1.0 / h**2 - (N - 1) / (2.0 * h * r[-1]))
    return sub, diag, sup


def _precondition(grid: RadialGrid, shift: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (shift - Lap) x = rhs with the grid's tridiagonal Laplacian."""
    n = len(grid.nodes)
    N = grid.dimension
    h = grid.h
    r = grid.nodes
    ab = np.zeros((3, n))
    # interior rows
    i = np.arange(1, n - 1)
    coef = (N - 1) / (2.0 * h * r[i])
    ab[1, i] = shift + 2.0 / h**2                 # diagonal
    ab[0, i + 1] = -(1.0 / h**2 + coef)           # superdiagonal entries
    ab[2, i - 1] = -(1.0 / h**2 - coef)           # subdiagonal entries
    # origin row: Lap f(0) = 2N (f1 - f0)/h^2
    ab[1, 0] = shift + 2.0 * N / h**2
    ab[0, 1] = -2.0 * N / h**2
    # outer row: Dirichlet ghost
    rn = r[-1]
    ab[1, -1] = shift + 2.0 / h**2
    ab[2, -2] = -(1.0 / h**2 - (N - 1) / (2.0 * h * rn))
    return solve_banded((1, 1), ab, rhs)


def _phi_of(params: Params, s: PairState) -> tuple[float, FiberCoefficients]:
    c = fiber_coefficients(params, s)
    t = _tstar_from_coefficients(c)
    return float(c.h(t)), c


def _kkt_residual(params: Params, grid: RadialGrid, u: np.ndarray,
                  v: np.ndarray, lam1: float, lam2: float) -> np.ndarray:
    w = grid.weights
    f1 = (-_laplacian_values(grid, u) + lam1 * u
          - params.mu1 * np.abs(u) ** (params.p - 2.0) * u - params.beta * v)
    f2 = (-_laplacian_values(grid, v) + lam2 * v
          - params.mu2 * np.abs(v) ** (params.q - 2.0) * v - params.beta * u)
    f3 = 0.5 * (float(np.dot(w, u**2)) - params.a)
    f4 = 0.5 * (float(np.dot(w, v**2)) - params.b)
    return np.concatenate([f1, f2, [f3, f4]])


def _kkt_newton_step(params: Params, grid: RadialGrid, u: np.ndarray,
                     v: np.ndarray, lam1: float, lam2: float,
                     F: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, float]:
    """One Newton correction of the full stationarity system.

    The PDE block is banded after interleaving the two components; the two
    multiplier columns and mass-constraint rows are appended by a bordered
    (Woodbury) solve, so the whole step costs O(n).
    """
    n = len(grid.nodes)
    sub, diag, sup = _laplacian_bands(grid)
    d1 = diag + lam1 - (params.p - 1.0) * params.mu1 * np.abs(u) ** (params.p - 2.0)
    d2 = diag + lam2 - (params.q - 1.0) * params.mu2 * np.abs(v) ** (params.q - 2.0)

    m = 2 * n
    ab = np.zeros((5, m))          # interleaved bands, (l, u) = (2, 2)
    ab[2, 0::2] = d1               # U diagonal
    ab[2, 1::2] = d2               # V diagonal
    ab[1, 1::2] = -params.beta     # row 2i, col 2i+1
    ab[3, 0:-1:2] = -params.beta   # row 2i+1, col 2i
    # species superdiagonals: (row 2i, col 2i+2) and (row 2i+1, col 2i+3)
    ab[0, 2::2] = sup[:-1]
    ab[0, 3::2] = sup[:-1]
    # species subdiagonals: (row 2i, col 2i-2) and (row 2i+1, col 2i-1)
    ab[4, 0:-2:2] = sub[1:]
    ab[4, 1:-1:2] = sub[1:]

    rhs = np.zeros((m, 3))
    rhs[0::2, 0] = -F[:n]
    rhs[1::2, 0] = -F[n:2 * n]
    rhs[0::2, 1] = u               # column for d(lam1)
    rhs[1::2, 2] = v               # column for d(lam2)
    sol = solve_banded((2, 2), ab, rhs)

    w = grid.weights
    bu = np.zeros(m)
    bu[0::2] = w * u
    bv = np.zeros(m)
    bv[1::2] = w * v
    # bordered 2x2 system for the multiplier increments
    s = np.array([
        [bu @ sol[:, 1], bu @ sol[:, 2]],
        [bv @ sol[:, 1], bv @ sol[:, 2]],
    ])
    r = np.array([F[2 * n] + bu @ sol[:, 0], F[2 * n + 1] + bv @ sol[:, 0]])
    dlam = np.linalg.solve(s, r)
    z = sol[:, 0] - sol[:, 1] * dlam[0] - sol[:, 2] * dlam[1]
    return z[0::2], z[1::2], float(dlam[0]), float(dlam[1])


def _branch_init(params: Params, grid: RadialGrid,
                 seed: int) -> tuple[PairState, float, float]:
    """Starting pair for the coupled solution branch.

    Subcritical components start from the decoupled normalized ground
    state; a critical component starts from a Gaussian co-located with its
    partner (no decoupled normalized state exists at the critical power).
    """
    from . import oracle

    lu, lv = concentration_lengths(params)
    u = v = None
    if not params.is_p_critical:
        try:
            _, u = oracle.single_ground(params.mu1, params.p, params.a,
                                        params.N, grid)
        except oracle.RefineDomain:
            u = None
    if not params.is_q_critical:
        try:
            _, v = oracle.single_ground(params.mu2, params.q, params.b,
                                        params.N, grid)
        except oracle.RefineDomain:
            v = None
    rng = np.random.default_rng(seed)
    sig_u, sig_v = rng.uniform(0.9, 1.1, size=2)
    r = grid.nodes
    if u is None:
        u = normalize_mass(grid, Field(
            grid, np.exp(-(r**2) / (2.0 * (sig_u * lu) ** 2))), params.a)
    if v is None:
        v = normalize_mass(grid, Field(
            grid, np.exp(-(r**2) / (2.0 * (sig_v * lv) ** 2))), params.b)
    state = PairState(u, v)
    lam1, lam2 = multipliers(params, state)
    return state, lam1, lam2


def _solve_branch(params: Params, grid: RadialGrid,
                  opts: SolverOptions) -> tuple[PairState, float, float, int, bool]:
    """Damped Newton iteration on the stationarity system.

    Returns (state, lam1, lam2, iterations, converged-to-machine-level).
    The merit function is the squared KKT residual; steps are damped until
    it decreases.
    """
    state, lam1, lam2 = _branch_init(params, grid, opts.seed)
    u = state.u.values.copy()
    v = state.v.values.copy()
    F = _kkt_residual(params, grid, u, v, lam1, lam2)
    merit = float(F @ F)
    newton_budget = min(opts.max_iter, 200)
    it = 0
    for it in range(1, newton_budget + 1):
        du, dv, dl1, dl2 = _kkt_newton_step(params, grid, u, v, lam1, lam2, F)
        tau = 1.0
        accepted = False
        while tau >= 1e-10:
            u_t = u + tau * du
            v_t = v + tau * dv
            l1_t = lam1 + tau * dl1
            l2_t = lam2 + tau * dl2
            F_t = _kkt_residual(params, grid, u_t, v_t, l1_t, l2_t)
            merit_t = float(F_t @ F_t)
            if merit_t < merit * (1.0 - 1e-4 * tau) or merit_t < 1e-300:
                accepted = True
                break
            tau *= 0.5
        if not accepted:
            return (PairState(Field(grid, u), Field(grid, v)),
                    lam1, lam2, it, False)
        u, v, lam1, lam2, F, merit = u_t, v_t, l1_t, l2_t, F_t, merit_t
        scale = max(float(np.max(np.abs(lam1 * u))),
                    float(np.max(np.abs(lam2 * v))), 1.0)
        n2 = 2 * len(grid.nodes)
        if (float(np.max(np.abs(F[:n2]))) <= 1e-9 * scale
                and abs(F[n2]) <= 1e-11 * params.a
                and abs(F[n2 + 1]) <= 1e-11 * params.b):
            return (PairState(Field(grid, u), Field(grid, v)),
                    lam1, lam2, it, True)
    return (PairState(Field(grid, u), Field(grid, v)), lam1, lam2, it, False)


def check_nonexistence_identity(result: SolveResult, params: Params) -> bool:
    """Contradiction test for doubly critical candidates.

    A nontrivial nonnegative solution must have both multipliers strictly
    positive (a non-positive multiplier makes the component superharmonic
    and square-integrable, hence zero), and would satisfy lambda1 a +
    lambda2 b = 2 beta (u, v) <= 2 beta sqrt(ab).  A candidate with a
    non-positive multiplier, one violating the bound, or one whose
    validated positive multipliers force beta < sqrt(l1 l2), cannot be a
    ground state.
    """
    if not (params.is_p_critical and params.is_q_critical):
        raise Misuse("identity check applies only to doubly critical powers")
    lam1, lam2 = result.lambda1, result.lambda2
    if lam1 <= 0.0 or lam2 <= 0.0:
        return True
    lhs = lam1 * params.a + lam2 * params.b
    bound = 2.0 * params.beta * math.sqrt(params.a * params.b)
    tol = 1e-8 * abs(lhs)
    if lhs > bound + tol:
        return True
    if params.beta < math.sqrt(lam1 * lam2):
        return True
    return False


_STEP_GROW = 1.5
_ARMIJO = 1e-4
_MIN_STEP_FACTOR = 1e-12
# materialized dilations are capped so one projection never outruns the
# grid resolution; the analytic fiber maximizer still drives collapse
# detection and the line-search objective
_T_CAP = 4.0


def descend(params: Params, grid: RadialGrid,
            opts: SolverOptions | None = None) -> SolveResult:
    """Compute the positive solution branch, or detect its absence.

    Doubly critical powers are handled by the projected-descent flow on
    the fiber-maximized energy, whose collapse detectors realize the
    nonexistence mechanism.  Otherwise the positive coupled branch is a
    saddle of that energy (flattening either component lowers it), so a
    monotone flow cannot hold it; the branch is computed instead by a
    damped Newton iteration on the full stationarity system, followed by
    an exact fiber projection and residual validation.
    """
    if opts is None:
        opts = SolverOptions()
    if params.beta < 0:
        raise ValueError(
            "beta < 0 admits no positive ground state; "
            "the positive-cone search requires beta >= 0")
    if params.is_p_critical and params.is_q_critical:
        return _flow_descend(params, grid, opts)

    state, lam1, lam2, it, ok = _solve_branch(params, grid, opts)
    state = PairState(normalize_mass(grid, state.u, params.a),
                      normalize_mass(grid, state.v, params.b))
    c = fiber_coefficients(params, state)
    poho_rel = abs(float(c.pohozaev_at(1.0))) / max(c.K, 1.0)
    if poho_rel > 0.5 * opts.tol_pohozaev:
        t = _tstar_from_coefficients(c)
        if 0.5 < t < 2.0:
            state = PairState(
                normalize_mass(grid, dilate(grid, state.u, t), params.a),
                normalize_mass(grid, dilate(grid, state.v, t), params.b))
            c = fiber_coefficients(params, state)
    lam1, lam2 = multipliers(params, state)
    diag = residuals(params, state, lam1, lam2)
    gu, gv, scale = _gradient_fields(params, state, lam1, lam2)
    w = grid.weights
    grad_res = math.sqrt(float(np.dot(w, gu**2) + np.dot(w, gv**2))) / scale
    poho_rel = abs(diag.pohozaev) / max(c.K, 1.0)
    interior_positive = bool(np.all(state.u.values[:-1] > 0.0)
                             and np.all(state.v.values[:-1] > 0.0))
    if (lp_power(grid, state.u, params.p) < opts.collapse_threshold
            or lp_power(grid, state.v, params.q) < opts.collapse_threshold):
        status = Status.COLLAPSED
    elif (diag.pde_residual <= opts.tol_pde
            and grad_res <= opts.tol_grad
            and poho_rel <= opts.tol_pohozaev
            and lam1 > 0.0 and lam2 > 0.0 and interior_positive):
        status = Status.CONVERGED
    else:
        status = Status.MAX_ITER
    return SolveResult(
        state=state, lambda1=lam1, lambda2=lam2, energy=float(c.h(1.0)),
        pohozaev_residual=poho_rel, pde_residual=diag.pde_residual,
        grad_residual=grad_res, iterations=it, status=status)


def _flow_descend(params: Params, grid: RadialGrid,
                  opts: SolverOptions) -> SolveResult:
    """Projected descent on the fiber-maximized energy.

    Each iteration projects onto the Pohozaev manifold, extracts
    least-squares multipliers, steps against the preconditioned PDE
    residual, truncates to the nonnegative cone, and renormalizes the
    masses; the accepted steps make phi non-increasing.
    """
    both_critical = params.is_p_critical and params.is_q_critical

    # collapsing iterates can overflow high powers transiently; the
    # resulting infs are caught by the collapse detectors
    with np.errstate(over="ignore", invalid="ignore"):
        return _flow_descend_inner(params, grid, opts, both_critical)


def _flow_descend_inner(params: Params, grid: RadialGrid,
                        opts: SolverOptions, both_critical: bool) -> SolveResult:
    def finish(state, lam1, lam2, c, it, status, grad_res):
        diag = residuals(params, state, lam1, lam2)
        energy = float(c.h(1.0))
        res = SolveResult(
            state=state, lambda1=lam1, lambda2=lam2, energy=energy,
            pohozaev_residual=abs(diag.pohozaev) / max(c.K, 1.0),
            pde_residual=diag.pde_residual,
            grad_residual=grad_res, iterations=it, status=status)
        if both_critical:
            lhs = lam1 * params.a + lam2 * params.b
            bound = 2.0 * params.beta * math.sqrt(params.a * params.b)
            res = replace(res, identity_lhs=lhs, identity_rhs_bound=bound)
        return res

    state = init_state(params, grid, opts.seed,
                       scale=concentration_lengths(params))
    step = opts.step0
    lam1 = lam2 = 0.0
    c = fiber_coefficients(params, state)
    grad_res = math.inf
    it = 0
    for it in range(1, opts.max_iter + 1):
        # (1) project onto the Pohozaev manifold
        try:
            c = fiber_coefficients(params, state)
            t = _tstar_from_coefficients(c)
        except NoMaximizer:
            lam1, lam2 = multipliers(params, state)
            status = Status.NO_GROUND_STATE if both_critical else Status.COLLAPSED
            return finish(state, lam1, lam2, c, it, status, grad_res)
        if t > opts.collapse_tstar \
                or lp_power(grid, state.u, params.p) < opts.collapse_threshold \
                or lp_power(grid, state.v, params.q) < opts.collapse_threshold:
            lam1, lam2 = multipliers(params, state)
            status = Status.NO_GROUND_STATE if both_critical else Status.COLLAPSED
            return finish(state, lam1, lam2, c, it, status, grad_res)
        if t != 1.0:
            t_mat = min(max(t, 1.0 / _T_CAP), _T_CAP)
            state = PairState(
                normalize_mass(grid, dilate(grid, state.u, t_mat), params.a),
                normalize_mass(grid, dilate(grid, state.v, t_mat), params.b))
            c = fiber_coefficients(params, state)
        phi_here, _ = _phi_of(params, state)

        # (2) multipliers and (3) constrained gradient
        lam1, lam2 = multipliers(params, state)
        gu, gv, scale = _gradient_fields(params, state, lam1, lam2)
        w = grid.weights
        grad_res = math.sqrt(float(np.dot(w, gu**2) + np.dot(w, gv**2))) / scale
        pde_res = max(float(np.max(np.abs(gu))), float(np.max(np.abs(gv)))) / scale
        if grad_res <= opts.tol_grad and pde_res <= opts.tol_pde:
            status = Status.NO_GROUND_STATE if both_critical else Status.CONVERGED
            return finish(state, lam1, lam2, c, it, status, grad_res)

        # (4) preconditioned residual step with Armijo backtracking on phi
        shift = max(1.0, lam1, lam2)
        du = _precondition(grid, shift, gu)
        dv = _precondition(grid, shift, gv)
        slope = float(np.dot(w, gu * du) + np.dot(w, gv * dv))
        accepted = False
        while step >= _MIN_STEP_FACTOR * opts.step0:
            u_try = np.maximum(state.u.values - step * du, 0.0)
            v_try = np.maximum(state.v.values - step * dv, 0.0)
            mu_try = float(np.dot(w, u_try**2))
            mv_try = float(np.dot(w, v_try**2))
            if mu_try <= 0.0 or mv_try <= 0.0:
                step *= opts.backtrack_factor
                continue
            trial = PairState(
                Field(grid, u_try * math.sqrt(params.a / mu_try)),
                Field(grid, v_try * math.sqrt(params.b / mv_try)))
            try:
                phi_trial, _ = _phi_of(params, trial)
            except NoMaximizer:
                step *= opts.backtrack_factor
                continue
            if phi_trial <= phi_here - _ARMIJO * step * slope:
                accepted = True
                break
            step *= opts.backtrack_factor
        if not accepted:
            # no decrease at the smallest step: numerical floor of phi
            status = Status.NO_GROUND_STATE if both_critical else (
                Status.CONVERGED
                if grad_res <= opts.tol_grad and pde_res <= opts.tol_pde
                else Status.MAX_ITER)
            return finish(state, lam1, lam2, c, it, status, grad_res)
        state = trial
        step = min(opts.step0, step * _STEP_GROW)

    lam1, lam2 = multipliers(params, state)
    c = fiber_coefficients(params, state)
    status = Status.NO_GROUND_STATE if both_critical else Status.MAX_ITER
    return finish(state, lam1, lam2, c, it, status, grad_res)
