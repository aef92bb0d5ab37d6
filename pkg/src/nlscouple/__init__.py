"""Normalized ground states of linearly coupled Schrodinger systems.

The package computes normalized solutions (u, v, lambda1, lambda2) of

    -Lap u + lambda1 u = mu1 |u|^{p-2} u + beta v
    -Lap v + lambda2 v = mu2 |v|^{q-2} v + beta u

with prescribed masses |u|_2^2 = a, |v|_2^2 = b, via the fiber-maximized
energy on the Pohozaev manifold, together with an exact single-equation
shooting oracle, best-constant utilities, threshold surveys, and a CLI.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .functionals import (
    NoMaximizer,
    NumericalFailure,
    PairState,
    Params,
    critical_exponent,
    energy,
    fiber_coefficients,
    fiber_maximizer,
    gamma_exponent,
    phi,
    pohozaev,
    single_pohozaev,
)
from .grid import (
    Field,
    GridMismatchError,
    RadialGrid,
    build_grid,
    dilate,
    grad_inner,
    integrate,
    kinetic,
    laplacian,
    lp_norm,
    lp_power,
    mass,
    normalize_mass,
    pair_inner,
    sphere_surface,
)
from .oracle import (
    GroundProfile,
    RefineDomain,
    gn_constant,
    shoot_ground,
    single_energy_closed_form,
    single_energy_quadrature,
    single_ground,
    single_lambda,
    sobolev_closed_form,
    sobolev_constant,
)
from .solver import (
    Diagnostics,
    Misuse,
    SolveResult,
    SolverOptions,
    Status,
    check_nonexistence_identity,
    concentration_lengths,
    descend,
    init_state,
    multipliers,
    project_pohozaev,
    residuals,
)
from .survey import (
    SweepRecord,
    ThresholdReport,
    nonexistence_map,
    render_csv,
    sweep,
    threshold_critical,
    write_csv,
)

__all__ = [
    "BACKEND",
    "Diagnostics",
    "Field",
    "GroundProfile",
    "Misuse",
    "NoMaximizer",
    "NumericalFailure",
    "PairState",
    "Params",
    "RadialGrid",
    "RefineDomain",
    "SolveResult",
    "SolverOptions",
    "Status",
    "SweepRecord",
    "ThresholdReport",
    "GridMismatchError",
    "build_grid",
    "check_nonexistence_identity",
    "concentration_lengths",
    "critical_exponent",
    "descend",
    "dilate",
    "energy",
    "fiber_coefficients",
    "fiber_maximizer",
    "gamma_exponent",
    "gn_constant",
    "grad_inner",
    "init_state",
    "integrate",
    "kinetic",
    "laplacian",
    "lp_norm",
    "lp_power",
    "mass",
    "multipliers",
    "nonexistence_map",
    "normalize_mass",
    "pair_inner",
    "phi",
    "pohozaev",
    "project_pohozaev",
    "render_csv",
    "residuals",
    "shoot_ground",
    "single_pohozaev",
    "sphere_surface",
    "single_energy_closed_form",
    "single_energy_quadrature",
    "single_ground",
    "single_lambda",
    "sobolev_closed_form",
    "sobolev_constant",
    "sweep",
    "threshold_critical",
    "write_csv",
]
