"""Energy, Pohozaev functional, and the fiber-maximized energy.

For a pair (u, v) with prescribed masses, the dilation t -> t^{N/2}(u, v)(t x)
acts on the energy through four scalar coefficients, so maximizing along the
fiber reduces to a one-dimensional root find that is exact to machine
precision; no grid interpolation is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import (
    Field,
    RadialGrid,
    GridMismatchError,
    kinetic,
    lp_power,
    mass,
    pair_inner,
)


class NoMaximizer(ValueError):
    """The fiber energy has no interior maximum (degenerate state)."""


class NumericalFailure(RuntimeError):
    """Root finding for the fiber maximizer did not converge."""


def gamma_exponent(p: float, N: int) -> float:
    """Mass-scaling exponent N(p-2)/(2p) of the L^p term under dilation."""
    if p < 2 or N < 1:
        raise ValueError("need p >= 2 and N >= 1")
    return N * (p - 2.0) / (2.0 * p)


def critical_exponent(N: int) -> float:
    """Sobolev-critical power 2N/(N-2); +inf for N <= 2."""
    if N <= 2:
        return math.inf
    return 2.0 * N / (N - 2.0)


@dataclass(frozen=True)
class Params:
    """Problem data for the linearly coupled system.

    Both powers must lie in the mass-supercritical window
    (2 + 4/N, 2N/(N-2)]; for N = 2 the upper bound is +inf and ``q = inf``
    is accepted as a sentinel (but rejected by energy evaluation).
    """

    N: int
    p: float
    q: float
    mu1: float
    mu2: float
    beta: float
    a: float
    b: float

    def __post_init__(self):
        if self.N not in (1, 2, 3, 4):
            raise ValueError("dimension N must be in {1, 2, 3, 4}")
        low = 2.0 + 4.0 / self.N
        high = critical_exponent(self.N)
        for name, power in (("p", self.p), ("q", self.q)):
            if not power > low:
                raise ValueError(
                    f"{name} must exceed 2 + 4/N = {low} (mass-supercritical window)"
                )
            if power > high:
                raise ValueError(
                    f"{name} must not exceed the critical power {high}"
                )
        if not (self.mu1 > 0 and self.mu2 > 0):
            raise ValueError("mu1 and mu2 must be positive")
        if not (self.a > 0 and self.b > 0):
            raise ValueError("masses a and b must be positive")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")

    @property
    def gamma_p(self) -> float:
        return gamma_exponent(self.p, self.N)

    @property
    def gamma_q(self) -> float:
        if math.isinf(self.q):
            return self.N / 2.0
        return gamma_exponent(self.q, self.N)

    @property
    def is_p_critical(self) -> bool:
        return self.N >= 3 and self.p == critical_exponent(self.N)

    @property
    def is_q_critical(self) -> bool:
        return self.N >= 3 and self.q == critical_exponent(self.N)


@dataclass(frozen=True)
class PairState:
    u: Field
    v: Field

    def __post_init__(self):
        if self.u.grid is not self.v.grid:
            raise GridMismatchError("pair components must share one grid")

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid

    def masses(self) -> tuple[float, float]:
        g = self.grid
        return mass(g, self.u), mass(g, self.v)


@dataclass(frozen=True)
class FiberCoefficients:
    """Scalar data of the fiber energy h(t) = t^2 K/2 - A t^ep - B t^eq - L."""

    K: float
    A: float
    B: float
    L: float
    exp_p: float
    exp_q: float

    def h(self, t):
        t = np.asarray(t, dtype=float)
        return 0.5 * t**2 * self.K - self.A * t**self.exp_p \
            - self.B * t**self.exp_q - self.L

    def dh(self, t):
        t = np.asarray(t, dtype=float)
        return t * self.K - self.exp_p * self.A * t ** (self.exp_p - 1.0) \
            - self.exp_q * self.B * t ** (self.exp_q - 1.0)

    def pohozaev_at(self, t):
        """P evaluated on the dilated state; equals t h'(t)."""
        t = np.asarray(t, dtype=float)
        return t**2 * self.K - self.exp_p * self.A * t**self.exp_p \
            - self.exp_q * self.B * t**self.exp_q


def _check_finite_q(params: Params) -> None:
    if math.isinf(params.q):
        raise ValueError("q = inf sentinel cannot be evaluated; use a finite q")


def fiber_coefficients(params: Params, s: PairState) -> FiberCoefficients:
    _check_finite_q(params)
    g = s.grid
    K = kinetic(g, s.u) + kinetic(g, s.v)
    A = params.mu1 / params.p * lp_power(g, s.u, params.p)
    B = params.mu2 / params.q * lp_power(g, s.v, params.q)
    L = params.beta * pair_inner(g, s.u, s.v)
    return FiberCoefficients(K=K, A=A, B=B, L=L,
                             exp_p=params.p * params.gamma_p,
                             exp_q=params.q * params.gamma_q)


def energy(params: Params, s: PairState) -> float:
    """J(u, v) = K/2 - (mu1/p)|u|_p^p - (mu2/q)|v|_q^q - beta (u, v)."""
    c = fiber_coefficients(params, s)
    return 0.5 * c.K - c.A - c.B - c.L


def pohozaev(params: Params, s: PairState) -> float:
    """P(u, v) = K - mu1 gamma_p |u|_p^p - mu2 gamma_q |v|_q^q (no beta term)."""
    _check_finite_q(params)
    g = s.grid
    K = kinetic(g, s.u) + kinetic(g, s.v)
    return K - params.mu1 * params.gamma_p * lp_power(g, s.u, params.p) \
        - params.mu2 * params.gamma_q * lp_power(g, s.v, params.q)


def single_pohozaev(mu: float, p: float, u: Field, N: int) -> float:
    """Single-equation Pohozaev functional |grad u|^2 - mu gamma_p |u|_p^p."""
    g = u.grid
    if g.dimension != N:
        raise GridMismatchError("field dimension does not match N")
    return kinetic(g, u) - mu * gamma_exponent(p, N) * lp_power(g, u, p)


_TSTAR_MAXITER = 100
_PROBE_POINTS = 64


def _tstar_from_coefficients(c: FiberCoefficients) -> float:
    """Unique positive root of h'(t) = 0 for valid coefficients."""
    K, cp, cq = c.K, c.exp_p * c.A, c.exp_q * c.B
    ep, eq = c.exp_p, c.exp_q
    if not (K > 0) or cp + cq <= 0:
        raise NoMaximizer("need positive kinetic and nonlinear coefficients")

    # g(t) = K - cp t^{ep-2} - cq t^{eq-2} is strictly decreasing, root unique.
    def g(t):
        return K - cp * t ** (ep - 2.0) - cq * t ** (eq - 2.0)

    def dg(t):
        return -cp * (ep - 2.0) * t ** (ep - 3.0) \
            - cq * (eq - 2.0) * t ** (eq - 3.0)

    e_min = min(ep, eq) if cq > 0 else ep
    if cp == 0:
        e_min = eq
    t = (K / (cp + cq)) ** (1.0 / (e_min - 2.0))
    # convergence is judged on g(t) = P(t)/t^2, which stays O(K) near the
    # root regardless of where the root sits on the t-axis
    tol = 1e-12 * max(K, 1.0)
    converged = False
    for _ in range(_TSTAR_MAXITER):
        val = g(t)
        if abs(val) <= tol:
            converged = True
            break
        step = val / dg(t)
        t_new = t - step
        if not (t_new > 0) or not math.isfinite(t_new):
            break
        t = t_new
    if not converged:
        # geometric bracket expansion, then bisection on the monotone g
        lo, hi = 1e-6, 1e6
        while g(lo) <= 0:
            lo *= 0.5
            if lo < 1e-30:
                raise NumericalFailure("no sign change toward t -> 0")
        while g(hi) >= 0:
            hi *= 2.0
            if hi > 1e30:
                raise NumericalFailure("no sign change toward t -> inf")
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if g(mid) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        t = 0.5 * (lo + hi)
        if abs(g(t)) > 1e-9 * max(K, 1.0):
            raise NumericalFailure("fiber maximizer did not reach tolerance")
    # one-sided sign structure: P > 0 left of t*, P < 0 right of t*
    probes = np.geomspace(t * 1e-3, t * 1e3, _PROBE_POINTS)
    signs = np.sign(c.pohozaev_at(probes))
    left = signs[probes < t * (1 - 1e-9)]
    right = signs[probes > t * (1 + 1e-9)]
    if np.any(left < 0) or np.any(right > 0):
        raise NumericalFailure("fiber derivative changes sign more than once")
    return float(t)


def fiber_maximizer(params: Params, s: PairState) -> float:
    """The unique t* > 0 maximizing the fiber energy of (u, v)."""
    return _tstar_from_coefficients(fiber_coefficients(params, s))


def phi(params: Params, s: PairState) -> float:
    """Fiber-maximized energy max_{t>0} J(t * (u, v))."""
    c = fiber_coefficients(params, s)
    return float(c.h(_tstar_from_coefficients(c)))
