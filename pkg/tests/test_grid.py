"""Radial grid: quadrature, Laplacian, dilation, and norm primitives."""

import math

import numpy as np
import pytest

from nlscouple import (
    Field,
    GridMismatchError,
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


def gaussian(grid, width=1.0):
    return Field(grid, np.exp(-grid.nodes**2 / (2.0 * width**2)))


def test_build_grid_validation():
    with pytest.raises(ValueError):
        build_grid(5, 8.0, 2001)
    with pytest.raises(ValueError):
        build_grid(3, -1.0, 2001)
    with pytest.raises(ValueError):
        build_grid(3, 8.0, 8)


def test_sphere_surface_values():
    assert sphere_surface(1) == pytest.approx(2.0)
    assert sphere_surface(2) == pytest.approx(2.0 * math.pi)
    assert sphere_surface(3) == pytest.approx(4.0 * math.pi)
    assert sphere_surface(4) == pytest.approx(2.0 * math.pi**2)


def test_integrate_gaussian_3d():
    # integral of exp(-r^2) over R^3 is pi^{3/2}
    grid = build_grid(3, 8.0, 2001)
    f = Field(grid, np.exp(-grid.nodes**2))
    assert integrate(grid, f) == pytest.approx(math.pi**1.5, rel=1e-6)


def test_integrate_gaussian_2d():
    # over R^2 the truncated integral is pi (1 - e^{-64})
    grid = build_grid(2, 8.0, 2001)
    f = Field(grid, np.exp(-grid.nodes**2))
    exact = math.pi * (1.0 - math.exp(-64.0))
    assert integrate(grid, f) == pytest.approx(exact, rel=1e-8)


def test_laplacian_gaussian_pointwise():
    # Lap exp(-r^2/2) = (r^2 - N) exp(-r^2/2) in R^N
    grid = build_grid(3, 8.0, 4001)
    f = gaussian(grid)
    lap = laplacian(grid, f)
    exact = (grid.nodes**2 - 3.0) * f.values
    # second-order stencil: error O(h^2); exclude the outer boundary row
    err = np.max(np.abs(lap.values[:-1] - exact[:-1]))
    assert err <= 10.0 * grid.h**2


def test_kinetic_matches_analytic():
    # |grad exp(-r^2/2)|_2^2 over R^3 equals (3/2) pi^{3/2}
    grid = build_grid(3, 12.0, 8001)
    f = gaussian(grid)
    exact = 1.5 * math.pi**1.5
    assert kinetic(grid, f) == pytest.approx(exact, rel=1e-6)
    assert grad_inner(grid, f, f) == pytest.approx(exact, rel=1e-6)


def test_kinetic_is_laplacian_pairing():
    # the discrete identity <-Lap f, f> = kinetic(f) holds exactly
    grid = build_grid(3, 6.0, 513)
    rng = np.random.default_rng(7)
    vals = rng.standard_normal(grid.n_nodes) * np.exp(-grid.nodes)
    f = Field(grid, vals)
    lhs = float(np.dot(grid.weights, -laplacian(grid, f).values * f.values))
    assert kinetic(grid, f) == pytest.approx(lhs, rel=1e-14, abs=1e-14)


def test_dilate_matches_analytic():
    grid = build_grid(3, 16.0, 4001)
    f = gaussian(grid)
    t = 1.3
    g = dilate(grid, f, t)
    exact = t**1.5 * np.exp(-(t * grid.nodes) ** 2 / 2.0)
    assert np.max(np.abs(g.values - exact)) <= 1e-5


def test_dilate_preserves_mass():
    grid = build_grid(3, 16.0, 4001)
    f = gaussian(grid)
    m0 = mass(grid, f)
    for t in (0.5, 1.7, 2.5):
        assert mass(grid, dilate(grid, f, t)) == pytest.approx(m0, rel=1e-4)


def test_dilate_group_law():
    grid = build_grid(3, 16.0, 4001)
    f = gaussian(grid)
    once = dilate(grid, f, 1.2 * 1.4)
    twice = dilate(grid, dilate(grid, f, 1.2), 1.4)
    assert np.max(np.abs(once.values - twice.values)) <= 1e-4


def test_dilate_rejects_nonpositive_t():
    grid = build_grid(3, 8.0, 101)
    f = gaussian(grid)
    with pytest.raises(ValueError):
        dilate(grid, f, 0.0)
    with pytest.raises(ValueError):
        dilate(grid, f, -1.0)


def test_normalize_mass_and_lp():
    grid = build_grid(3, 10.0, 2001)
    f = normalize_mass(grid, gaussian(grid), 2.5)
    assert mass(grid, f) == pytest.approx(2.5, rel=1e-14)
    assert lp_norm(grid, f, 2.0) == pytest.approx(math.sqrt(2.5), rel=1e-12)
    assert lp_power(grid, f, 4.0) == pytest.approx(
        lp_norm(grid, f, 4.0) ** 4, rel=1e-12)
    with pytest.raises(ValueError):
        lp_norm(grid, f, 0.5)


def test_grid_mismatch_raises():
    g1 = build_grid(3, 8.0, 101)
    g2 = build_grid(3, 8.0, 201)
    f1, f2 = gaussian(g1), gaussian(g2)
    with pytest.raises(GridMismatchError):
        integrate(g1, f2)
    with pytest.raises(GridMismatchError):
        pair_inner(g1, f1, f2)


def test_field_rejects_bad_values():
    grid = build_grid(3, 8.0, 101)
    with pytest.raises(ValueError):
        Field(grid, np.zeros(100))
    bad = np.zeros(101)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        Field(grid, bad)


def test_field_values_immutable():
    grid = build_grid(3, 8.0, 101)
    f = gaussian(grid)
    with pytest.raises(ValueError):
        f.values[0] = 5.0
