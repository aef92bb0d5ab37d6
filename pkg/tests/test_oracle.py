"""Single-equation shooting oracle, closed forms, and constants."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

from nlscouple import (
    build_grid,
    gn_constant,
    kinetic,
    mass,
    shoot_ground,
    single_energy_closed_form,
    single_energy_quadrature,
    single_ground,
    single_lambda,
    sobolev_closed_form,
    sobolev_constant,
)
from nlscouple import oracle as oracle_mod

# Regression fixtures for (N, p) = (3, 4) from an independent refined-step
# integration (RK4 step 2.5e-4, tools/make_fixtures.py); the production
# build must reproduce them to 1e-5 relative.
W0_34 = 4.33738767998
L2_34 = 18.8972513025
LAMBDA_34 = 357.106106792       # multiplier at mu = 1, a = 1
KINETIC_34 = 1071.31832037      # |grad u|_2^2 of the normalized state


def test_shoot_residuals_small():
    for N, p in ((1, 3.0), (1, 4.0), (2, 5.0), (3, 4.0), (4, 3.0)):
        prof = shoot_ground(N, p)
        assert prof.residual <= 1e-7, (N, p, prof.residual)


def test_sech_closed_forms():
    # N = 1: w(x) = sqrt(2) sech(x) for p = 4, (3/2) sech^2(x/2) for p = 3
    assert shoot_ground(1, 4.0).w0 == pytest.approx(math.sqrt(2.0), abs=1e-6)
    assert shoot_ground(1, 3.0).w0 == pytest.approx(1.5, abs=1e-6)


def test_regression_fixture_n3_p4():
    prof = shoot_ground(3, 4.0)
    assert prof.w0 == pytest.approx(W0_34, rel=1e-5)
    assert prof.l2_mass == pytest.approx(L2_34, rel=1e-5)


def test_profile_sampling_and_tail():
    prof = shoot_ground(3, 4.0)
    r = np.linspace(0.0, 25.0, 2001)
    w = prof.sample(r)
    assert w[0] == pytest.approx(prof.w0, rel=1e-10)
    assert np.all(np.diff(w) <= 1e-12)          # radially nonincreasing
    assert np.all(w >= 0.0)
    assert w[-1] < 1e-8                          # exponential decay


def test_shoot_ground_validation():
    with pytest.raises(ValueError):
        shoot_ground(5, 3.0)
    with pytest.raises(ValueError):
        shoot_ground(3, 2.0)
    with pytest.raises(ValueError):
        shoot_ground(3, 6.5)   # beyond 2* = 6
    with pytest.raises(ValueError):
        shoot_ground(3, 4.0, tol=0.0)


def test_gn_constant_sech_analytic():
    # closed sech moments for N = 1, p = 4: |w|_2^2 = 4, |w'|_2^2 = 4/3,
    # |w|_4^4 = 16/3, gamma = 1/4
    exact = (16.0 / 3.0) ** 0.25 / (
        (4.0 / 3.0) ** (1.0 / 8.0) * 4.0 ** (3.0 / 8.0))
    assert gn_constant(1, 4.0) == pytest.approx(exact, rel=1e-6)


def test_single_lambda_fixture():
    assert single_lambda(1.0, 4.0, 1.0, 3) == pytest.approx(
        LAMBDA_34, rel=1e-5)
    with pytest.raises(ValueError):
        single_lambda(1.0, 3.0, 1.0, 3)   # below the supercritical window
    with pytest.raises(ValueError):
        single_lambda(-1.0, 4.0, 1.0, 3)


def test_single_lambda_scaling_in_mass():
    # lambda(a) = lambda(1) a^{(p-2)/(2-p gamma_p)}; exponent -2 here
    lam1 = single_lambda(1.0, 4.0, 1.0, 3)
    lam2 = single_lambda(1.0, 4.0, 2.0, 3)
    assert lam2 == pytest.approx(lam1 * 2.0 ** (-2.0), rel=1e-12)


def test_single_ground_mass_and_kinetic():
    lam, u = single_ground(1.0, 4.0, 1.0, 3)
    assert lam == pytest.approx(LAMBDA_34, rel=1e-5)
    g = u.grid
    assert mass(g, u) == pytest.approx(1.0, rel=1e-12)
    assert kinetic(g, u) == pytest.approx(KINETIC_34, rel=1e-3)


def test_energy_quadrature_matches_closed_form():
    grid = build_grid(3, 20.0, 4001)
    for mu in (0.5, 1.0, 2.0):
        for a in (0.5, 1.0, 2.0):
            quad = single_energy_quadrature(mu, 4.0, a, 3, grid)
            closed = single_energy_closed_form(mu, 4.0, a, 3)
            assert quad == pytest.approx(closed, rel=1e-4), (mu, a)


def test_energy_closed_form_monotone_decreasing():
    vals = [single_energy_closed_form(1.0, 4.0, a, 3)
            for a in (0.5, 1.0, 2.0, 4.0)]
    assert all(v > 0 for v in vals)
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_sobolev_constant_against_closed_form():
    for N in (3, 4):
        closed = sobolev_closed_form(N)
        quotient = sobolev_constant(N)
        assert abs(quotient - closed) <= 1e-3 * closed
    with pytest.raises(ValueError):
        sobolev_closed_form(2)


def test_disk_cache_roundtrip_and_corruption(tmp_path, monkeypatch):
    monkeypatch.setenv(oracle_mod.CACHE_DIR_ENV, str(tmp_path))
    oracle_mod._CACHE.clear()
    prof = shoot_ground(3, 4.0)
    files = list(tmp_path.iterdir())
    assert files, "profile was not written to the cache directory"
    # a fresh in-memory cache must load the stored profile
    oracle_mod._CACHE.clear()
    again = shoot_ground(3, 4.0)
    assert again.w0 == pytest.approx(prof.w0, rel=1e-12)
    # corruption must trigger recomputation, never an error
    files[0].write_bytes(b"garbage")
    oracle_mod._CACHE.clear()
    rebuilt = shoot_ground(3, 4.0)
    assert rebuilt.w0 == pytest.approx(prof.w0, rel=1e-10)
    oracle_mod._CACHE.clear()


def test_pure_python_backend_selectable():
    env = dict(os.environ, NLSCOUPLE_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "import nlscouple, nlscouple.oracle as o;"
         "print(nlscouple.BACKEND);"
         "print(repr(o.shoot_ground(1, 4.0).w0))"],
        env=env, capture_output=True, text=True, timeout=300)
    assert out.returncode == 0, out.stderr
    backend, w0 = out.stdout.split()
    assert backend == "python"
    assert float(w0) == pytest.approx(math.sqrt(2.0), abs=1e-6)
