"""Acceptance criteria, one test per criterion.

Each test prints exactly one ``criterion NN: PASS/FAIL`` line (visible in
the captured output on failure and under ``-s``) and then asserts, so the
pytest verdict and the printed verdict always agree.
"""

import math
import time

import numpy as np
import pytest

from nlscouple import (
    Params,
    SolverOptions,
    Status,
    build_grid,
    check_nonexistence_identity,
    descend,
    fiber_coefficients,
    gn_constant,
    grad_inner,
    laplacian,
    lp_norm,
    kinetic,
    mass,
    shoot_ground,
    single_energy_closed_form,
    single_energy_quadrature,
    sobolev_closed_form,
    sobolev_constant,
    sweep,
)
from nlscouple import Field, survey
from nlscouple.functionals import FiberCoefficients, _tstar_from_coefficients
from nlscouple.survey import render_csv


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {num:02d}: {detail}"


def test_criterion_01_oracle_fidelity():
    # sup-residual <= 1e-7 on five (N, p) pairs; sech closed forms to 1e-6
    t0 = time.perf_counter()
    residuals = {}
    for N, p in ((1, 3.0), (1, 4.0), (2, 5.0), (3, 4.0), (4, 3.0)):
        residuals[(N, p)] = shoot_ground(N, p).residual
    w0_p4 = shoot_ground(1, 4.0).w0
    w0_p3 = shoot_ground(1, 3.0).w0
    elapsed = time.perf_counter() - t0
    ok = (all(r <= 1e-7 for r in residuals.values())
          and abs(w0_p4 - math.sqrt(2.0)) <= 1e-6
          and abs(w0_p3 - 1.5) <= 1e-6
          and elapsed <= 10.0)
    _verdict(1, ok, f"max residual {max(residuals.values()):.2e}, "
             f"|w0 - sqrt2| = {abs(w0_p4 - math.sqrt(2.0)):.2e}, "
             f"|w0 - 3/2| = {abs(w0_p3 - 1.5):.2e}, {elapsed:.1f}s")


def test_criterion_02_closed_form_energy():
    # quadrature energy vs closed form, rel <= 1e-4, 4001 nodes, r_max 20
    t0 = time.perf_counter()
    grid = build_grid(3, 20.0, 4001)
    worst = 0.0
    for mu in (0.5, 1.0, 2.0):
        for a in (0.5, 1.0, 2.0):
            quad = single_energy_quadrature(mu, 4.0, a, 3, grid)
            closed = single_energy_closed_form(mu, 4.0, a, 3)
            worst = max(worst, abs(quad - closed) / abs(closed))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed <= 20.0
    _verdict(2, ok, f"worst relative error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_03_small_beta_bracket():
    # beta = 1e-3 energy within the decoupled bracket; positive multipliers
    t0 = time.perf_counter()
    params = Params(N=3, p=4.0, q=4.0, mu1=1.0, mu2=1.0, beta=1e-3,
                    a=1.0, b=1.0)
    sigma = (single_energy_closed_form(1.0, 4.0, 1.0, 3)
             + single_energy_closed_form(1.0, 4.0, 1.0, 3))
    result = descend(params, survey.default_grid(params), SolverOptions())
    elapsed = time.perf_counter() - t0
    lo = sigma - params.beta - 5e-3 * sigma
    hi = sigma + 5e-3 * sigma
    ok = (result.status is Status.CONVERGED
          and lo <= result.energy <= hi
          and result.lambda1 > 0 and result.lambda2 > 0
          and result.pde_residual <= 1e-6
          and elapsed <= 60.0)
    _verdict(3, ok, f"energy {result.energy:.6f} in [{lo:.6f}, {hi:.6f}], "
             f"lambda = ({result.lambda1:.3f}, {result.lambda2:.3f}), "
             f"pde {result.pde_residual:.2e}, {elapsed:.1f}s")


def test_criterion_04_existence_fixture():
    # 3 dimensions x 3 couplings: Converged, positive multipliers,
    # positive components, Pohozaev residual <= 1e-8 (scaled)
    t0 = time.perf_counter()
    failures = []
    worst_poho = 0.0
    for N, pq, n_nodes in ((2, 5.0, 40001), (3, 4.0, 40001),
                           (4, 3.5, 60001)):
        grid = None
        for beta in (0.5, 1.0, 5.0):
            params = Params(N=N, p=pq, q=pq, mu1=1.0, mu2=1.0, beta=beta,
                            a=1.0, b=1.0)
            if grid is None:
                grid = survey.default_grid(params, n_nodes=n_nodes)
            result = descend(params, grid, SolverOptions())
            worst_poho = max(worst_poho, result.pohozaev_residual)
            good = (result.status is Status.CONVERGED
                    and result.lambda1 > 0 and result.lambda2 > 0
                    and np.all(result.state.u.values[:-1] > 0)
                    and np.all(result.state.v.values[:-1] > 0)
                    and result.pohozaev_residual <= 1e-8)
            if not good:
                failures.append((N, beta, result.status.value))
    elapsed = time.perf_counter() - t0
    ok = not failures and elapsed <= 300.0
    _verdict(4, ok, f"failures {failures or 'none'}, "
             f"worst pohozaev {worst_poho:.2e}, {elapsed:.1f}s")


def test_criterion_05_beta_monotonicity():
    # energies non-increasing in beta within 1e-6 slack
    base = Params(N=3, p=4.0, q=4.0, mu1=1.0, mu2=1.0, beta=1.0,
                  a=1.0, b=1.0)
    records = sweep(base, "beta", [0.1, 0.5, 1.0, 2.0])
    energies = [r.energy for r in records]
    statuses = [r.status for r in records]
    ok = (all(s is Status.CONVERGED for s in statuses)
          and all(e1 - e2 >= -1e-6
                  for e1, e2 in zip(energies, energies[1:])))
    _verdict(5, ok, "energies " + ", ".join(f"{e:.6f}" for e in energies))


def test_criterion_06_mass_monotonicity():
    # closed-form single-equation level strictly decreasing in the mass
    vals = [single_energy_closed_form(1.0, 4.0, a, 3)
            for a in (0.5, 1.0, 2.0, 4.0)]
    ok = all(x > y for x, y in zip(vals, vals[1:]))
    _verdict(6, ok, "levels " + ", ".join(f"{v:.6f}" for v in vals))


def test_criterion_07_sobolev_constant():
    # Aubin-Talenti Rayleigh quotient vs Gamma-function closed form, 1e-3
    errs = {}
    for N in (3, 4):
        closed = sobolev_closed_form(N)
        errs[N] = abs(sobolev_constant(N) - closed) / closed
    ok = all(e <= 1e-3 for e in errs.values())
    _verdict(7, ok, f"relative errors N=3: {errs[3]:.2e}, N=4: {errs[4]:.2e}")


def test_criterion_08_critical_threshold():
    # sufficient condition holds with positive margin AND the solver
    # converges with positive multipliers within tolerance
    t0 = time.perf_counter()
    params = Params(N=3, p=4.0, q=6.0, mu1=1.0, mu2=1.0, beta=0.1,
                    a=1.0, b=0.01)
    report = survey.threshold_critical(params)
    threshold_ok = (report.sufficient_condition_holds and report.margin > 0)
    # frozen regression values of the condition itself
    assert report.lhs == pytest.approx(1.478035262230457, rel=1e-12)
    assert report.rhs == pytest.approx(4.2736640683230425, rel=1e-12)
    result = descend(params, build_grid(3, 3.0, 20001), SolverOptions())
    elapsed = time.perf_counter() - t0
    solver_ok = (result.status is Status.CONVERGED
                 and result.lambda1 > 0 and result.lambda2 > 0
                 and result.pde_residual <= 1e-6
                 and result.pohozaev_residual <= 1e-8)
    ok = threshold_ok and solver_ok and elapsed <= 120.0
    _verdict(8, ok, f"threshold margin {report.margin:.4f} "
             f"({'holds' if threshold_ok else 'fails'}); solver status "
             f"{result.status.value}, lambda2 = {result.lambda2:.4g}, "
             f"{elapsed:.1f}s")


def test_criterion_09_nonexistence():
    # Sobolev-critical p = q = 2*: never Converged, identity check true
    t0 = time.perf_counter()
    bad = []
    for N in (3, 4):
        crit = 2.0 * N / (N - 2.0)
        grid = build_grid(N, 8.0, 2001)
        for beta in (0.5, 1.0):
            params = Params(N=N, p=crit, q=crit, mu1=1.0, mu2=1.0,
                            beta=beta, a=1.0, b=1.0)
            for seed in (0, 1):
                result = descend(params, grid,
                                 SolverOptions(max_iter=3000, seed=seed))
                if result.status is Status.CONVERGED:
                    bad.append((N, beta, seed, "converged"))
                elif not check_nonexistence_identity(result, params):
                    bad.append((N, beta, seed, "identity"))
    elapsed = time.perf_counter() - t0
    ok = not bad
    _verdict(9, ok, f"violations {bad or 'none'}, {elapsed:.1f}s")


def test_criterion_10_property_suites():
    failures = []

    # dilation group law (mass-preserving fiber map, PCHIP resampling)
    from nlscouple import dilate

    grid3 = build_grid(3, 16.0, 4001)
    f = Field(grid3, np.exp(-grid3.nodes**2 / 2.0))
    once = dilate(grid3, f, 1.2 * 1.4)
    twice = dilate(grid3, dilate(grid3, f, 1.2), 1.4)
    if np.max(np.abs(once.values - twice.values)) > 1e-4:
        failures.append("dilation group law")
    if abs(mass(grid3, dilate(grid3, f, 1.7)) - mass(grid3, f)) \
            > 1e-4 * mass(grid3, f):
        failures.append("dilation mass preservation")

    # Gagliardo-Nirenberg inequality on 500 random radial fields
    rng = np.random.default_rng(0)
    gridg = build_grid(3, 12.0, 1501)
    C = gn_constant(3, 4.0)
    gamma = 0.75  # N (p-2)/(2p) at N = 3, p = 4
    r = gridg.nodes
    for k in range(500):
        vals = np.zeros_like(r)
        for _ in range(3):
            amp = rng.uniform(-1.0, 1.0)
            center = rng.uniform(0.0, 4.0)
            width = rng.uniform(0.3, 2.0)
            vals += amp * np.exp(-((r - center) / width) ** 2)
        g = Field(gridg, vals)
        m = mass(gridg, g)
        if m < 1e-12:
            continue
        lhs = lp_norm(gridg, g, 4.0)
        rhs = C * kinetic(gridg, g) ** (gamma / 2.0) \
            * m ** ((1.0 - gamma) / 2.0)
        if lhs > rhs * (1.0 + 1e-3):
            failures.append(f"GN violated on field {k}")
            break

    # fiber maximizer vs dense-scan oracle on 100 coefficient sets
    rng = np.random.default_rng(1)
    for k in range(100):
        K, A, B = rng.uniform(0.1, 10.0, size=3)
        c = FiberCoefficients(K=K, A=A, B=B, L=0.0, exp_p=3.0, exp_q=3.0)
        t = _tstar_from_coefficients(c)
        ts = np.geomspace(t / 100.0, t * 100.0, 1_000_001)
        t_scan = float(ts[np.argmax(c.h(ts))])
        if abs(t - t_scan) > (ts[1] / ts[0] - 1.0) * t_scan * 2.0:
            failures.append(f"fiber maximizer off on set {k}")
            break

    # integration by parts: <-Lap f, g> matches the gradient inner product
    g1 = Field(grid3, np.exp(-grid3.nodes**2 / 2.0))
    g2 = Field(grid3, grid3.nodes**2 * np.exp(-grid3.nodes**2 / 1.5))
    lhs = float(np.dot(grid3.weights, -laplacian(grid3, g1).values
                       * g2.values))
    rhs = grad_inner(grid3, g1, g2)
    if abs(lhs - rhs) > 1e-5 * max(abs(rhs), 1.0):
        failures.append("integration by parts")

    # byte-deterministic sweep CSV across worker counts and repeats
    base = Params(N=3, p=4.0, q=4.0, mu1=1.0, mu2=1.0, beta=1.0,
                  a=1.0, b=1.0)
    gridc = build_grid(3, 8.0, 2001)
    fast = SolverOptions(max_iter=300)
    ref = render_csv(sweep(base, "beta", [0.5, 1.0, 2.0], opts=fast,
                           grid=gridc, jobs=1))
    for jobs in (1, 3):
        text = render_csv(sweep(base, "beta", [0.5, 1.0, 2.0], opts=fast,
                                grid=gridc, jobs=jobs))
        if text.encode() != ref.encode():
            failures.append(f"CSV not deterministic at jobs={jobs}")

    _verdict(10, not failures, f"failures {failures or 'none'}")
