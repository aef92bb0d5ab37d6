#!/usr/bin/env python3
"""Regenerate the frozen numerical fixtures used by the test suite.

Every expected value hard-coded in tests/ comes from an independent
computation performed here:

* (N, p) = (3, 4) profile regression values from a refined-step
  integration (RK4 step 2.5e-4, a quarter of the production step);
* the derived multiplier and kinetic-energy fixtures at mu = 1, a = 1;
* the critical-threshold report for the (N, p, q) = (3, 4, 6) fixture.

Run from the repository root:

    python3 tools/make_fixtures.py
"""

import nlscouple.oracle as oracle
from nlscouple import Params, survey


def refined_profile(N, p, step=2.5e-4):
    saved = oracle.H_ODE
    oracle.H_ODE = step
    try:
        return oracle._build_profile(N, p)
    finally:
        oracle.H_ODE = saved


def main():
    prof = refined_profile(3, 4.0)
    print("# (N, p) = (3, 4) refined-step regression fixtures")
    print(f"W0_34      = {prof.w0:.12g}")
    print(f"L2_34      = {prof.l2_mass:.12g}")
    print(f"residual   = {prof.residual:.3g}")

    l2 = prof.l2_mass
    lam = (1.0 / l2) ** (-2.0)        # exponent (p-2)/(2 - p gamma_p) = -2
    amp2 = lam                        # (lam/mu)^{2/(p-2)} at mu = 1, p = 4
    kin_u = amp2 * lam ** (-0.5) * prof.kinetic
    print(f"LAMBDA_34  = {lam:.12g}")
    print(f"KINETIC_34 = {kin_u:.12g}")

    print()
    print("# critical-threshold fixture (N=3, p=4, q=6, beta=0.1, b=0.01)")
    params = Params(N=3, p=4.0, q=6.0, mu1=1.0, mu2=1.0, beta=0.1,
                    a=1.0, b=0.01)
    report = survey.threshold_critical(params)
    print(f"lhs    = {report.lhs!r}")
    print(f"rhs    = {report.rhs!r}")
    print(f"margin = {report.margin!r}")


if __name__ == "__main__":
    main()
