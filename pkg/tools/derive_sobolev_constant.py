#!/usr/bin/env python3
"""Derive the best Sobolev constant S used by the library.

S is the optimal constant in |u|_{2*}^2 <= S^{-1} |grad u|_2^2 written as
the Rayleigh quotient S = |grad U|_2^2 / |U|_{2*}^2 of the extremal
profile U(r) = (1 + r^2)^{-(N-2)/2}.  Both integrals reduce to Beta
functions:

    |grad U|_2^2 = omega_N (N-2)^2 B(N/2 + 1, N/2 - 1) / 2
    |U|_{2*}^{2*} = omega_N B(N/2, N/2) / 2

with omega_N the surface of the unit (N-1)-sphere.  Simplifying the
quotient gives the closed form

    S = N (N - 2) pi (Gamma(N/2) / Gamma(N))^{2/N}

which the script verifies symbolically and numerically for N = 3, 4.
"""

import sympy as sp


def derive(N):
    r = sp.symbols("r", positive=True)
    omega = 2 * sp.pi ** sp.Rational(N, 2) / sp.gamma(sp.Rational(N, 2))
    U = (1 + r**2) ** (-sp.Rational(N - 2, 2))
    dU = sp.diff(U, r)
    num = omega * sp.integrate(dU**2 * r ** (N - 1), (r, 0, sp.oo))
    two_star = sp.Rational(2 * N, N - 2)
    den = omega * sp.integrate(U**two_star * r ** (N - 1), (r, 0, sp.oo))
    S = sp.simplify(num / den ** sp.Rational(2, int(two_star)))
    closed = sp.simplify(
        N * (N - 2) * sp.pi
        * (sp.gamma(sp.Rational(N, 2)) / sp.gamma(N)) ** sp.Rational(2, N))
    assert sp.simplify(S - closed) == 0, (S, closed)
    return closed


def main():
    for N in (3, 4):
        closed = derive(N)
        print(f"N = {N}: S = {sp.simplify(closed)} = {float(closed):.12f}")


if __name__ == "__main__":
    main()
