#!/usr/bin/env python3
"""High-precision reference values frozen in the C++ tests.

Each value is computed here independently with mpmath and printed next to the
constant the tests use. Exit status is nonzero if any constant drifts.
"""

import sys

from mpmath import mp, mpf, atanh, cosh, exp, gamma, log, quad, sqrt, tanh, findroot, inf

mp.dps = 40


def m_z(s):
    return (1 - exp(-s)) / s


def c_z(s, w):
    return m_z(s + w) - m_z(s) * m_z(w)


def t_beta(beta):
    return findroot(lambda t: tanh(beta * t) - t, mpf("0.99"))


def unnorm_logdensity(p, n, beta):
    x = 2 * p - 1
    return -(n / (2 * beta)) * atanh(x) ** 2 - (n / mpf(2) + 1) * log(1 - x * x)


def log_norm(n, beta):
    # p = (1 + tanh y)/2 turns the mixing integral into a Gaussian one:
    # ∫ f(p) dp = 1/2 ∫ cosh(y)^n exp(-n y^2 / (2 beta)) dy.
    beta = mpf(beta)
    mass = quad(lambda y: cosh(y) ** n * exp(-n * y * y / (2 * beta)), [-inf, 0, inf]) / 2
    return log(mass)


def couple(beta):
    t = t_beta(beta)
    plus, minus = (1 + t) / 2, (1 - t) / 2
    return plus * plus, 4 * (min(plus, minus) - plus * minus)


def main():
    theorem_cross, bridge_cross = couple(2)
    rows = [
        ("C_Z(1,1)", c_z(mpf(1), mpf(1)), 0.032755957487966, 1e-14),
        ("C_Z(0.5,0.8)", c_z(mpf("0.5"), mpf("0.8")), 0.017910505424981, 1e-14),
        ("Z_F", mpf(3) ** mpf("0.25") / sqrt(2) * gamma(mpf("0.25")), 3.37401019780002524288, 1e-14),
        ("Z_F by quadrature", quad(lambda x: exp(-x ** 4 / 12), [-inf, 0, inf]), 3.37401019780002524288, 1e-14),
        ("t_2", t_beta(2), 0.957504024077269, 1e-12),
        ("t_1.001", findroot(lambda t: tanh(mpf("1.001") * t) - t, mpf("0.05")), 0.054723010317843, 1e-12),
        ("log f(0.75), n=10, beta=0.5", unnorm_logdensity(mpf("0.75"), 10, mpf("0.5")),
         -1.29127996732076937997, 1e-16),
        ("log normaliser, n=8, beta=2.5", log_norm(8, mpf("2.5")), 4.90777103435377654436, 1e-12),
        ("P(M=0), n=2, beta=1", 1 / (1 + exp(1)), 0.268941421369995, 1e-14),
        ("couple theorem cross, beta=2", theorem_cross, 0.957955501069675, 1e-12),
        ("couple bridge cross, beta=2", bridge_cross, 0.001805907969625, 1e-12),
    ]
    bad = 0
    for name, value, frozen, tol in rows:
        ok = abs(value - mpf(frozen)) <= tol
        bad += not ok
        print(f"{'ok  ' if ok else 'DIFF'} {name:34s} {mp.nstr(value, 21):>26s}  frozen {frozen!r}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
