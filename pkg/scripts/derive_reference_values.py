"""Independent high-precision reference values for the test suite.

Evaluates the kernels, the Laguerre/Weyl-basis functions and a few Poisson
sums straight from their defining formulas in 50-digit arithmetic, without
importing the package.  Output is written to tests/data/reference_values.json.

    python3 scripts/derive_reference_values.py
"""

import json
from fractions import Fraction
from math import comb, factorial
from pathlib import Path

import mpmath as mp

mp.mp.dps = 50
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "reference_values.json"


def quantum(n, t, g, kappa):
    g, kappa, t = mp.mpf(g), mp.mpf(kappa), mp.mpf(t)
    lam = 1j * g * n + 2 * kappa
    delta = mp.sqrt(lam**2 - 4 * kappa**2)
    if delta == 0:
        return lam, delta, 2 * kappa * t / (1 + 2 * kappa * t), 1 / (1 + 2 * kappa * t)
    den = delta * mp.cosh(delta * t) + lam * mp.sinh(delta * t)
    return lam, delta, 2 * kappa * mp.sinh(delta * t) / den, delta / den


def classical(n, t, g, kappa):
    g, kappa, t = mp.mpf(g), mp.mpf(kappa), mp.mpf(t)
    s = mp.sqrt(1j * g * kappa * n)
    if s == 0:
        # sinh(2ts)/(4s) -> t/2
        den = 1 + (4 * kappa + 1j * g * n) * t / 2
        return 1 / den, (4 * kappa - 1j * g * n) * t / 2 / den
    den = 4 * s * mp.cosh(2 * t * s) + (4 * kappa + 1j * g * n) * mp.sinh(2 * t * s)
    return 4 * s / den, (4 * kappa - 1j * g * n) * mp.sinh(2 * t * s) / den


def laguerre_rational(m, a, x):
    # L_m^a(x) = sum_k (-1)^k C(m+a, m-k) x^k / k!
    x = Fraction(x)
    return sum(Fraction((-1) ** k * comb(m + a, m - k), factorial(k)) * x**k for k in range(m + 1))


def pi_brute(m, n, alpha):
    if n < m:
        return mp.conj(pi_brute(n, m, alpha))
    alpha = mp.mpc(alpha)
    x = 4 * abs(alpha) ** 2
    k = n - m
    lag = mp.fsum((-1) ** j * mp.binomial(n, m - j) * x**j / mp.factorial(j) for j in range(m + 1))
    return (-1) ** m / mp.pi * mp.sqrt(mp.factorial(m) / mp.factorial(n)) * mp.exp(-x / 2) * (2 * alpha) ** k * lag


def c(z):
    z = mp.mpc(z)
    return [mp.nstr(z.real, 40), mp.nstr(z.imag, 40)]


def poisson_mass(mean, nmax):
    mean = mp.mpf(mean)
    return mp.fsum(mp.exp(-mean) * mean**k / mp.factorial(k) for k in range(nmax + 1))


def main():
    ref = {"kernels": [], "laguerre": [], "pi_mn": [], "poisson": []}
    points = [
        (1, 5, 0.1, 0.01), (2, 3, 0.1, 0.01), (-1, 5, 0.1, 0.01), (7, 31.4, 0.1, 0.01),
        (40, 15.7, 0.1, 0.01), (1, 1e-4, 0.1, 0.01), (3, 2.5, 1.0, 0.3), (-5, 100, 0.1, 0.01),
        (1, 5, 0.1, 0.0), (0, 10, 0.1, 0.01), (1, 1e3, 0.1, 0.01),
    ]
    for n, t, g, kappa in points:
        lam, delta, gam, zet = quantum(n, t, g, kappa)
        u, v = classical(n, t, g, kappa)
        ref["kernels"].append(dict(n=n, t=t, g=g, kappa=kappa, lam=c(lam), delta=c(delta),
                                   gamma=c(gam), zeta=c(zet), u=c(u), v=c(v)))
    for m, a, x in [(10, 4, "3.5"), (0, 3, "2"), (1, 2, "0.25"), (25, 0, "7.5"), (12, 9, "40")]:
        val = laguerre_rational(m, a, Fraction(x))
        ref["laguerre"].append(dict(m=m, a=a, x=x, value=mp.nstr(mp.mpf(val.numerator) / val.denominator, 40)))
    for m, n, alpha in [(3, 5, 0.7 + 0.2j), (5, 3, 0.7 + 0.2j), (0, 0, 0.3 - 0.4j), (8, 8, 1.1 + 0.9j),
                        (2, 17, 2.4 - 1.3j), (20, 23, 4.5 + 2.0j), (6, 1, -0.8 + 0.05j)]:
        ref["pi_mn"].append(dict(m=m, n=n, alpha=[alpha.real, alpha.imag], value=c(pi_brute(m, n, alpha))))
    for mean, nmax in [(9, 39), (4, 26), (9, 10)]:
        ref["poisson"].append(dict(mean=mean, nmax=nmax, mass=mp.nstr(poisson_mass(mean, nmax), 40),
                                   tail=mp.nstr(1 - poisson_mass(mean, nmax), 40)))
    OUT.write_text(json.dumps(ref, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
