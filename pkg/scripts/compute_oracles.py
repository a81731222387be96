"""Independent arbitrary-precision reference values frozen into the test suite.

Everything here is evaluated from the closed forms directly with mpmath and
never imports the package, so the frozen numbers cannot inherit a bug from
the code they check.
"""

from fractions import Fraction
from itertools import product

import mpmath as mp

mp.mp.dps = 50
TWO_PI = 2 * mp.pi


def rb_case():
    gamma = TWO_PI * mp.mpf("6e6")
    delta = TWO_PI * mp.mpf("6.8e9")
    omega_p = TWO_PI * mp.mpf("0.6e6")
    beta, eta, eta_d, n, N = mp.mpf("0.5"), mp.mpf("0.05"), mp.mpf("0.5"), 20, 2000
    leak = beta * gamma * omega_p**2 / (4 * delta**2)
    dark = n * beta / (eta * eta_d) * (gamma**2 + 2 * omega_p**2) / (4 * delta**2) * N
    dark_weak_probe = n * beta / (eta * eta_d) * gamma**2 / (4 * delta**2) * N
    return leak, dark, dark_weak_probe


def pir_point():
    eta, d = mp.mpf("0.05"), 100
    delta_loss = -2 * mp.log(eta) / d
    supp = eta + (1 - eta) * mp.exp(-delta_loss * d / 2)
    return delta_loss, supp, mp.mpf("0.95") * (1 - delta_loss)


def link_numbers():
    eta_p = mp.mpf("0.05") * mp.mpf("0.5") * mp.exp(-mp.mpf(10) / (2 * 20))
    mismatch = (1 - mp.mpf("0.5")) / (mp.mpf("0.5") * eta_p * 2000)
    attempts = 1 / (mp.mpf("0.5") * eta_p * mp.mpf("0.01"))
    p0 = 2 * mp.mpf("0.01") * eta_p
    return eta_p, mismatch, attempts, p0


def max_two_geometrics_enumerated(p, horizon=400):
    """E[max(X, Y)] for iid geometric X, Y on {1, 2, ...} by direct summation."""
    p = Fraction(p)
    total = Fraction(0)
    # P(max >= k) = 1 - (1 - (1-p)^(k-1))^2
    for k in range(1, horizon):
        cdf_km1 = 1 - (1 - p) ** (k - 1)
        total += 1 - cdf_km1**2
    return total


def atom_count_norm(N):
    """Squared norm of s_r^+ s_b^+ |vac> by counting atom configurations."""
    amps = {}
    for i, j in product(range(N), repeat=2):
        if i == j:
            continue  # atom i is already in s_b
        key = (i, j)
        amps[key] = amps.get(key, 0) + 1
    return Fraction(sum(a * a for a in amps.values()), N * N)


if __name__ == "__main__":
    leak, dark, dark_weak = rb_case()
    print("rb leak_rate", mp.nstr(leak, 20))
    print("rb dark_counts", mp.nstr(dark, 20))
    print("rb dark_counts (omega_p -> 0)", mp.nstr(dark_weak, 20))
    delta_loss, supp, conn = pir_point()
    print("pir delta", mp.nstr(delta_loss, 20), "suppression", mp.nstr(supp, 20), "connection", mp.nstr(conn, 20))
    eta_p, mismatch, attempts, p0 = link_numbers()
    print("eta_prime", mp.nstr(eta_p, 20), "mismatch", mp.nstr(mismatch, 20))
    print("attempts", mp.nstr(attempts, 20), "p0", mp.nstr(p0, 20))
    em = max_two_geometrics_enumerated(Fraction(1, 2))
    print("E[max geo(1/2)] ~", float(em), "closed form", 2 / 0.5 - 1 / (1 - 0.25))
    print("norm^2 s_r s_b |vac> N=3:", atom_count_norm(3))
