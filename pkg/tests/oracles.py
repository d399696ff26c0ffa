"""Independent reference recurrences, written straight from the update formulas.

Nothing here imports the package under test.
"""
from fractions import Fraction

import numpy as np


def normalized(T, eta, zeta):
    return lambda z: (1 - eta) * z + eta * T((1 - zeta) * z + zeta * T(z))


def sefpp_step(D1, D2, T1, T2, eta, zeta, alpha, tau, x, y):
    U = normalized(T1, eta, zeta)
    V = normalized(T2, eta, zeta)
    v = (1 - tau) * x + tau * U(x) + tau * D1.T @ (D2 @ y - D1 @ x)
    w = (1 - tau) * y + tau * V(y) + tau * D2.T @ (D1 @ x - D2 @ y)
    return (1 - alpha) * v + alpha * U(v), (1 - alpha) * w + alpha * V(w)


def sefpp_run(D1, D2, T1, T2, eta, zeta, alphas, taus, x, y, steps):
    out = [(x, y)]
    for n in range(steps):
        x, y = sefpp_step(D1, D2, T1, T2, eta, zeta, alphas(n), taus(n), x, y)
        out.append((x, y))
    return out


def decoupled(T, tau, alpha, x, steps):
    out = [x]
    for _ in range(steps):
        v = (1 - tau) * x + tau * T(x)
        x = (1 - alpha) * v + alpha * T(v)
        out.append(x)
    return out


def decoupled_exact_ex1_x(steps):
    """Exact rational trajectory of (x+4)/2 with tau=1/7, alpha=1/6 from x=1."""
    T = lambda z: (z + 4) / 2
    return decoupled(T, Fraction(1, 7), Fraction(1, 6), Fraction(1), steps)


def brute_spectral_norm(M):
    # dense symmetric eigensolver on M^T M, a different route than power iteration
    return float(np.sqrt(max(np.linalg.eigvalsh(M.T @ M).max(), 0.0)))
