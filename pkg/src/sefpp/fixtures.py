"""Reference mappings and problem instances used by tests, the CLI and docs.

The rational maps come from the two worked numerical examples; P1 is a
consistent affine problem with the single solution ``(4, 6)``.
"""
import numpy as np

from .linalg import LinearOperator
from .mappings import AffineMapping, NonlinearMapping

__all__ = [
    "example1_T",
    "example1_S",
    "example2_T",
    "example2_S",
    "p1_problem",
    "example1_problem",
    "example2_problem",
    "rotation_mapping",
    "EXAMPLE1_PARAMS",
    "EXAMPLE2_PARAMS",
    "P1_SOLUTION",
]

# eta, zeta, tau, alpha as used for the two published tables
EXAMPLE1_PARAMS = {"eta": 0.5, "zeta": 0.2, "tau": 1.0 / 7.0, "alpha": 1.0 / 6.0}
EXAMPLE2_PARAMS = {"eta": 0.5, "zeta": 0.2, "tau": 1.0 / 6.0, "alpha": 1.0 / 7.0}
P1_SOLUTION = (np.array([4.0]), np.array([6.0]))


def example1_T():
    """``(x + 4) / 2``, Fix = {4}."""
    return AffineMapping([[0.5]], [2.0], fixed_points=[[4.0]], name="ex1_T")


def example1_S():
    """``(y^2 + 2) / (y + 4)``, Fix = {1/2}; 1-Lipschitz on ``[0, inf)``, pole at -4."""
    f = lambda y: (y * y + 2.0) / (y + 4.0)
    return NonlinearMapping(
        f, lipschitz=1.0, fixed_points=[[0.5]], class_tag="quasi-pseudocontractive",
        dim=1, name="ex1_S", batch_evaluator=f,
    )


def example2_T():
    """``(x^5 + 6) / (x^4 + 2)``.

    Its only fixed point is 3 (``x^5 + 2x = x^5 + 6``), not 2. Largest
    slope on the real line is about 4.0666, attained near ``x = -1.123``.
    """
    f = lambda x: (x ** 5 + 6.0) / (x ** 4 + 2.0)
    return NonlinearMapping(
        f, lipschitz=4.07, fixed_points=[[3.0]], class_tag="quasi-pseudocontractive",
        dim=1, name="ex2_T", batch_evaluator=f,
    )


def example2_S():
    """``(y^3 + 4) / (y^2 + y)``, Fix = {2}; poles at 0 and -1, not Lipschitz near 0."""
    f = lambda y: (y ** 3 + 4.0) / (y * y + y)
    return NonlinearMapping(
        f, lipschitz=None, fixed_points=[[2.0]], class_tag="quasi-pseudocontractive",
        dim=1, name="ex2_S", batch_evaluator=f,
    )


def rotation_mapping(scale=2.0, center=(1.0, -1.0)):
    """``p + scale * R (x - p)`` with ``R`` a quarter turn.

    Quasi-pseudocontractive for every scale because ``<x - Tx, x - p> =
    ||x - p||^2``, but not quasi-nonexpansive once ``scale > 1``.
    """
    p = np.asarray(center, dtype=np.float64)
    A = scale * np.array([[0.0, -1.0], [1.0, 0.0]])
    return AffineMapping(A, p - A @ p, fixed_points=[p], class_tag="quasi-pseudocontractive",
                         name=f"rot{scale:g}")


def _problem(T1, T2, x0, y0):
    from .solvers import SefppProblem

    return SefppProblem(LinearOperator.scalar(0.5), LinearOperator.scalar(1.0 / 3.0), T1, T2,
                        np.atleast_1d(np.asarray(x0, float)), np.atleast_1d(np.asarray(y0, float)))


def p1_problem(x0=1.0, y0=1.0):
    """``D1 = 1/2``, ``D2 = 1/3``, ``T1 x = (x+4)/2``, ``T2 y = (y+6)/2``."""
    T2 = AffineMapping([[0.5]], [3.0], fixed_points=[[6.0]], name="p1_T2")
    return _problem(example1_T(), T2, x0, y0)


def example1_problem(x0=1.0, y0=1.0):
    return _problem(example1_T(), example1_S(), x0, y0)


def example2_problem(x0=1.0, y0=1.0):
    return _problem(example2_T(), example2_S(), x0, y0)
