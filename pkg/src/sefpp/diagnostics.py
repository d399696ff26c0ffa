"""Residuals, the distance functional Gamma_n and Fejer-type checks."""
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import RejectedInputError
from .linalg import as_point

__all__ = [
    "Residuals",
    "KnownSolution",
    "FejerReport",
    "residuals",
    "gamma",
    "check_fejer",
    "near_fejer_phi",
    "FEJER_TOL",
]

FEJER_TOL = 1e-12


class Residuals(NamedTuple):
    coupling: float
    fix_x: float
    fix_y: float

    @property
    def total(self):
        return self.coupling + self.fix_x + self.fix_y


def residuals(state, problem):
    """``(||D1 x - D2 y||, ||x - T1 x||, ||y - T2 y||)`` at ``state = (x, y)``."""
    x, y = state
    coupling = float(np.linalg.norm(problem.D1.apply(x) - problem.D2.apply(y)))
    fix_x = float(np.linalg.norm(x - problem.T1.evaluate(x)))
    fix_y = float(np.linalg.norm(y - problem.T2.evaluate(y)))
    return Residuals(coupling, fix_x, fix_y)


@dataclass(frozen=True)
class KnownSolution:
    """A point ``(p, q)`` of the solution set, used only for monitoring."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", as_point(self.p, name="p"))
        object.__setattr__(self, "q", as_point(self.q, name="q"))

    def verify(self, problem, tol=1e-8):
        """Raise ``RejectedInputError`` unless ``(p, q)`` solves ``problem`` within ``tol``."""
        r = residuals((self.p, self.q), problem)
        for name, value in zip(r._fields, r):
            if value > tol:
                raise RejectedInputError(f"known solution fails the {name} check: {value:.3e} > {tol:g}")
        return self


def gamma(state, sol):
    """``||x - p||^2 + ||y - q||^2``."""
    x, y = state
    return float(np.sum((np.asarray(x) - sol.p) ** 2) + np.sum((np.asarray(y) - sol.q) ** 2))


def near_fejer_phi(problem, L):
    """``1 + L^2 + max(||D1||^2, ||D2||^2)``; computes operator norms, so offline use only."""
    from .linalg import operator_norm

    return 1.0 + L * L + max(operator_norm(problem.D1) ** 2, operator_norm(problem.D2) ** 2)


@dataclass(frozen=True)
class FejerReport:
    holds: bool
    first_violation_index: Optional[int]
    worst_excess: float
    checked: int


def check_fejer(trace, mode="known-norm", phi=None, taus=None):
    """Check ``Gamma_{n+1} <= c_n Gamma_n`` along a trace.

    ``c_n = 1`` in known-norm mode and ``1 + 2 phi^2 tau_n^2`` in norm-free
    mode. The slack is ``FEJER_TOL * (1 + Gamma_n)``. ``trace`` is an
    ``IterationTrace`` with a logged gamma column or a plain sequence of
    values; ``taus`` defaults to the step sizes stored on the trace.
    """
    if hasattr(trace, "records"):
        g = trace.column("gamma")
        if taus is None:
            taus = getattr(trace, "taus", None)
    else:
        g = np.asarray(trace, dtype=np.float64)
    if g.size == 0 or np.any(np.isnan(g)):
        raise RejectedInputError("trace has no gamma column; solve with a known solution")
    steps = g.size - 1
    if mode == "known-norm":
        factor = np.ones(steps)
    elif mode == "norm-free":
        if phi is None or taus is None:
            raise RejectedInputError("norm-free check needs phi and the tau sequence")
        taus = np.asarray(taus, dtype=np.float64)[:steps]
        if taus.size < steps:
            raise RejectedInputError(f"need {steps} tau values, got {taus.size}")
        factor = 1.0 + 2.0 * phi * phi * taus * taus
    else:
        raise RejectedInputError(f"unknown mode {mode!r}")
    excess = g[1:] - factor * g[:-1] - FEJER_TOL * (1.0 + g[:-1])
    bad = np.flatnonzero(excess > 0)
    worst = float(excess.max()) if steps else -np.inf
    if bad.size:
        return FejerReport(False, int(bad[0]), worst, steps)
    return FejerReport(True, None, worst, steps)
