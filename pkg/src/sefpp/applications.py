"""Reductions of split feasibility, split VI and split minimization to SEFPP."""
from dataclasses import dataclass

import numpy as np

from . import linalg
from .diagnostics import Residuals
from .errors import RejectedConfigError, RejectedInputError
from .linalg import LinearOperator, as_point
from .mappings import ConvexSet, NonlinearMapping, ProxFunction, prox_mapping, resolvent_mapping
from .schedules import Schedule
from .solvers import (
    SefppProblem,
    _check_alpha,
    _eval,
    _finite,
    _iterate,
    _norm_free_schedule,
    _violation,
    build_normalized,
    solve,
)

__all__ = [
    "SvipProblem",
    "ScmpProblem",
    "sfp_step",
    "solve_sfp",
    "svip_as_sefpp",
    "scmp_as_sefpp",
    "solve_svip",
    "solve_scmp",
]


@dataclass(frozen=True, eq=False)
class SvipProblem:
    """``x* in VI(K1, F1)``, ``y* in VI(K2, F2)`` and ``D1 x* = D2 y*``."""

    F1: NonlinearMapping
    F2: NonlinearMapping
    K1: ConvexSet
    K2: ConvexSet
    D1: LinearOperator
    D2: LinearOperator
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise RejectedInputError(f"lambda must be positive, got {self.lam}")
        if self.D1.codomain_dim != self.D2.codomain_dim:
            raise RejectedInputError("D1 and D2 must share a codomain")


@dataclass(frozen=True, eq=False)
class ScmpProblem:
    """``x*`` minimizes ``M``, ``y*`` minimizes ``N`` and ``D1 x* = D2 y*``."""

    M: ProxFunction
    N: ProxFunction
    D1: LinearOperator
    D2: LinearOperator
    lam: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise RejectedInputError(f"lambda must be positive, got {self.lam}")
        if self.D1.codomain_dim != self.D2.codomain_dim:
            raise RejectedInputError("D1 and D2 must share a codomain")


def sfp_step(T, D, U, alpha, tau, x):
    """``v = (1-tau) x + tau U x + tau D^T (T D x - D x)``, ``x+ = (1-alpha) v + alpha U v``."""
    M = D.matrix
    Dx = M @ x
    v = _finite((1.0 - tau) * x + tau * _eval(U, x, "U x")
                + tau * (M.T @ (_eval(T, Dx, "T D x") - Dx)), "v")
    return _finite((1.0 - alpha) * v + alpha * _eval(U, v, "U v"), "x")


def solve_sfp(T, D, x0, config):
    """Single-sequence split feasibility scheme.

    Substitutes ``y_n = T D x_n`` (with ``D2 = I``) into the SEFPP update.
    ``T`` must act on both the domain and the range of ``D`` (e.g. a
    coordinatewise projection, or equal dimensions). Records store
    ``y = T D x``, ``coupling = ||D x - T D x||``, ``fix_x = ||x - T x||``
    and ``fix_y = 0``, so the stopping sum is the feasibility residual.
    """
    x0 = as_point(x0, D.domain_dim, "x0")
    if config.mode == "known-norm":
        L1 = linalg.operator_norm(D) ** 2
        bound = 2.0 / L1 if L1 > 0 else np.inf
        tau = config.tau if config.tau is not None else Schedule.harmonic(min(1.0, 0.9 * bound))
        taus = tau.values(config.max_iters)
        if taus.size and not (np.all(taus > 0) and np.all(taus < bound)):
            _violation(config, f"tau_n must lie in (0, 2/L1) = (0, {bound:.6g})")
        if not (tau.tends_to_zero and tau.diverges):
            _violation(config, f"tau_n must tend to 0 with a divergent sum; {tau.describe()} does not")
    elif config.mode == "norm-free":
        _, taus = _norm_free_schedule(config)
    else:
        raise RejectedConfigError(f"solve_sfp supports known-norm and norm-free modes, not {config.mode!r}")
    alphas = config.alpha.values(config.max_iters)
    _check_alpha(config, alphas)
    U = build_normalized(T, config)
    M = D.matrix

    def res_fn(x, y):
        return Residuals(float(np.linalg.norm(M @ x - y)), float(np.linalg.norm(x - T.evaluate(x))), 0.0)

    def step(a, t, state):
        x_new = sfp_step(T, D, U, a, t, state[0])
        return x_new, _eval(T, M @ x_new, "T D x")

    start = _Start(x0, T.evaluate(M @ x0))
    return _iterate(start, config, step, taus, alphas, None, res_fn)


@dataclass(frozen=True)
class _Start:
    x0: np.ndarray
    y0: np.ndarray


def svip_as_sefpp(p, start, **inner):
    """SEFPP whose mappings are the VI resolvents ``q -> R_{lam, F_j, K_j}(q)`` (1-Lipschitz)."""
    T1 = resolvent_mapping(p.F1, p.K1, p.lam, **inner)
    T2 = resolvent_mapping(p.F2, p.K2, p.lam, **inner)
    return SefppProblem(p.D1, p.D2, T1, T2, start[0], start[1])


def scmp_as_sefpp(p, start):
    """SEFPP whose mappings are ``prox_{lam M}`` and ``prox_{lam N}`` (1-Lipschitz)."""
    T1 = prox_mapping(p.M, p.lam, dim=p.D1.domain_dim)
    T2 = prox_mapping(p.N, p.lam, dim=p.D2.domain_dim)
    return SefppProblem(p.D1, p.D2, T1, T2, start[0], start[1])


def solve_svip(p, start, config, **inner):
    """Solve the split VI with the known-norm or norm-free scheme per ``config.mode``.

    An empty solution set simply yields a ``max_iters`` trace. Inner
    resolvent failures end the trace as ``numerical_failure`` with the
    iteration index in ``trace.message``.
    """
    if config.mode == "decoupled-km":
        raise RejectedConfigError("split VI needs known-norm or norm-free mode")
    return solve(svip_as_sefpp(p, start, **inner), config)


def solve_scmp(p, start, config):
    """Solve the split minimization problem through its prox reformulation."""
    if config.mode == "decoupled-km":
        raise RejectedConfigError("split minimization needs known-norm or norm-free mode")
    return solve(scmp_as_sefpp(p, start), config)
