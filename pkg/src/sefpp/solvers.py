"""Split equality fixed-point iterations and two classical baselines.

Both SEFPP schemes share one step map. With ``U``, ``V`` the normalized
operators of ``T1``, ``T2``::

    v = (1 - tau) x + tau U x + tau D1^T (D2 y - D1 x)
    w = (1 - tau) y + tau V y + tau D2^T (D1 x - D2 y)
    x+ = (1 - alpha) v + alpha U v
    y+ = (1 - alpha) w + alpha V w

Both halves read the iteration-n pair (Jacobi style). The known-norm solver
needs ``tau_n < 2 / (||D1||^2 + ||D2||^2)``; the norm-free solver instead
asks for a divergent, square-summable ``tau_n`` in ``(0, 1)`` and never
touches an operator norm.
"""
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import kernels, linalg
from .diagnostics import KnownSolution, Residuals, gamma, residuals
from .errors import DomainError, NumericalFailureError, RejectedConfigError, RejectedInputError
from .linalg import LinearOperator, as_point
from .mappings import AffineMapping, NonlinearMapping
from .normalized import NormalizedOperator, default_eta_zeta, make_normalized
from .schedules import Schedule, as_schedule

__all__ = [
    "MODES",
    "SefppProblem",
    "SolverConfig",
    "TraceRecord",
    "IterationTrace",
    "build_normalized",
    "step_known_norm",
    "step_norm_free",
    "solve",
    "solve_known_norm",
    "solve_norm_free",
    "solve_decoupled_km",
    "baseline_cq",
    "baseline_moudafi",
]

MODES = ("known-norm", "norm-free", "decoupled-km")
CONVERGED = "converged"
MAX_ITERS = "max_iters"
NUMERICAL_FAILURE = "numerical_failure"

# keep fast-path trajectories under ~80 MB
_FAST_PATH_MAX_ENTRIES = 10_000_000


@dataclass(frozen=True, eq=False)
class SefppProblem:
    """Find ``x in Fix(T1)``, ``y in Fix(T2)`` with ``D1 x = D2 y``."""

    D1: LinearOperator
    D2: LinearOperator
    T1: NonlinearMapping
    T2: NonlinearMapping
    x0: np.ndarray
    y0: np.ndarray

    def __post_init__(self):
        D1, D2 = self.D1, self.D2
        if D1.codomain_dim != D2.codomain_dim:
            raise RejectedInputError(
                f"D1 maps into dimension {D1.codomain_dim} but D2 into {D2.codomain_dim}"
            )
        object.__setattr__(self, "x0", as_point(self.x0, D1.domain_dim, "x0"))
        object.__setattr__(self, "y0", as_point(self.y0, D2.domain_dim, "y0"))
        for T, n, name in ((self.T1, D1.domain_dim, "T1"), (self.T2, D2.domain_dim, "T2")):
            if T.dim is not None and T.dim != n:
                raise RejectedInputError(f"{name} acts on dimension {T.dim}, expected {n}")

    def with_start(self, x0, y0):
        return SefppProblem(self.D1, self.D2, self.T1, self.T2, x0, y0)


@dataclass
class SolverConfig:
    """Iteration parameters.

    ``tau=None`` picks the mode default: ``c/(n+1)`` with
    ``c = min(1, 0.9 * 2/(L1+L2))`` for known-norm, ``1/(n+2)`` for
    norm-free. ``eta``/``zeta`` of ``"auto"`` use ``default_eta_zeta`` on
    each mapping's own Lipschitz constant. ``paper_exact_override`` turns
    schedule and parameter violations into warnings. ``semi_compact`` is a
    documentation flag and changes nothing.
    """

    mode: str = "known-norm"
    alpha: Union[Schedule, float, dict] = 0.5
    tau: Union[Schedule, float, dict, None] = None
    eta: Union[float, str] = "auto"
    zeta: Union[float, str] = "auto"
    max_iters: int = 100_000
    stop_tolerance: float = 1e-8
    paper_exact_override: bool = False
    alpha_floor: float = 1e-3
    start_index: int = 1
    accelerate: bool = True
    semi_compact: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise RejectedConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise RejectedConfigError(f"max_iters must be a nonnegative integer, got {self.max_iters}")
        if not self.stop_tolerance > 0:
            raise RejectedConfigError(f"stop_tolerance must be positive, got {self.stop_tolerance}")
        if not self.alpha_floor > 0:
            raise RejectedConfigError("alpha_floor must be positive")
        self.max_iters = int(self.max_iters)
        self.alpha = as_schedule(self.alpha)
        if self.tau is not None:
            self.tau = as_schedule(self.tau)
        for name in ("eta", "zeta"):
            v = getattr(self, name)
            if v != "auto" and not isinstance(v, (int, float)):
                raise RejectedConfigError(f"{name} must be a number or 'auto', got {v!r}")


@dataclass(frozen=True)
class TraceRecord:
    n: int
    x: np.ndarray
    y: np.ndarray
    coupling: float
    fix_x: float
    fix_y: float
    gamma: Optional[float] = None
    k_norm: Optional[float] = None
    r_norm: Optional[float] = None

    @property
    def residual(self):
        return self.coupling + self.fix_x + self.fix_y


@dataclass
class IterationTrace:
    """Every visited state, in order, plus the reason the loop stopped.

    ``taus[i]`` / ``alphas[i]`` are the step sizes that produced
    ``records[i + 1]`` from ``records[i]``.
    """

    records: list = field(default_factory=list)
    terminated_reason: str = MAX_ITERS
    mode: str = ""
    taus: np.ndarray = None
    alphas: np.ndarray = None
    message: str = ""

    def __len__(self):
        return len(self.records)

    @property
    def converged(self):
        return self.terminated_reason == CONVERGED

    @property
    def final(self):
        return self.records[-1]

    @property
    def xs(self):
        return np.array([r.x for r in self.records])

    @property
    def ys(self):
        return np.array([r.y for r in self.records])

    def column(self, name):
        """Scalar column as a float array; missing optionals become NaN."""
        return np.array(
            [np.nan if getattr(r, name) is None else getattr(r, name) for r in self.records],
            dtype=np.float64,
        )

    def by_index(self, n):
        return self.records[n - self.records[0].n]


# ---------------------------------------------------------------------------
# step maps
# ---------------------------------------------------------------------------

def _finite(value, quantity, n=None):
    if not np.all(np.isfinite(value)):
        where = "" if n is None else f" at iteration {n}"
        raise NumericalFailureError(f"non-finite {quantity}{where}", estimate=value, quantity=quantity)
    return value


def _eval(M, x, quantity):
    try:
        return M.evaluate(x)
    except DomainError as exc:
        raise NumericalFailureError(f"{quantity}: {exc}", estimate=x, quantity=quantity) from exc


def _sefpp_step(problem, U, V, alpha, tau, state):
    x, y = state
    D1, D2 = problem.D1.matrix, problem.D2.matrix
    gap = _finite(D2 @ y - D1 @ x, "D2 y - D1 x")
    v = _finite((1.0 - tau) * x + tau * _eval(U, x, "U x") + tau * (D1.T @ gap), "v")
    w = _finite((1.0 - tau) * y + tau * _eval(V, y, "V y") + tau * (D2.T @ -gap), "w")
    x_new = _finite((1.0 - alpha) * v + alpha * _eval(U, v, "U v"), "x")
    y_new = _finite((1.0 - alpha) * w + alpha * _eval(V, w, "V w"), "y")
    return x_new, y_new


def step_known_norm(problem, U, V, alpha, tau, state):
    """One update ``(x_n, y_n) -> (x_{n+1}, y_{n+1})``; see the module docstring."""
    return _sefpp_step(problem, U, V, alpha, tau, state)


def step_norm_free(problem, U, V, alpha, tau, state):
    """Same map as ``step_known_norm``; only the admissible schedules differ.

    The x-half couples through ``D1^T (D2 y - D1 x)``.
    """
    return _sefpp_step(problem, U, V, alpha, tau, state)


# ---------------------------------------------------------------------------
# configuration checks
# ---------------------------------------------------------------------------

def _violation(config, message):
    if config.paper_exact_override:
        warnings.warn(message + " (allowed by paper_exact_override)", stacklevel=3)
    else:
        raise RejectedConfigError(message)


def _check_alpha(config, alphas):
    if alphas.size and not (np.all(alphas > config.alpha_floor) and np.all(alphas < 1.0)):
        _violation(config, f"alpha_n must lie in ({config.alpha_floor:g}, 1); "
                           f"schedule {config.alpha.describe()} leaves it")


def build_normalized(T, config):
    """``U`` for ``T`` from the config's ``eta``/``zeta`` (or the automatic choice)."""
    eta, zeta = config.eta, config.zeta
    if eta == "auto" or zeta == "auto":
        if T.lipschitz is None:
            raise RejectedConfigError(f"eta/zeta 'auto' needs a Lipschitz constant on {T.name}")
        auto_eta, auto_zeta = default_eta_zeta(T.lipschitz)
        eta = auto_eta if eta == "auto" else eta
        zeta = auto_zeta if zeta == "auto" else zeta
    return make_normalized(T, eta, zeta, paper_exact=config.paper_exact_override)


def _known_norm_schedule(problem, config):
    L1 = linalg.operator_norm(problem.D1) ** 2
    L2 = linalg.operator_norm(problem.D2) ** 2
    bound = 2.0 / (L1 + L2) if L1 + L2 > 0 else np.inf
    tau = config.tau
    if tau is None:
        tau = Schedule.harmonic(min(1.0, 0.9 * bound))
    taus = tau.values(config.max_iters)
    if taus.size and not (np.all(taus > 0) and np.all(taus < bound)):
        _violation(config, f"tau_n must lie in (0, 2/(L1+L2)) = (0, {bound:.6g}); "
                           f"schedule {tau.describe()} leaves it")
    if not (tau.tends_to_zero and tau.diverges):
        _violation(config, f"tau_n must tend to 0 with a divergent sum; {tau.describe()} does not")
    return tau, taus


def _norm_free_schedule(config):
    tau = config.tau if config.tau is not None else Schedule.harmonic(1.0, shift=2.0)
    if not (tau.diverges and tau.square_summable):
        _violation(config, f"norm-free mode needs sum tau_n = inf and sum tau_n^2 < inf; "
                           f"{tau.describe()} does not qualify")
    taus = tau.values(config.max_iters)
    if taus.size and not (np.all(taus > 0) and np.all(taus < 1.0)):
        _violation(config, f"norm-free mode needs tau_n in (0, 1); {tau.describe()} leaves it")
    return tau, taus


# ---------------------------------------------------------------------------
# generic driver
# ---------------------------------------------------------------------------

def _record(n, x, y, res, sol, extra=None):
    g = None if sol is None else gamma((x, y), sol)
    k_norm = r_norm = None
    if extra is not None:
        k_norm, r_norm = extra
    return TraceRecord(n, x, y, res.coupling, res.fix_x, res.fix_y, g, k_norm, r_norm)


def _kr_norms(problem, U, V, x, y):
    D1, D2 = problem.D1.matrix, problem.D2.matrix
    gap = D2 @ y - D1 @ x
    k = x - U.evaluate(x) - D1.T @ gap
    r = y - V.evaluate(y) - D2.T @ -gap
    return float(np.linalg.norm(k)), float(np.linalg.norm(r))


def _iterate(problem, config, step, taus, alphas, sol, residual_fn, extra_fn=None,
             stop_fn=None):
    stop_fn = stop_fn or (lambda res: res.total)
    trace = IterationTrace(mode=config.mode, taus=taus, alphas=alphas)
    x, y = problem.x0.copy(), problem.y0.copy()
    n0 = config.start_index
    for k in range(config.max_iters + 1):
        try:
            res = residual_fn(x, y)
            rec = _record(n0 + k, x, y, res, sol, extra_fn(x, y) if extra_fn else None)
        except (DomainError, NumericalFailureError) as exc:
            trace.terminated_reason = NUMERICAL_FAILURE
            trace.message = f"iteration {n0 + k}: {exc}"
            break
        trace.records.append(rec)
        if not np.isfinite(res.total):
            trace.terminated_reason = NUMERICAL_FAILURE
            trace.message = f"iteration {n0 + k}: non-finite residual"
            break
        if stop_fn(res) < config.stop_tolerance:
            trace.terminated_reason = CONVERGED
            break
        if k == config.max_iters:
            trace.terminated_reason = MAX_ITERS
            break
        try:
            x, y = step(alphas[k], taus[k], (x, y))
        except NumericalFailureError as exc:
            trace.terminated_reason = NUMERICAL_FAILURE
            trace.message = f"iteration {n0 + k}: {exc}"
            break
    trace.taus = taus[: max(len(trace.records) - 1, 0)]
    trace.alphas = alphas[: max(len(trace.records) - 1, 0)]
    return trace


def _fast_path_ok(problem, config, U, V):
    n = (config.max_iters + 1) * (problem.D1.domain_dim + problem.D2.domain_dim)
    return (config.accelerate and n <= _FAST_PATH_MAX_ENTRIES
            and isinstance(problem.T1, AffineMapping) and isinstance(problem.T2, AffineMapping)
            and type(U) is NormalizedOperator and type(V) is NormalizedOperator)


def _affine_fast(problem, config, U, V, taus, alphas, sol, norm_free):
    T1, T2 = problem.T1, problem.T2
    c = np.ascontiguousarray
    X, Y, m, status = kernels.affine_sefpp_run(
        c(T1.A), c(T1.b), c(T2.A), c(T2.b), c(problem.D1.matrix), c(problem.D2.matrix),
        U.eta, U.zeta, V.eta, V.zeta, c(alphas), c(taus),
        problem.x0.copy(), problem.y0.copy(), float(config.stop_tolerance),
    )
    X = X[:m]
    Y = Y[:m]
    D1, D2 = problem.D1.matrix, problem.D2.matrix
    gap = Y @ D2.T - X @ D1.T
    coupling = np.linalg.norm(gap, axis=1)
    fix_x = np.linalg.norm(X - T1.evaluate_batch(X), axis=1)
    fix_y = np.linalg.norm(Y - T2.evaluate_batch(Y), axis=1)
    g = kn = rn = None
    if sol is not None:
        g = np.sum((X - sol.p) ** 2, axis=1) + np.sum((Y - sol.q) ** 2, axis=1)
    if norm_free:
        kn = np.linalg.norm(X - U.evaluate_batch(X) - gap @ D1, axis=1)
        rn = np.linalg.norm(Y - V.evaluate_batch(Y) + gap @ D2, axis=1)
    n0 = config.start_index
    trace = IterationTrace(mode=config.mode, taus=taus[: m - 1], alphas=alphas[: m - 1])
    trace.records = [
        TraceRecord(
            n0 + i, X[i].copy(), Y[i].copy(), float(coupling[i]), float(fix_x[i]), float(fix_y[i]),
            None if g is None else float(g[i]),
            None if kn is None else float(kn[i]),
            None if rn is None else float(rn[i]),
        )
        for i in range(m)
    ]
    trace.terminated_reason = {
        kernels.STATUS_CONVERGED: CONVERGED,
        kernels.STATUS_MAX_ITERS: MAX_ITERS,
        kernels.STATUS_NONFINITE: NUMERICAL_FAILURE,
    }[int(status)]
    if trace.terminated_reason == NUMERICAL_FAILURE:
        trace.message = f"iteration {n0 + m - 1}: non-finite iterate"
    return trace


def _solution(sol):
    if sol is None or isinstance(sol, KnownSolution):
        return sol
    p, q = sol
    return KnownSolution(p, q)


def _run_sefpp(problem, config, taus, sol, norm_free):
    alphas = config.alpha.values(config.max_iters)
    _check_alpha(config, alphas)
    U = build_normalized(problem.T1, config)
    V = build_normalized(problem.T2, config)
    if _fast_path_ok(problem, config, U, V):
        return _affine_fast(problem, config, U, V, taus, alphas, sol, norm_free)
    step = step_norm_free if norm_free else step_known_norm
    return _iterate(
        problem, config,
        lambda a, t, s: step(problem, U, V, a, t, s),
        taus, alphas, sol,
        lambda x, y: residuals((x, y), problem),
        (lambda x, y: _kr_norms(problem, U, V, x, y)) if norm_free else None,
    )


def solve_known_norm(problem, config, solution=None):
    """Run the known-norm scheme.

    ``L1 = ||D1||^2`` and ``L2 = ||D2||^2`` come from ``operator_norm``;
    every emitted ``tau_n`` must lie in ``(0, 2/(L1+L2))`` and the family
    must tend to zero with divergent sum (``RejectedConfigError`` otherwise,
    a warning under ``paper_exact_override``). Iterates until
    ``coupling + fix_x + fix_y < stop_tolerance`` or ``max_iters`` steps.
    Passing ``solution=(p, q)`` logs ``Gamma_n``.
    """
    if config.mode != "known-norm":
        raise RejectedConfigError(f"solve_known_norm needs mode 'known-norm', got {config.mode!r}")
    _, taus = _known_norm_schedule(problem, config)
    return _run_sefpp(problem, config, taus, _solution(solution), norm_free=False)


def solve_norm_free(problem, config, solution=None):
    """Run the norm-free scheme; no operator norm is computed on this path.

    Records additionally carry ``||k_n||`` and ``||r_n||`` with
    ``k_n = x - U x - D1^T (D2 y - D1 x)`` and
    ``r_n = y - V y - D2^T (D1 x - D2 y)``.
    """
    if config.mode != "norm-free":
        raise RejectedConfigError(f"solve_norm_free needs mode 'norm-free', got {config.mode!r}")
    _, taus = _norm_free_schedule(config)
    return _run_sefpp(problem, config, taus, _solution(solution), norm_free=True)


def solve_decoupled_km(problem, config, solution=None):
    """Two independent two-stage KM iterations on the raw mappings.

    ``v = (1 - tau) x + tau T1 x``, ``x+ = (1 - alpha) v + alpha T1 v`` and
    likewise for ``y`` with ``T2``; there is no coupling term and no
    normalization. This is the recurrence behind the published tables, and it
    stops on ``fix_x + fix_y`` alone since nothing drives the coupling gap.
    """
    if config.mode != "decoupled-km":
        raise RejectedConfigError(f"solve_decoupled_km needs mode 'decoupled-km', got {config.mode!r}")
    tau = config.tau if config.tau is not None else Schedule.harmonic(1.0, shift=2.0)
    taus = tau.values(config.max_iters)
    alphas = config.alpha.values(config.max_iters)
    T1, T2 = problem.T1, problem.T2

    def step(a, t, state):
        x, y = state
        v = (1.0 - t) * x + t * _eval(T1, x, "T1 x")
        w = (1.0 - t) * y + t * _eval(T2, y, "T2 y")
        return ((1.0 - a) * v + a * _eval(T1, v, "T1 v"),
                (1.0 - a) * w + a * _eval(T2, w, "T2 w"))

    return _iterate(problem, config, step, taus, alphas, _solution(solution),
                    lambda x, y: residuals((x, y), problem),
                    stop_fn=lambda res: res.fix_x + res.fix_y)


def solve(problem, config, solution=None):
    """Dispatch on ``config.mode``."""
    return {
        "known-norm": solve_known_norm,
        "norm-free": solve_norm_free,
        "decoupled-km": solve_decoupled_km,
    }[config.mode](problem, config, solution)


# ---------------------------------------------------------------------------
# baselines
# ---------------------------------------------------------------------------

def _baseline_config(config):
    return config if config is not None else SolverConfig()


def baseline_cq(set_C, set_Q, D, lam, x0, config=None):
    """Projected Landweber step ``x <- P_C(x - lam D^T (I - P_Q) D x)``.

    ``lam`` must lie in ``(0, 2/||D||^2)``. Records store ``y = P_Q(D x)``,
    ``coupling = ||D x - P_Q D x||``, ``fix_x = ||x - P_C x||`` and
    ``fix_y = 0``.
    """
    config = _baseline_config(config)
    nD = linalg.operator_norm(D)
    bound = 2.0 / nD ** 2 if nD > 0 else np.inf
    if not 0.0 < lam < bound:
        raise RejectedConfigError(f"CQ step lam must lie in (0, 2/||D||^2) = (0, {bound:.6g}), got {lam}")
    x0 = as_point(x0, D.domain_dim, "x0")
    M = D.matrix

    def res_fn(x, _y):
        Dx = M @ x
        return Residuals(float(np.linalg.norm(Dx - set_Q.project(Dx))),
                         float(np.linalg.norm(x - set_C.project(x))), 0.0)

    def step(_a, _t, state):
        x, _ = state
        Dx = M @ x
        x_new = set_C.project(x - lam * (M.T @ (Dx - set_Q.project(Dx))))
        return x_new, set_Q.project(M @ x_new)

    problem = _BaselineStart(x0, set_Q.project(M @ x0))
    zeros = np.zeros(config.max_iters)
    trace = _iterate(problem, config, step, np.full(config.max_iters, lam), zeros, None, res_fn)
    trace.mode = "cq"
    return trace


def baseline_moudafi(set_C, set_Q, D1, D2, lambda_schedule, start, config=None):
    """Alternating projected coupling steps::

        x+ = P_C(x - lam_n D1^T (D1 x - D2 y))
        y+ = P_Q(y + lam_n D2^T (D1 x - D2 y))

    ``lam_n`` must lie in ``[0, 2/(||D1||^2 + ||D2||^2))``.
    """
    config = _baseline_config(config)
    lam = as_schedule(lambda_schedule)
    L = linalg.operator_norm(D1) ** 2 + linalg.operator_norm(D2) ** 2
    bound = 2.0 / L if L > 0 else np.inf
    lams = lam.values(config.max_iters)
    if lams.size and not (np.all(lams >= 0) and np.all(lams < bound)):
        raise RejectedConfigError(f"lam_n must lie in [0, 2/(L1+L2)) = [0, {bound:.6g})")
    x0 = as_point(start[0], D1.domain_dim, "x0")
    y0 = as_point(start[1], D2.domain_dim, "y0")
    A, B = D1.matrix, D2.matrix

    def res_fn(x, y):
        return Residuals(float(np.linalg.norm(A @ x - B @ y)),
                         float(np.linalg.norm(x - set_C.project(x))),
                         float(np.linalg.norm(y - set_Q.project(y))))

    def step(_a, t, state):
        x, y = state
        gap = A @ x - B @ y
        return set_C.project(x - t * (A.T @ gap)), set_Q.project(y + t * (B.T @ gap))

    trace = _iterate(_BaselineStart(x0, y0), config, step, lams,
                     np.zeros(config.max_iters), None, res_fn)
    trace.mode = "moudafi"
    return trace


@dataclass(frozen=True)
class _BaselineStart:
    x0: np.ndarray
    y0: np.ndarray
