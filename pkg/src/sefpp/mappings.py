"""Nonlinear self-maps, convex sets, prox functions and empirical class checks."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, NumericalFailureError, RejectedInputError
from .linalg import as_point

__all__ = [
    "CLASS_TAGS",
    "FIXED_POINT_TOL",
    "NonlinearMapping",
    "AffineMapping",
    "ConvexSet",
    "ProxFunction",
    "ClassCheckReport",
    "evaluate",
    "project",
    "prox",
    "resolvent_vi",
    "identity_mapping",
    "projection_mapping",
    "prox_mapping",
    "resolvent_mapping",
    "check_quasi_pseudocontractive",
    "check_demicontractive",
    "check_quasi_nonexpansive",
    "estimate_lipschitz",
]

CLASS_TAGS = ("quasi-nonexpansive", "demicontractive", "quasi-pseudocontractive", "unclassified")
FIXED_POINT_TOL = 1e-10
CLASS_CHECK_TOL = 1e-9


def _first_bad(arr):
    return int(np.flatnonzero(~np.isfinite(arr))[0])


class NonlinearMapping:
    """An evaluatable self-map ``T : R^d -> R^d``.

    Parameters
    ----------
    evaluator : callable
        Takes and returns a 1-D float64 array of the same length.
    lipschitz : float, optional
        Lipschitz constant ``L``; required for normalization.
    fixed_points : sequence of array_like, optional
        Known fixed points. Each is checked at construction against
        ``FIXED_POINT_TOL``.
    class_tag : str
        Declared mapping class, one of ``CLASS_TAGS``.
    beta : float, optional
        Demicontractive constant, only meaningful with that tag.
    dim : int, optional
        Space dimension; ``None`` means dimension-agnostic (e.g. clamps).
    batch_evaluator : callable, optional
        Row-wise version of ``evaluator`` for ``(s, d)`` arrays.
    """

    def __init__(self, evaluator, lipschitz=None, fixed_points=(), class_tag="unclassified",
                 beta=None, dim=None, name=None, batch_evaluator=None):
        if class_tag not in CLASS_TAGS:
            raise RejectedInputError(f"class_tag must be one of {CLASS_TAGS}, got {class_tag!r}")
        if class_tag == "demicontractive":
            if beta is None or not 0.0 <= beta < 1.0:
                raise RejectedInputError("demicontractive mappings need beta in [0, 1)")
        if lipschitz is not None and not lipschitz >= 0:
            raise RejectedInputError(f"lipschitz must be nonnegative, got {lipschitz}")
        self._evaluator = evaluator
        self._batch = batch_evaluator
        self.lipschitz = None if lipschitz is None else float(lipschitz)
        self.class_tag = class_tag
        self.beta = beta
        self.dim = dim
        self.name = name or getattr(evaluator, "__name__", "T")
        pts = tuple(as_point(p, dim, "fixed point") for p in fixed_points)
        for p in pts:
            gap = float(np.linalg.norm(self.evaluate(p) - p))
            if gap > FIXED_POINT_TOL:
                raise RejectedInputError(
                    f"declared fixed point {p} of {self.name} has residual {gap:.3e}"
                )
        self.fixed_points = pts

    def evaluate(self, x):
        x = as_point(x, self.dim, f"{self.name} input")
        with np.errstate(all="ignore"):
            try:
                out = np.asarray(self._evaluator(x), dtype=np.float64)
            except ZeroDivisionError as exc:
                raise DomainError(f"{self.name} undefined at {x}", None, x) from exc
        out = np.atleast_1d(out)
        if out.shape != x.shape:
            raise RejectedInputError(
                f"{self.name} changed dimension: input {x.shape}, output {out.shape}"
            )
        if not np.all(np.isfinite(out)):
            i = _first_bad(out)
            raise DomainError(
                f"{self.name} produced a non-finite value at coordinate {i} for input {x}", i, x
            )
        return out

    __call__ = evaluate

    def evaluate_batch(self, X):
        """Evaluate on every row of ``X``; non-finite rows raise ``DomainError``."""
        X = np.asarray(X, dtype=np.float64)
        if self._batch is None:
            return np.array([self.evaluate(row) for row in X]).reshape(X.shape)
        with np.errstate(all="ignore"):
            out = np.asarray(self._batch(X), dtype=np.float64).reshape(X.shape)
        bad = ~np.all(np.isfinite(out), axis=1)
        if bad.any():
            r = int(np.flatnonzero(bad)[0])
            i = _first_bad(out[r])
            raise DomainError(
                f"{self.name} produced a non-finite value at coordinate {i} for input {X[r]}",
                i, X[r].copy(),
            )
        return out

    def __repr__(self):
        return f"{type(self).__name__}({self.name}, L={self.lipschitz}, tag={self.class_tag})"


class AffineMapping(NonlinearMapping):
    """``T x = A x + b``; Lipschitz constant defaults to ``||A||_2``."""

    def __init__(self, A, b, fixed_points=(), class_tag=None, lipschitz=None, name="affine"):
        A = np.atleast_2d(np.array(A, dtype=np.float64))
        b = np.atleast_1d(np.array(b, dtype=np.float64))
        if A.shape[0] != A.shape[1] or A.shape[0] != b.size:
            raise RejectedInputError(f"affine map needs square A and matching b, got {A.shape}, {b.shape}")
        A.setflags(write=False)
        b.setflags(write=False)
        self.A = A
        self.b = b
        if lipschitz is None:
            lipschitz = float(np.linalg.norm(A, 2))
        if class_tag is None:
            class_tag = "quasi-nonexpansive" if lipschitz <= 1.0 and fixed_points else "unclassified"
        super().__init__(
            lambda x: A @ x + b,
            lipschitz=lipschitz,
            fixed_points=fixed_points,
            class_tag=class_tag,
            dim=b.size,
            name=name,
            batch_evaluator=lambda X: X @ A.T + b,
        )


@dataclass(frozen=True, eq=False)
class ConvexSet:
    """A closed convex set with a cheap metric projection.

    ``kind`` is ``"box"`` (``a`` = lower, ``b`` = upper bounds, infinities
    allowed), ``"ball"`` (``a`` = center, ``b`` = radius) or ``"halfspace"``
    (``{z : <a, z> <= b}``). Use the classmethod constructors.
    """

    kind: str
    a: np.ndarray
    b: object

    @classmethod
    def box(cls, lo, hi, dim=None):
        lo = np.atleast_1d(np.array(lo, dtype=np.float64))
        hi = np.atleast_1d(np.array(hi, dtype=np.float64))
        if dim is not None:
            lo = np.broadcast_to(lo, (dim,)).copy()
            hi = np.broadcast_to(hi, (dim,)).copy()
        if lo.shape != hi.shape or lo.ndim != 1:
            raise RejectedInputError(f"box bounds have shapes {lo.shape} and {hi.shape}")
        if np.isnan(lo).any() or np.isnan(hi).any() or np.any(lo > hi):
            raise RejectedInputError("box needs lo <= hi componentwise")
        return cls("box", lo, hi)

    @classmethod
    def whole_space(cls, dim):
        return cls.box(-np.inf, np.inf, dim)

    @classmethod
    def ball(cls, center, radius):
        center = as_point(center, name="ball center")
        if not radius > 0 or not np.isfinite(radius):
            raise RejectedInputError(f"ball radius must be positive and finite, got {radius}")
        return cls("ball", center, float(radius))

    @classmethod
    def halfspace(cls, normal, offset):
        normal = as_point(normal, name="halfspace normal")
        if not np.any(normal):
            raise RejectedInputError("halfspace normal must be nonzero")
        return cls("halfspace", normal, float(offset))

    @property
    def dim(self):
        return self.a.size

    @property
    def bounded(self):
        if self.kind == "box":
            return bool(np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b)))
        return self.kind == "ball"

    def project(self, x):
        x = as_point(x, self.dim, "projection input")
        if self.kind == "box":
            return kernels.project_box(x, self.a, self.b)
        if self.kind == "ball":
            return kernels.project_ball(x, self.a, self.b)
        return kernels.project_halfspace(x, self.a, self.b)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "box":
            return bool(np.all(x >= self.a - tol) and np.all(x <= self.b + tol))
        if self.kind == "ball":
            return float(np.linalg.norm(x - self.a)) <= self.b + tol
        return float(self.a @ x) <= self.b + tol

    def sample(self, count, rng):
        """Draw ``count`` uniform points; only bounded sets can be sampled."""
        if not self.bounded:
            raise RejectedInputError(f"cannot sample uniformly from an unbounded {self.kind}")
        d = self.dim
        if self.kind == "box":
            return self.a + (self.b - self.a) * rng.random((count, d))
        g = rng.standard_normal((count, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = self.b * rng.random(count) ** (1.0 / d)
        return self.a + g * r[:, None]

    @property
    def degenerate(self):
        return self.kind == "box" and bool(np.all(self.a == self.b))


@dataclass(frozen=True, eq=False)
class ProxFunction:
    """Proper convex function with a closed-form prox.

    ``kind`` is ``"quadratic"`` (``0.5 <Ax, x> - <b, x>``, ``A`` symmetric
    PSD), ``"l1"`` (``weight * ||x||_1``) or ``"indicator"`` of a
    ``ConvexSet``.
    """

    kind: str
    A: np.ndarray = None
    b: np.ndarray = None
    weight: float = 1.0
    set: ConvexSet = None

    @classmethod
    def quadratic(cls, A, b):
        A = np.atleast_2d(np.array(A, dtype=np.float64))
        b = np.atleast_1d(np.array(b, dtype=np.float64))
        if A.shape[0] != A.shape[1] or A.shape[0] != b.size:
            raise RejectedInputError(f"quadratic needs square A and matching b, got {A.shape}, {b.shape}")
        if np.max(np.abs(A - A.T)) > 1e-10:
            raise RejectedInputError("quadratic A must be symmetric")
        lam_min = float(np.linalg.eigvalsh(A).min())
        if lam_min < -1e-10:
            raise RejectedInputError(f"quadratic A must be PSD, smallest eigenvalue {lam_min:.3e}")
        return cls("quadratic", A=A, b=b)

    @classmethod
    def zero(cls, dim):
        return cls.quadratic(np.zeros((dim, dim)), np.zeros(dim))

    @classmethod
    def l1(cls, weight=1.0):
        if not weight >= 0:
            raise RejectedInputError(f"l1 weight must be nonnegative, got {weight}")
        return cls("l1", weight=float(weight))

    @classmethod
    def indicator(cls, convex_set):
        return cls("indicator", set=convex_set)

    def value(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "quadratic":
            return 0.5 * float(x @ self.A @ x) - float(self.b @ x)
        if self.kind == "l1":
            return self.weight * float(np.abs(x).sum())
        return 0.0 if self.set.contains(x, 1e-12) else np.inf

    def prox(self, lam, x):
        if not lam > 0:
            raise RejectedInputError(f"prox parameter must be positive, got {lam}")
        x = as_point(x, name="prox input")
        if self.kind == "quadratic":
            n = self.b.size
            if x.size != n:
                raise RejectedInputError(f"prox input has dimension {x.size}, expected {n}")
            return np.linalg.solve(np.eye(n) + lam * self.A, x + lam * self.b)
        if self.kind == "l1":
            return kernels.soft_threshold(x, lam * self.weight)
        return self.set.project(x)


def evaluate(T, x):
    """``T(x)``, raising ``DomainError`` on a non-finite output."""
    return T.evaluate(x)


def project(convex_set, x):
    """Metric projection onto ``convex_set``."""
    return convex_set.project(x)


def prox(f, lam, x):
    """``argmin_t f(t) + ||t - x||^2 / (2 lam)``."""
    return f.prox(lam, x)


def resolvent_vi(F, K, lam, q, step=None, tol=1e-10, max_iter=100_000):
    """Resolvent of the variational inequality ``VI(K, F)`` at ``q``.

    Finds ``y`` in ``K`` with ``<F(y) + (y - q)/lam, t - y> >= 0`` for all
    ``t`` in ``K`` by the projected iteration
    ``y <- P_K(y - s (lam F(y) + y - q))`` started at ``P_K(q)``. The
    regularized operator is 1-strongly monotone, so for an ``L_F``-Lipschitz
    monotone ``F`` the default step ``s = 1 / (1 + (lam L_F)^2)`` is a
    contraction; with ``L_F`` unknown ``s = 0.1 / lam``.

    Raises
    ------
    NumericalFailureError
        After ``max_iter`` iterations without ``||y_{k+1} - y_k|| <= tol``;
        ``estimate`` and ``residual`` hold the last iterate and step length.
    """
    if not lam > 0:
        raise RejectedInputError(f"resolvent parameter must be positive, got {lam}")
    q = as_point(q, K.dim, "resolvent input")
    if step is None:
        step = 1.0 / (1.0 + (lam * F.lipschitz) ** 2) if F.lipschitz is not None else 0.1 / lam
    y = K.project(q)
    res = np.inf
    for _ in range(max_iter):
        y_new = K.project(y - step * (lam * F.evaluate(y) + y - q))
        res = float(np.linalg.norm(y_new - y))
        y = y_new
        if res <= tol:
            return y
    raise NumericalFailureError(
        f"resolvent iteration stalled after {max_iter} steps (residual {res:.3e})",
        estimate=y, residual=res, quantity="resolvent",
    )


def identity_mapping(dim=None):
    return NonlinearMapping(
        lambda x: x.copy(), lipschitz=1.0, class_tag="quasi-nonexpansive", dim=dim,
        name="identity", batch_evaluator=lambda X: X.copy(),
    )


def projection_mapping(convex_set, fixed_points=()):
    """``P_K`` as a mapping; firmly nonexpansive, so 1-Lipschitz."""
    return NonlinearMapping(
        convex_set.project, lipschitz=1.0, fixed_points=fixed_points,
        class_tag="quasi-nonexpansive", dim=convex_set.dim, name=f"P_{convex_set.kind}",
    )


def prox_mapping(f, lam, dim=None, fixed_points=()):
    """``x -> prox_{lam f}(x)``; firmly nonexpansive, so 1-Lipschitz."""
    return NonlinearMapping(
        lambda x: f.prox(lam, x), lipschitz=1.0, fixed_points=fixed_points,
        class_tag="quasi-nonexpansive", dim=dim, name=f"prox_{f.kind}",
    )


def resolvent_mapping(F, K, lam, fixed_points=(), **inner):
    """``q -> resolvent_vi(F, K, lam, q)``; firmly nonexpansive for monotone ``F``."""
    return NonlinearMapping(
        lambda q: resolvent_vi(F, K, lam, q, **inner), lipschitz=1.0,
        fixed_points=fixed_points, class_tag="quasi-nonexpansive", dim=K.dim,
        name=f"R_{getattr(F, 'name', 'F')}",
    )


@dataclass(frozen=True)
class ClassCheckReport:
    holds: bool
    worst_violation: float
    worst_point: np.ndarray
    samples: int


def _check_fixed_point(T, p):
    p = as_point(p, T.dim, "fixed point")
    gap = float(np.linalg.norm(T.evaluate(p) - p))
    if gap > FIXED_POINT_TOL:
        raise RejectedInputError(f"p is not a fixed point of {T.name}: ||Tp - p|| = {gap:.3e}")
    return p


def _sample_domain(domain, samples, seed):
    if samples < 1:
        raise RejectedInputError("samples must be positive")
    return domain.sample(samples, np.random.default_rng(seed))


def check_demicontractive(T, p, beta, samples, domain, seed=0):
    """Sampled test of ``||Ty - p||^2 <= ||y - p||^2 + beta ||y - Ty||^2``.

    ``worst_violation`` is the largest left-minus-right value over the
    samples; the inequality is reported to hold when it is at most 1e-9.
    """
    p = _check_fixed_point(T, p)
    Y = _sample_domain(domain, samples, seed)
    TY = T.evaluate_batch(Y)
    slack = kernels.class_slack(np.ascontiguousarray(Y), np.ascontiguousarray(TY), p, float(beta))
    i = int(np.argmax(slack))
    worst = float(slack[i])
    return ClassCheckReport(worst <= CLASS_CHECK_TOL, worst, Y[i].copy(), samples)


def check_quasi_pseudocontractive(T, p, samples, domain, seed=0):
    return check_demicontractive(T, p, 1.0, samples, domain, seed)


def check_quasi_nonexpansive(T, p, samples, domain, seed=0):
    """Sampled test of ``||Tx - p|| <= ||x - p||``."""
    p = _check_fixed_point(T, p)
    X = _sample_domain(domain, samples, seed)
    TX = T.evaluate_batch(X)
    gain = kernels.distance_gain(np.ascontiguousarray(X), np.ascontiguousarray(TX), p)
    i = int(np.argmax(gain))
    worst = float(gain[i])
    return ClassCheckReport(worst <= CLASS_CHECK_TOL, worst, X[i].copy(), samples)


def estimate_lipschitz(T, domain, samples, seed=0):
    """Largest ``||Tx - Ty|| / ||x - y||`` over all pairs of sampled points.

    This is a lower bound on the true constant, meant for sanity-checking a
    user-supplied ``L``.
    """
    if samples < 2:
        raise RejectedInputError("estimate_lipschitz needs at least 2 samples")
    if domain.degenerate:
        raise RejectedInputError("domain is a single point")
    X = _sample_domain(domain, samples, seed)
    TX = T.evaluate_batch(X)
    return float(kernels.pairwise_lipschitz(np.ascontiguousarray(X), np.ascontiguousarray(TX)))
