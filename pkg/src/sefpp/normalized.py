"""The two-layer normalization ``U = (1-eta) I + eta T((1-zeta) I + zeta T)``.

For an ``L``-Lipschitz quasi-pseudocontractive ``T`` and
``0 < eta < zeta < 1/(1 + sqrt(1 + L^2))`` the operator ``U`` has the same
fixed points as ``T`` and is quasi-nonexpansive.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import RejectedParametersError
from .mappings import FIXED_POINT_TOL, NonlinearMapping

__all__ = [
    "NormalizedOperator",
    "Lemma22Report",
    "zeta_bound",
    "default_eta_zeta",
    "make_normalized",
    "verify_lemma22",
]


def zeta_bound(L):
    """``1 / (1 + sqrt(1 + L^2))``."""
    return 1.0 / (1.0 + math.sqrt(1.0 + L * L))


def default_eta_zeta(L):
    """``zeta = 0.9 * zeta_bound(L)`` and ``eta = zeta / 2``."""
    if not L >= 0:
        raise RejectedParametersError(f"Lipschitz constant must be nonnegative, got {L}")
    zeta = 0.9 * zeta_bound(L)
    return zeta / 2.0, zeta


class NormalizedOperator(NonlinearMapping):
    """``U`` built from a base mapping ``T``; itself a ``NonlinearMapping``."""

    def __init__(self, base, eta, zeta, paper_exact=False):
        self.base = base
        self.eta = float(eta)
        self.zeta = float(zeta)
        self.lipschitz_of_base = base.lipschitz
        self.paper_exact = paper_exact
        e, z = self.eta, self.zeta
        L = base.lipschitz
        # |U x - U y| <= ((1-e) + e L (1 - z + z L)) |x - y|
        lip = None if L is None else (1.0 - e) + e * L * (1.0 - z + z * L)
        batch = None
        if base._batch is not None:
            bb = base._batch
            batch = lambda X: (1.0 - e) * X + e * bb((1.0 - z) * X + z * bb(X))
        super().__init__(
            self._apply, lipschitz=lip, fixed_points=base.fixed_points,
            class_tag="unclassified" if paper_exact else "quasi-nonexpansive",
            dim=base.dim, name=f"U[{base.name}]", batch_evaluator=batch,
        )

    def _apply(self, x):
        T = self.base
        return (1.0 - self.eta) * x + self.eta * T.evaluate((1.0 - self.zeta) * x + self.zeta * T.evaluate(x))

    def affine_parts(self):
        """``(M, c)`` with ``U x = M x + c`` when the base is affine, else ``None``."""
        A = getattr(self.base, "A", None)
        if A is None:
            return None
        b = self.base.b
        n = b.size
        inner_M = (1.0 - self.zeta) * np.eye(n) + self.zeta * A
        M = (1.0 - self.eta) * np.eye(n) + self.eta * A @ inner_M
        c = self.eta * (A @ (self.zeta * b) + b)
        return M, c


def make_normalized(T, eta, zeta, paper_exact=False):
    """Build ``U`` from ``T``.

    Without ``paper_exact`` the strict ordering
    ``0 < eta < zeta < 1/(1 + sqrt(1 + L^2))`` is enforced and ``T`` must
    carry a Lipschitz constant. ``paper_exact=True`` only requires
    ``eta, zeta`` in ``(0, 1]``, which admits the published example
    parameters ``eta = 1/2, zeta = 1/5``.
    """
    eta = float(eta)
    zeta = float(zeta)
    if paper_exact:
        if not (0.0 < eta <= 1.0 and 0.0 < zeta <= 1.0):
            raise RejectedParametersError(f"eta and zeta must lie in (0, 1], got {eta}, {zeta}")
        return NormalizedOperator(T, eta, zeta, paper_exact=True)
    if T.lipschitz is None:
        raise RejectedParametersError(f"{T.name} has no Lipschitz constant; cannot validate eta, zeta")
    bound = zeta_bound(T.lipschitz)
    if not 0.0 < eta < zeta < bound:
        raise RejectedParametersError(
            f"need 0 < eta < zeta < 1/(1+sqrt(1+L^2)) = {bound:.6g} for L = {T.lipschitz:g}, "
            f"got eta = {eta:g}, zeta = {zeta:g}"
        )
    return NormalizedOperator(T, eta, zeta)


@dataclass(frozen=True)
class Lemma22Report:
    fixed_points_preserved: bool
    lipschitz_within_bound: bool
    quasi_nonexpansive: bool
    lipschitz_estimate: float
    lipschitz_bound: float
    l_squared_held: bool
    worst_fixed_point_gap: float
    worst_distance_gain: float

    @property
    def all_hold(self):
        return self.fixed_points_preserved and self.lipschitz_within_bound and self.quasi_nonexpansive


def verify_lemma22(U, domain, samples, seed=0):
    """Sample-based check of the three normalization guarantees.

    * every declared fixed point ``p`` of the base satisfies ``||Up - p|| <= 1e-10``;
    * the sampled Lipschitz estimate of ``U`` is at most ``(1 + L)^2 + 1e-6``;
      whether the tighter ``L^2`` figure also held is recorded separately;
    * ``||Ux - p|| <= ||x - p|| + 1e-9`` on every sample and every ``p``.
    """
    from .mappings import estimate_lipschitz

    pts = U.base.fixed_points
    if not pts:
        raise ValueError("verify_lemma22 needs a base mapping with declared fixed points")
    gaps = [float(np.linalg.norm(U.evaluate(p) - p)) for p in pts]
    L = U.lipschitz_of_base if U.lipschitz_of_base is not None else math.inf
    lip = estimate_lipschitz(U, domain, samples, seed) if samples >= 2 else 0.0
    bound = (1.0 + L) ** 2
    X = domain.sample(samples, np.random.default_rng(seed + 1))
    UX = U.evaluate_batch(X)
    X = np.ascontiguousarray(X)
    UX = np.ascontiguousarray(UX)
    gain = max(float(kernels.distance_gain(X, UX, p).max()) for p in pts)
    return Lemma22Report(
        fixed_points_preserved=max(gaps) <= FIXED_POINT_TOL,
        lipschitz_within_bound=lip <= bound + 1e-6,
        quasi_nonexpansive=gain <= 1e-9,
        lipschitz_estimate=lip,
        lipschitz_bound=bound,
        l_squared_held=lip <= L * L + 1e-6,
        worst_fixed_point_gap=max(gaps),
        worst_distance_gain=gain,
    )
