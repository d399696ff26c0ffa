"""Hot numeric kernels, each in two flavours.

``numba_impl`` holds explicit-loop versions compiled with ``@njit``;
``numpy_impl`` holds vectorized equivalents. The module-level names are bound
to whichever flavour ``SEFPP_BACKEND`` selects, so callers simply do
``from sefpp import kernels; kernels.power_iteration(...)``.

All kernels take and return float64 arrays and never raise; the callers in
``linalg`` / ``mappings`` / ``solvers`` translate status codes into
exceptions.
"""
from types import SimpleNamespace

import numpy as np

from ._backend import BACKEND, HAS_NUMBA, njit

__all__ = [
    "BACKEND",
    "numpy_impl",
    "numba_impl",
    "power_iteration",
    "pairwise_lipschitz",
    "class_slack",
    "distance_gain",
    "project_box",
    "project_ball",
    "project_halfspace",
    "soft_threshold",
    "affine_sefpp_run",
    "STATUS_CONVERGED",
    "STATUS_MAX_ITERS",
    "STATUS_NONFINITE",
]

STATUS_CONVERGED = 0
STATUS_MAX_ITERS = 1
STATUS_NONFINITE = 2


# ---------------------------------------------------------------------------
# loop kernels (compiled by numba when available)
# ---------------------------------------------------------------------------

def _matvec_loop(M, v, out):
    m, n = M.shape
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += M[i, j] * v[j]
        out[i] = s


def _rmatvec_loop(M, v, out):
    m, n = M.shape
    for j in range(n):
        out[j] = 0.0
    for i in range(m):
        vi = v[i]
        for j in range(n):
            out[j] += M[i, j] * vi


def _power_iteration_loop(M, v0, tol, max_iter):
    m, n = M.shape
    v = v0.copy()
    Mv = np.empty(m)
    w = np.empty(n)
    rq_prev = -1.0
    rq = 0.0
    for it in range(1, max_iter + 1):
        _matvec_loop(M, v, Mv)
        _rmatvec_loop(M, Mv, w)
        rq = 0.0
        nw = 0.0
        for j in range(n):
            rq += v[j] * w[j]
            nw += w[j] * w[j]
        nw = np.sqrt(nw)
        if nw == 0.0:
            return 0.0, it, True
        if abs(rq - rq_prev) < tol * rq:
            return rq, it, True
        rq_prev = rq
        for j in range(n):
            v[j] = w[j] / nw
    return rq, max_iter, False


def _pairwise_lipschitz_loop(X, TX):
    s, d = X.shape
    dt = TX.shape[1]
    best = 0.0
    for i in range(s):
        for j in range(i + 1, s):
            num = 0.0
            for k in range(dt):
                t = TX[i, k] - TX[j, k]
                num += t * t
            den = 0.0
            for k in range(d):
                t = X[i, k] - X[j, k]
                den += t * t
            if den > 0.0:
                r = np.sqrt(num / den)
                if r > best:
                    best = r
    return best


def _class_slack_loop(Y, TY, p, beta):
    # ||Ty - p||^2 - ||y - p||^2 - beta ||y - Ty||^2, per sample
    s, d = Y.shape
    out = np.empty(s)
    for i in range(s):
        a = 0.0
        b = 0.0
        c = 0.0
        for k in range(d):
            t1 = TY[i, k] - p[k]
            t2 = Y[i, k] - p[k]
            t3 = Y[i, k] - TY[i, k]
            a += t1 * t1
            b += t2 * t2
            c += t3 * t3
        out[i] = a - b - beta * c
    return out


def _distance_gain_loop(Y, TY, p):
    # ||Ty - p|| - ||y - p||, per sample
    s, d = Y.shape
    out = np.empty(s)
    for i in range(s):
        a = 0.0
        b = 0.0
        for k in range(d):
            t1 = TY[i, k] - p[k]
            t2 = Y[i, k] - p[k]
            a += t1 * t1
            b += t2 * t2
        out[i] = np.sqrt(a) - np.sqrt(b)
    return out


def _project_box_loop(x, lo, hi):
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        v = x[i]
        if v < lo[i]:
            v = lo[i]
        elif v > hi[i]:
            v = hi[i]
        out[i] = v
    return out


def _project_ball_loop(x, center, radius):
    d2 = 0.0
    for i in range(x.shape[0]):
        t = x[i] - center[i]
        d2 += t * t
    dist = np.sqrt(d2)
    out = x.copy()
    if dist > radius:
        scale = radius / dist
        for i in range(x.shape[0]):
            out[i] = center[i] + scale * (x[i] - center[i])
    return out


def _project_halfspace_loop(x, normal, offset):
    # {z : <normal, z> <= offset}
    dot = 0.0
    nn = 0.0
    for i in range(x.shape[0]):
        dot += normal[i] * x[i]
        nn += normal[i] * normal[i]
    out = x.copy()
    excess = dot - offset
    if excess > 0.0:
        c = excess / nn
        for i in range(x.shape[0]):
            out[i] = x[i] - c * normal[i]
    return out


def _soft_threshold_loop(x, t):
    out = np.empty_like(x)
    for i in range(x.shape[0]):
        v = x[i]
        if v > t:
            out[i] = v - t
        elif v < -t:
            out[i] = v + t
        else:
            out[i] = 0.0
    return out


def _affine_apply_loop(A, b, x, out):
    _matvec_loop(A, x, out)
    for i in range(out.shape[0]):
        out[i] += b[i]


def _normalized_affine_loop(A, b, eta, zeta, x, out, tmp1, tmp2):
    # out = (1-eta) x + eta T((1-zeta) x + zeta T x),  T x = A x + b
    _affine_apply_loop(A, b, x, tmp1)
    for i in range(x.shape[0]):
        tmp2[i] = (1.0 - zeta) * x[i] + zeta * tmp1[i]
    _affine_apply_loop(A, b, tmp2, tmp1)
    for i in range(x.shape[0]):
        out[i] = (1.0 - eta) * x[i] + eta * tmp1[i]


def _affine_residual_loop(A, b, x, tmp):
    _affine_apply_loop(A, b, x, tmp)
    s = 0.0
    for i in range(x.shape[0]):
        t = x[i] - tmp[i]
        s += t * t
    return np.sqrt(s)


def _affine_sefpp_run_loop(A1, b1, A2, b2, D1, D2, eta1, zeta1, eta2, zeta2,
                           alphas, taus, x0, y0, tol):
    n1 = x0.shape[0]
    n2 = y0.shape[0]
    m = D1.shape[0]
    steps = alphas.shape[0]
    X = np.empty((steps + 1, n1))
    Y = np.empty((steps + 1, n2))
    X[0] = x0
    Y[0] = y0
    ux = np.empty(n1)
    vy = np.empty(n2)
    v = np.empty(n1)
    w = np.empty(n2)
    t1a = np.empty(n1)
    t1b = np.empty(n1)
    t2a = np.empty(n2)
    t2b = np.empty(n2)
    d1x = np.empty(m)
    d2y = np.empty(m)
    gap = np.empty(m)
    cx = np.empty(n1)
    cy = np.empty(n2)
    for k in range(steps + 1):
        x = X[k]
        y = Y[k]
        _matvec_loop(D1, x, d1x)
        _matvec_loop(D2, y, d2y)
        c = 0.0
        for i in range(m):
            gap[i] = d2y[i] - d1x[i]
            c += gap[i] * gap[i]
        res = (np.sqrt(c) + _affine_residual_loop(A1, b1, x, t1a)
               + _affine_residual_loop(A2, b2, y, t2a))
        if not np.isfinite(res):
            return X, Y, k + 1, STATUS_NONFINITE
        if res < tol:
            return X, Y, k + 1, STATUS_CONVERGED
        if k == steps:
            break
        alpha = alphas[k]
        tau = taus[k]
        _rmatvec_loop(D1, gap, cx)
        for i in range(m):
            gap[i] = -gap[i]
        _rmatvec_loop(D2, gap, cy)
        _normalized_affine_loop(A1, b1, eta1, zeta1, x, ux, t1a, t1b)
        _normalized_affine_loop(A2, b2, eta2, zeta2, y, vy, t2a, t2b)
        for i in range(n1):
            v[i] = (1.0 - tau) * x[i] + tau * ux[i] + tau * cx[i]
        for i in range(n2):
            w[i] = (1.0 - tau) * y[i] + tau * vy[i] + tau * cy[i]
        _normalized_affine_loop(A1, b1, eta1, zeta1, v, ux, t1a, t1b)
        _normalized_affine_loop(A2, b2, eta2, zeta2, w, vy, t2a, t2b)
        for i in range(n1):
            X[k + 1, i] = (1.0 - alpha) * v[i] + alpha * ux[i]
        for i in range(n2):
            Y[k + 1, i] = (1.0 - alpha) * w[i] + alpha * vy[i]
    return X, Y, steps + 1, STATUS_MAX_ITERS


# ---------------------------------------------------------------------------
# vectorized numpy kernels
# ---------------------------------------------------------------------------

def _power_iteration_np(M, v0, tol, max_iter):
    v = v0.copy()
    rq_prev = -1.0
    rq = 0.0
    for it in range(1, max_iter + 1):
        w = M.T @ (M @ v)
        rq = float(v @ w)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return 0.0, it, True
        if abs(rq - rq_prev) < tol * rq:
            return rq, it, True
        rq_prev = rq
        v = w / nw
    return rq, max_iter, False


def _pairwise_lipschitz_np(X, TX, block=256):
    s = X.shape[0]
    best = 0.0
    for start in range(0, s, block):
        stop = min(start + block, s)
        dx = X[start:stop, None, :] - X[None, :, :]
        dt = TX[start:stop, None, :] - TX[None, :, :]
        den = np.einsum("ijk,ijk->ij", dx, dx)
        num = np.einsum("ijk,ijk->ij", dt, dt)
        # only pairs (i, j) with j > i, matching the loop kernel
        rows = np.arange(start, stop)[:, None]
        mask = (np.arange(s)[None, :] > rows) & (den > 0.0)
        if mask.any():
            best = max(best, float(np.sqrt((num[mask] / den[mask]).max())))
    return best


def _class_slack_np(Y, TY, p, beta):
    a = np.sum((TY - p) ** 2, axis=1)
    b = np.sum((Y - p) ** 2, axis=1)
    c = np.sum((Y - TY) ** 2, axis=1)
    return a - b - beta * c


def _distance_gain_np(Y, TY, p):
    return np.linalg.norm(TY - p, axis=1) - np.linalg.norm(Y - p, axis=1)


def _project_box_np(x, lo, hi):
    return np.minimum(np.maximum(x, lo), hi)


def _project_ball_np(x, center, radius):
    d = x - center
    dist = float(np.linalg.norm(d))
    if dist <= radius:
        return x.copy()
    return center + (radius / dist) * d


def _project_halfspace_np(x, normal, offset):
    excess = float(normal @ x) - offset
    if excess <= 0.0:
        return x.copy()
    return x - (excess / float(normal @ normal)) * normal


def _soft_threshold_np(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _affine_sefpp_run_np(A1, b1, A2, b2, D1, D2, eta1, zeta1, eta2, zeta2,
                         alphas, taus, x0, y0, tol):
    def U(A, b, eta, zeta, z):
        return (1.0 - eta) * z + eta * (A @ ((1.0 - zeta) * z + zeta * (A @ z + b)) + b)

    steps = alphas.shape[0]
    X = np.empty((steps + 1, x0.shape[0]))
    Y = np.empty((steps + 1, y0.shape[0]))
    X[0] = x0
    Y[0] = y0
    for k in range(steps + 1):
        x = X[k]
        y = Y[k]
        gap = D2 @ y - D1 @ x
        res = (np.linalg.norm(gap) + np.linalg.norm(x - (A1 @ x + b1))
               + np.linalg.norm(y - (A2 @ y + b2)))
        if not np.isfinite(res):
            return X, Y, k + 1, STATUS_NONFINITE
        if res < tol:
            return X, Y, k + 1, STATUS_CONVERGED
        if k == steps:
            break
        alpha = alphas[k]
        tau = taus[k]
        v = (1.0 - tau) * x + tau * U(A1, b1, eta1, zeta1, x) + tau * (D1.T @ gap)
        w = (1.0 - tau) * y + tau * U(A2, b2, eta2, zeta2, y) + tau * (D2.T @ -gap)
        X[k + 1] = (1.0 - alpha) * v + alpha * U(A1, b1, eta1, zeta1, v)
        Y[k + 1] = (1.0 - alpha) * w + alpha * U(A2, b2, eta2, zeta2, w)
    return X, Y, steps + 1, STATUS_MAX_ITERS


numpy_impl = SimpleNamespace(
    power_iteration=_power_iteration_np,
    pairwise_lipschitz=_pairwise_lipschitz_np,
    class_slack=_class_slack_np,
    distance_gain=_distance_gain_np,
    project_box=_project_box_np,
    project_ball=_project_ball_np,
    project_halfspace=_project_halfspace_np,
    soft_threshold=_soft_threshold_np,
    affine_sefpp_run=_affine_sefpp_run_np,
)

if HAS_NUMBA:
    # helpers first so the compiled callers resolve them as jitted functions
    _matvec_loop = njit(_matvec_loop)
    _rmatvec_loop = njit(_rmatvec_loop)
    _affine_apply_loop = njit(_affine_apply_loop)
    _normalized_affine_loop = njit(_normalized_affine_loop)
    _affine_residual_loop = njit(_affine_residual_loop)
    numba_impl = SimpleNamespace(
        power_iteration=njit(_power_iteration_loop),
        pairwise_lipschitz=njit(_pairwise_lipschitz_loop),
        class_slack=njit(_class_slack_loop),
        distance_gain=njit(_distance_gain_loop),
        project_box=njit(_project_box_loop),
        project_ball=njit(_project_ball_loop),
        project_halfspace=njit(_project_halfspace_loop),
        soft_threshold=njit(_soft_threshold_loop),
        affine_sefpp_run=njit(_affine_sefpp_run_loop),
    )
else:  # pragma: no cover
    numba_impl = None

_active = numba_impl if BACKEND == "numba" else numpy_impl

power_iteration = _active.power_iteration
pairwise_lipschitz = _active.pairwise_lipschitz
class_slack = _active.class_slack
distance_gain = _active.distance_gain
project_box = _active.project_box
project_ball = _active.project_ball
project_halfspace = _active.project_halfspace
soft_threshold = _active.soft_threshold
affine_sefpp_run = _active.affine_sefpp_run
