"""Numba loop kernels against the vectorized numpy ones."""
import os
import subprocess
import sys

import numpy as np
import pytest

from sefpp import _backend, kernels

pytestmark = pytest.mark.skipif(kernels.numba_impl is None, reason="numba not installed")

NB, NP = kernels.numba_impl, kernels.numpy_impl


def test_power_iteration_agrees(rng):
    M = rng.standard_normal((30, 20))
    v0 = np.full(20, 1 / np.sqrt(20))
    a = NB.power_iteration(M, v0, 1e-12, 10_000)
    b = NP.power_iteration(M, v0, 1e-12, 10_000)
    assert a[2] and b[2]
    assert a[0] == pytest.approx(b[0], rel=1e-11)
    assert a[0] == pytest.approx(np.linalg.svd(M, compute_uv=False)[0] ** 2, rel=1e-8)


def test_pairwise_lipschitz_agrees(rng):
    X = rng.uniform(-1, 1, (300, 2))
    TX = np.sin(3 * X)
    assert NB.pairwise_lipschitz(X, TX) == pytest.approx(NP.pairwise_lipschitz(X, TX), rel=1e-12)
    # duplicate rows have zero separation and are skipped
    X[1] = X[0]
    assert np.isfinite(NB.pairwise_lipschitz(X, TX))
    assert np.isfinite(NP.pairwise_lipschitz(X, TX))


def test_class_kernels_agree(rng):
    Y = rng.standard_normal((100, 3))
    TY = 0.5 * Y + 1
    p = np.full(3, 2.0)
    np.testing.assert_allclose(NB.class_slack(Y, TY, p, 1.0), NP.class_slack(Y, TY, p, 1.0), atol=1e-12)
    np.testing.assert_allclose(NB.distance_gain(Y, TY, p), NP.distance_gain(Y, TY, p), atol=1e-12)


@pytest.mark.parametrize("x", [[2.0, -1.0, 0.5], [0.1, 0.2, 0.3], [-5.0, 7.0, 0.0]])
def test_projections_agree(x):
    x = np.array(x)
    lo, hi = np.zeros(3), np.ones(3)
    np.testing.assert_array_equal(NB.project_box(x, lo, hi), NP.project_box(x, lo, hi))
    c = np.array([0.0, 0.5, 0.0])
    np.testing.assert_allclose(NB.project_ball(x, c, 1.0), NP.project_ball(x, c, 1.0), atol=1e-15)
    a = np.array([1.0, 2.0, -1.0])
    np.testing.assert_allclose(NB.project_halfspace(x, a, 0.5), NP.project_halfspace(x, a, 0.5), atol=1e-15)
    np.testing.assert_array_equal(NB.soft_threshold(x, 0.4), NP.soft_threshold(x, 0.4))


def test_affine_run_agrees(rng):
    n = 3
    A1 = 0.4 * rng.standard_normal((n, n))
    A2 = 0.4 * rng.standard_normal((n, n))
    b1, b2 = rng.standard_normal(n), rng.standard_normal(n)
    D1, D2 = rng.standard_normal((2, n)), rng.standard_normal((2, n))
    alphas = np.full(200, 0.5)
    taus = 0.05 / (np.arange(200) + 1.0)
    args = (A1, b1, A2, b2, D1, D2, 0.1, 0.2, 0.15, 0.25, alphas, taus, np.ones(n), -np.ones(n), 0.0)
    Xa, Ya, ma, sa = NB.affine_sefpp_run(*args)
    Xb, Yb, mb, sb = NP.affine_sefpp_run(*args)
    assert (ma, sa) == (mb, sb) == (201, kernels.STATUS_MAX_ITERS)
    np.testing.assert_allclose(Xa, Xb, atol=1e-12)
    np.testing.assert_allclose(Ya, Yb, atol=1e-12)


def test_resolve_backend():
    assert _backend.resolve_backend("numpy") == "numpy"
    assert _backend.resolve_backend("auto") in ("numba", "numpy")
    with pytest.raises(ValueError):
        _backend.resolve_backend("cuda")


def test_env_flag_selects_numpy_kernels():
    env = dict(os.environ, SEFPP_BACKEND="numpy")
    code = ("from sefpp import kernels; "
            "print(kernels.BACKEND, kernels.power_iteration is kernels.numpy_impl.power_iteration)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "True"]
