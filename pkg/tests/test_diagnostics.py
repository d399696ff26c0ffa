import numpy as np
import pytest

from sefpp import fixtures
from sefpp.diagnostics import KnownSolution, check_fejer, gamma, near_fejer_phi, residuals
from sefpp.errors import RejectedInputError
from sefpp.linalg import LinearOperator
from sefpp.mappings import identity_mapping
from sefpp.solvers import SefppProblem


def test_residuals_p1(p1):
    r = residuals((np.array([1.0]), np.array([1.0])), p1)
    assert r.coupling == pytest.approx(1 / 6, abs=1e-15)
    assert (r.fix_x, r.fix_y) == (1.5, 2.5)
    assert r.total == pytest.approx(1 / 6 + 4, abs=1e-14)
    assert residuals(fixtures.P1_SOLUTION, p1) == (0.0, 0.0, 0.0)


def test_residuals_identity_maps():
    D = LinearOperator([[1.0, 2.0], [0.0, 1.0]])
    prob = SefppProblem(D, D, identity_mapping(2), identity_mapping(2), np.zeros(2), np.zeros(2))
    x, y = np.array([1.0, -1.0]), np.array([0.5, 0.5])
    r = residuals((x, y), prob)
    assert r.coupling == pytest.approx(np.linalg.norm(D.matrix @ (x - y)), abs=1e-15)
    assert (r.fix_x, r.fix_y) == (0.0, 0.0)


def test_gamma():
    sol = KnownSolution([4.0], [6.0])
    assert gamma(([1.0], [1.0]), sol) == 34.0
    assert gamma(([4.0], [6.0]), sol) == 0.0
    shifted = KnownSolution([4.0 + 2.5], [6.0 + 2.5])
    assert gamma(([3.5], [3.5]), shifted) == 34.0
    assert gamma(([4.0], [6.0 + 1e-9]), sol) > 0


def test_known_solution_verification(p1):
    KnownSolution([4.0], [6.0]).verify(p1)
    with pytest.raises(RejectedInputError, match="coupling"):
        KnownSolution([4.1], [6.0]).verify(p1)
    with pytest.raises(RejectedInputError, match="fix_x"):
        KnownSolution([2.0], [3.0]).verify(p1)


def test_fejer_known_norm():
    assert check_fejer([34, 30, 29.5]).holds
    r = check_fejer([34, 35])
    assert not r.holds and r.first_violation_index == 0
    r = check_fejer([5, 4, 4.5, 4])
    assert r.first_violation_index == 1
    # relative slack absorbs rounding at large Gamma
    assert check_fejer([1e4, 1e4 + 1e-9]).holds


def test_fejer_norm_free():
    assert check_fejer([1.0, 9.0], mode="norm-free", phi=2.0, taus=[1.0]).holds
    assert not check_fejer([1.0, 9.1], mode="norm-free", phi=2.0, taus=[1.0]).holds
    with pytest.raises(RejectedInputError):
        check_fejer([1.0, 2.0], mode="norm-free")
    with pytest.raises(RejectedInputError):
        check_fejer([1.0, 2.0, 3.0], mode="norm-free", phi=1.0, taus=[0.1])


def test_fejer_needs_gamma_column(p1):
    from sefpp.solvers import SolverConfig, solve

    trace = solve(p1, SolverConfig(max_iters=5))
    with pytest.raises(RejectedInputError, match="gamma"):
        check_fejer(trace)


def test_near_fejer_phi(p1):
    assert near_fejer_phi(p1, 0.5) == pytest.approx(1 + 0.25 + 0.25, abs=1e-12)
