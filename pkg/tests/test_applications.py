import numpy as np
import pytest

from sefpp import fixtures
from sefpp.applications import ScmpProblem, SvipProblem, solve_scmp, solve_sfp, solve_svip, svip_as_sefpp
from sefpp.errors import RejectedConfigError, RejectedInputError
from sefpp.linalg import LinearOperator
from sefpp.mappings import AffineMapping, ConvexSet, ProxFunction, identity_mapping, projection_mapping
from sefpp.schedules import Schedule
from sefpp.solvers import SefppProblem, SolverConfig, build_normalized, step_known_norm

START = ([1.0], [1.0])


def two_space_sfp(T, D, x0, cfg):
    """Run the SEFPP step with D2 = I and y reset to T(Dx) before every step."""
    n = D.codomain_dim
    prob = SefppProblem(D, LinearOperator.identity(n), T, T, x0, T.evaluate(D.apply(x0)))
    U = build_normalized(T, cfg)
    taus, alphas = cfg.tau.values(cfg.max_iters), cfg.alpha.values(cfg.max_iters)
    x = np.asarray(x0, float)
    xs = [x]
    for k in range(cfg.max_iters):
        x, _ = step_known_norm(prob, U, U, alphas[k], taus[k], (x, T.evaluate(D.apply(x))))
        xs.append(x)
    return np.array(xs)


class TestSfp:
    def test_projection_feasibility(self):
        T = projection_mapping(ConvexSet.box(0, 1))
        trace = solve_sfp(T, LinearOperator([[1.0]]), [5.0], SolverConfig(stop_tolerance=1e-9))
        assert trace.converged
        assert 0.0 <= trace.final.x[0] <= 1.0 + 1e-9

    def test_fixed_start_and_identity(self):
        T = projection_mapping(ConvexSet.box(0, 1))
        assert len(solve_sfp(T, LinearOperator([[1.0]]), [0.5], SolverConfig())) == 1
        trace = solve_sfp(identity_mapping(2), LinearOperator([[1.0, 0.5], [0.0, 2.0]]), [3.0, -1.0],
                          SolverConfig())
        assert trace.final.residual == 0.0

    def test_matches_two_space_run(self):
        T = projection_mapping(ConvexSet.box([0.0, 1.0], [1.0, 2.0]))
        D = LinearOperator([[1.0, 0.5], [-0.3, 1.0]])
        cfg = SolverConfig(tau=Schedule.harmonic(0.5), max_iters=150, stop_tolerance=1e-300)
        trace = solve_sfp(T, D, [4.0, -3.0], cfg)
        ref = two_space_sfp(T, D, np.array([4.0, -3.0]), cfg)
        assert len(trace) == len(ref)
        assert np.max(np.abs(trace.xs - ref)) <= 1e-12

    def test_norm_free_and_bad_mode(self):
        T = projection_mapping(ConvexSet.box(0, 1))
        trace = solve_sfp(T, LinearOperator([[2.0]]), [3.0], SolverConfig(mode="norm-free"))
        assert trace.converged and trace.final.fix_x < 1e-8
        with pytest.raises(RejectedConfigError):
            solve_sfp(T, LinearOperator([[1.0]]), [3.0], SolverConfig(mode="decoupled-km"))


def linear_svip():
    F1 = AffineMapping([[1.0]], [-2.0], name="F1")
    F2 = AffineMapping([[1.0]], [-3.0], name="F2")
    R = ConvexSet.whole_space(1)
    return SvipProblem(F1, F2, R, R, LinearOperator([[3.0]]), LinearOperator([[2.0]]))


class TestSvip:
    @pytest.mark.parametrize("mode", ["known-norm", "norm-free"])
    def test_affine_instance(self, mode):
        p = linear_svip()
        trace = solve_svip(p, START, SolverConfig(mode=mode, stop_tolerance=1e-8))
        assert trace.converged
        assert trace.final.x[0] == pytest.approx(2.0, abs=1e-4)
        assert trace.final.y[0] == pytest.approx(3.0, abs=1e-4)

    def test_limit_satisfies_vi(self, rng):
        A = np.array([[1.0, 0.5], [-0.5, 1.0]])
        F1 = AffineMapping(A, [-1.0, 0.0])
        F2 = AffineMapping(np.eye(2), [-0.5, -0.5])
        K1 = ConvexSet.box([0.0, 0.0], [1.0, 1.0])
        K2 = ConvexSet.ball([0.0, 0.0], 1.0)
        Z = LinearOperator(np.zeros((2, 2)))
        p = SvipProblem(F1, F2, K1, K2, Z, Z)
        trace = solve_svip(p, ([0.5, 0.5], [0.0, 0.0]), SolverConfig(stop_tolerance=1e-9))
        assert trace.converged
        for F, K, z in ((F1, K1, trace.final.x), (F2, K2, trace.final.y)):
            t = K.sample(100, rng)
            assert ((t - z) @ F.evaluate(z)).min() >= -1e-5

    def test_zero_operators_stationary(self):
        zero = AffineMapping([[0.0]], [0.0])
        K = ConvexSet.box(0, 5)
        p = SvipProblem(zero, zero, K, K, LinearOperator([[1.0]]), LinearOperator([[2.0]]))
        trace = solve_svip(p, ([2.0], [1.0]), SolverConfig())
        assert trace.converged and len(trace) == 1

    def test_infeasible_reports_max_iters(self):
        p = linear_svip()
        p = SvipProblem(p.F1, p.F2, p.K1, p.K2, LinearOperator([[1.0]]), LinearOperator([[1.0]]))
        trace = solve_svip(p, START, SolverConfig(max_iters=200))
        assert trace.terminated_reason == "max_iters"

    def test_inner_failure_has_iteration(self):
        trace = solve_svip(linear_svip(), START, SolverConfig(max_iters=10), max_iter=1)
        assert trace.terminated_reason == "numerical_failure"
        assert trace.message.startswith("iteration 1:")
        assert "resolvent" in trace.message

    def test_reduction_uses_unit_lipschitz(self):
        prob = svip_as_sefpp(linear_svip(), START)
        assert prob.T1.lipschitz == prob.T2.lipschitz == 1.0
        assert prob.T1.evaluate([0.0])[0] == pytest.approx(1.0, abs=1e-9)

    def test_validation(self):
        p = linear_svip()
        with pytest.raises(RejectedInputError):
            SvipProblem(p.F1, p.F2, p.K1, p.K2, p.D1, p.D2, lam=0.0)
        with pytest.raises(RejectedInputError):
            SvipProblem(p.F1, p.F2, p.K1, p.K2, LinearOperator(np.ones((2, 1))), p.D2)
        with pytest.raises(RejectedConfigError):
            solve_svip(p, START, SolverConfig(mode="decoupled-km"))


class TestScmp:
    def test_quadratic_instance(self):
        M = ProxFunction.quadratic([[1.0]], [4.0])
        N = ProxFunction.quadratic([[1.0]], [6.0])
        p = ScmpProblem(M, N, LinearOperator([[0.5]]), LinearOperator([[1 / 3]]))
        trace = solve_scmp(p, START, SolverConfig(stop_tolerance=1e-9))
        assert trace.converged
        x, y = trace.final.x[0], trace.final.y[0]
        assert (x, y) == pytest.approx((4.0, 6.0), abs=1e-4)
        # closed-form prox fixed-point equations
        assert abs(x - (x + 4.0) / 2.0) <= 1e-5
        assert abs(y - (y + 6.0) / 2.0) <= 1e-5

    def test_zero_objectives(self):
        Z = ProxFunction.zero(1)
        p = ScmpProblem(Z, Z, LinearOperator([[1.0]]), LinearOperator([[2.0]]))
        # only the coupling term moves the iterates; a c/sqrt(n+1) step keeps it brisk
        cfg = SolverConfig(tau=Schedule.power(0.36, 0.5), stop_tolerance=1e-9)
        trace = solve_scmp(p, ([3.0], [0.0]), cfg)
        assert trace.converged
        assert trace.final.x[0] == pytest.approx(2 * trace.final.y[0], abs=1e-8)
        assert trace.final.fix_x == trace.final.fix_y == 0.0

    def test_l1_and_indicator(self):
        M = ProxFunction.l1(0.5)
        box = ConvexSet.box([1.0, 1.0], [2.0, 2.0])
        N = ProxFunction.indicator(box)
        Z = LinearOperator(np.zeros((2, 2)))
        p = ScmpProblem(M, N, Z, Z)
        trace = solve_scmp(p, ([3.0, -2.0], [5.0, 0.0]), SolverConfig(stop_tolerance=1e-9))
        assert trace.converged
        x, y = trace.final.x, trace.final.y
        # 0 in d||.||_1(x): any nonzero coordinate would need sign(x_i) * 0.5 = 0
        assert np.all(np.abs(x) <= 1e-4)
        assert box.contains(y, 1e-9)
        assert np.linalg.norm(x - M.prox(1.0, x)) <= 1e-5
