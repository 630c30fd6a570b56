import numpy as np
import pytest

from fraclap.core import FracParams, getoor_constant
from fraclap.kernels import HalfSpace
from fraclap.quadrature import QuadratureSpec, ScalarField, constant_field, strip_mass
from fraclap.solver import (
    GridFunction,
    MonotonicityProfile,
    Nonlinearity,
    PicardOperator,
    SolveReport,
    holder_estimate_check,
    lambda0_estimate,
    monotonicity_profile,
    moving_plane_check,
    picard_semilinear,
    solve_ball_dirichlet,
    solve_halfspace_linear,
)

P1 = FracParams(1, 0.5)
P2 = FracParams(2, 0.5)

ZERO = constant_field(0.0)
ONE = constant_field(1.0)


def halfspace_grid(n1=14, n2=20, L1=4.0, L2=4.0):
    ax1 = np.linspace(L1 / (2 * n1), L1 * (1 - 1 / (2 * n1)), n1)
    ax2 = np.linspace(-L2 * (1 - 1 / (2 * n2)), L2 * (1 - 1 / (2 * n2)), n2)
    return (ax1, ax2)


@pytest.fixture(scope="module")
def small_operator():
    return PicardOperator(P2, halfspace_grid())


class TestGridFunction:
    def test_interpolation_and_exterior_zero(self):
        axes = (np.linspace(0.5, 2.5, 5), np.linspace(-1.0, 1.0, 5))
        vals = np.add.outer(axes[0], np.zeros(5))
        gf = GridFunction(domain=HalfSpace(), axes=axes, values=vals)
        assert gf.eval(np.array([1.0, 0.3])) == pytest.approx(1.0, abs=1e-12)
        assert gf.eval(np.array([1.25, 0.1])) == pytest.approx(1.25, abs=1e-12)
        assert gf.eval(np.array([5.0, 0.0])) == 0.0
        assert gf.eval(np.array([-1.0, 0.0])) == 0.0

    def test_clamped_extrapolation(self):
        axes = (np.linspace(0.5, 2.5, 5), np.linspace(-1.0, 1.0, 5))
        vals = np.add.outer(axes[0], np.zeros(5))
        gf = GridFunction(domain=HalfSpace(), axes=axes, values=vals)
        assert gf.eval(np.array([5.0, 0.0]), extrapolation="clamp") == pytest.approx(2.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            GridFunction(domain=HalfSpace(), axes=(np.array([1.0, 0.5]),), values=np.zeros(2))
        with pytest.raises(ValueError):
            GridFunction(domain=HalfSpace(), axes=(np.array([0.5, 1.0]),), values=np.zeros(3))
        with pytest.raises(ValueError):
            GridFunction(
                domain=HalfSpace(),
                axes=(np.array([0.5, 1.0]),),
                values=np.array([np.inf, 0.0]),
            )


class TestNonlinearity:
    def test_power_tags(self):
        f = Nonlinearity.power(2.0)
        assert f.zero_derivative_at_zero
        assert f(np.array([0.0, 2.0]))[1] == 4.0
        f.validate(10.0)

    def test_zero(self):
        f = Nonlinearity.zero()
        assert np.all(f(np.linspace(0, 5, 7)) == 0.0)
        assert f.lipschitz_on(3.0) == 0.0

    def test_validate_rejects_mislabeled(self):
        bad = Nonlinearity(func=lambda t: -t, nonnegative=True, nondecreasing=True)
        with pytest.raises(ValueError):
            bad.validate(1.0)
        shrink = Nonlinearity(func=lambda t: 5.0 * t, lipschitz_const=1.0)
        with pytest.raises(ValueError):
            shrink.validate(1.0)


class TestBallSolve:
    def test_zero_data(self):
        grid = (np.linspace(-0.8, 0.8, 9),)
        gf = solve_ball_dirichlet(P1, 1.0, ZERO, ZERO, grid)
        assert np.max(np.abs(gf.values)) == 0.0

    def test_getoor_profile(self):
        # f == 1, g == 0: exact solution (1-x^2)^(1/2) since the constant is 1
        grid = (np.linspace(-0.9, 0.9, 19),)
        gf = solve_ball_dirichlet(P1, 1.0, ONE, ZERO, grid)
        exact = np.sqrt(1.0 - grid[0] ** 2)
        assert np.max(np.abs(gf.values - exact)) <= 1e-3

    def test_pure_boundary_data_is_one(self):
        grid = (np.linspace(-0.7, 0.7, 8),)
        gf = solve_ball_dirichlet(P1, 1.0, ZERO, ONE, grid)
        assert np.max(np.abs(gf.values - 1.0)) <= 1e-8

    def test_exterior_nodes_copy_data(self):
        grid = (np.linspace(-1.5, 1.5, 7),)
        gf = solve_ball_dirichlet(P1, 1.0, ZERO, ONE, grid)
        assert gf.values[0] == 1.0 and gf.values[-1] == 1.0


class TestHalfspaceLinear:
    def test_zero(self):
        zero = ScalarField(
            func=lambda p: np.zeros(p.shape[:-1]),
            smoothness="C2",
            support_radius=1.0,
            bound=0.0,
        )
        gf = solve_halfspace_linear(P2, zero, halfspace_grid(6, 8, 2.0, 2.0))
        assert np.max(np.abs(gf.values)) == 0.0

    def test_tangential_invariance(self):
        # f depending on x1 only; the lateral box is wide enough that the
        # kernel's own decay puts the dropped tail below the tolerance
        f = ScalarField(
            func=lambda p: np.where(p[..., 0] < 1.0, 1.0, 0.0),
            smoothness="continuous",
            bound=1.0,
        )
        box = (np.array([0.0, -1e8]), np.array([1.0, 1e8]))
        grid = (np.linspace(0.25, 1.75, 4), np.linspace(-0.5, 0.5, 3))
        gf = solve_halfspace_linear(P2, f, grid, QuadratureSpec(rel_tol=1e-7, abs_tol=1e-9), box=box)
        spread = np.max(np.abs(gf.values - gf.values[:, :1]), axis=1)
        assert np.max(spread) <= 1e-8 * (1.0 + np.max(np.abs(gf.values)))

    def test_monotone_in_x1_in_reflection_range(self):
        # slab source 1 on {y1 < 1}: the reflection comparison proves
        # u(a) <= u(b) for a < b with a + b <= 1, so test x1 in (0, 1/2]
        f = ScalarField(
            func=lambda p: np.where(p[..., 0] < 1.0, 1.0, 0.0),
            smoothness="continuous",
            bound=1.0,
        )
        box = (np.array([0.0, -8.0]), np.array([1.0, 8.0]))
        grid = (np.linspace(0.1, 0.5, 5), np.linspace(-0.1, 0.1, 2))
        gf = solve_halfspace_linear(P2, f, grid, QuadratureSpec(rel_tol=1e-7, abs_tol=1e-9), box=box)
        profile = gf.values[:, 0]
        assert np.all(np.diff(profile) > 0.0)


class TestPicard:
    def test_zero_nonlinearity_single_iteration(self, small_operator):
        axes = small_operator.axes
        u0 = GridFunction(
            domain=HalfSpace(), axes=axes, values=np.zeros([len(a) for a in axes])
        )
        gf, rep = picard_semilinear(P2, Nonlinearity.zero(), u0, operator=small_operator)
        assert rep.verdict == "converged-to-zero"
        assert rep.iterations == 1

    def test_power_collapses_to_zero(self, small_operator):
        axes = small_operator.axes
        u0 = GridFunction(
            domain=HalfSpace(),
            axes=axes,
            values=np.full([len(a) for a in axes], 0.01),
        )
        gf, rep = picard_semilinear(P2, Nonlinearity.power(2.0), u0, operator=small_operator)
        assert rep.verdict == "converged-to-zero"
        assert rep.iterations <= 10
        assert np.all(gf.values >= 0.0)

    def test_monotone_start_stays_monotone(self, small_operator):
        # if u1 <= u0 nodewise then the whole sequence decreases nodewise
        axes = small_operator.axes
        shape = [len(a) for a in axes]
        f = Nonlinearity.power(1.5)
        u = np.full(shape, 0.05)
        new = small_operator.apply(f(u))
        assert np.all(new <= u)
        for _ in range(8):
            nxt = small_operator.apply(f(new))
            assert np.all(nxt <= new + 1e-15)
            new = nxt

    def test_operator_coefficients_nonnegative(self, small_operator):
        assert np.all(small_operator.matrix >= 0.0)
        assert np.all(small_operator.diag_mass > 0.0)

    def test_rejects_negative_start(self, small_operator):
        axes = small_operator.axes
        vals = np.full([len(a) for a in axes], -0.1)
        u0 = GridFunction(domain=HalfSpace(), axes=axes, values=vals)
        with pytest.raises(ValueError):
            picard_semilinear(P2, Nonlinearity.power(2.0), u0, operator=small_operator)

    def test_report_consistency(self, small_operator):
        with pytest.raises(ValueError):
            SolveReport(iterations=2, sup_norms=[1.0], residual=0.0, verdict="converged-to-zero")
        with pytest.raises(ValueError):
            SolveReport(iterations=1, sup_norms=[1.0], residual=0.0, verdict="nonsense")


class TestMovingPlane:
    def _linear_gf(self):
        axes = halfspace_grid(10, 6, 3.0, 2.0)
        vals = np.broadcast_to(axes[0][:, None], (10, 6)).copy()
        return GridFunction(domain=HalfSpace(), axes=axes, values=vals)

    def test_zero_field_no_violations(self):
        axes = halfspace_grid(8, 6, 3.0, 2.0)
        gf = GridFunction(domain=HalfSpace(), axes=axes, values=np.zeros((8, 6)))
        rep = moving_plane_check(gf, 1.0)
        assert rep.passed

    def test_monotone_field_passes_all_levels(self):
        gf = self._linear_gf()
        for lam in np.linspace(0.3, 1.4, 6):
            assert moving_plane_check(gf, float(lam)).passed

    def test_synthetic_violation_detected(self):
        gf = self._linear_gf()
        vals = gf.values.copy()
        vals[0, :] = 2.0  # spike near the boundary breaks u(x) <= u(x^lam)
        bad = GridFunction(domain=HalfSpace(), axes=gf.axes, values=vals)
        rep = moving_plane_check(bad, 1.0)
        assert not rep.passed
        assert len(rep.violations) >= 1

    def test_rejects_uncovered_level(self):
        gf = self._linear_gf()
        with pytest.raises(ValueError):
            moving_plane_check(gf, 10.0)

    def test_extrapolation_flagged(self):
        gf = self._linear_gf()
        rep = moving_plane_check(gf, 1.6)  # reflected points cross the hull at 2.85
        assert rep.used_extrapolation


class TestMonotonicityProfile:
    def test_zero(self):
        axes = halfspace_grid(6, 4, 2.0, 2.0)
        gf = GridFunction(domain=HalfSpace(), axes=axes, values=np.zeros((6, 4)))
        assert monotonicity_profile(gf).min_slope == 0.0

    def test_linear(self):
        axes = halfspace_grid(6, 4, 2.0, 2.0)
        vals = np.broadcast_to(axes[0][:, None], (6, 4)).copy()
        gf = GridFunction(domain=HalfSpace(), axes=axes, values=vals)
        assert monotonicity_profile(gf).min_slope == pytest.approx(1.0, rel=1e-12)

    def test_picard_output_monotone(self, small_operator):
        axes = small_operator.axes
        u0 = GridFunction(
            domain=HalfSpace(), axes=axes, values=np.full([len(a) for a in axes], 0.01)
        )
        gf, rep = picard_semilinear(P2, Nonlinearity.power(2.0), u0, operator=small_operator)
        assert monotonicity_profile(gf).min_slope >= -1e-6


class TestLambda0:
    @pytest.mark.slow
    def test_golden_value_and_margin(self):
        # frozen regression from this build's bisection + strip-mass oracle
        lam0 = lambda0_estimate(P2, 1.0)
        assert lam0 == pytest.approx(0.618, abs=0.02)
        sup = max(
            strip_mass(P2, 2.0 * lam0, np.array([a * lam0, 0.0]))
            for a in np.linspace(0.02, 0.98, 17)
        )
        assert sup < 1.0 / 1.0  # strict inequality with margin
        assert sup <= 0.9 + 1e-3

    def test_monotone_in_lipschitz_constant(self):
        lam_small = lambda0_estimate(P2, 4.0, n_samples=8)
        lam_large = lambda0_estimate(P2, 1.0, n_samples=8)
        assert lam_small <= lam_large + 1e-9

    def test_rejects_bad_constant(self):
        with pytest.raises(ValueError):
            lambda0_estimate(P2, 0.0)


class TestHolder:
    def _ball_solution(self, n):
        grid = (np.linspace(-0.9, 0.9, n),)
        return solve_ball_dirichlet(P1, 1.0, ONE, ZERO, grid)

    def test_zero_field(self):
        axes = (np.linspace(-0.9, 0.9, 11),)
        gf = GridFunction(domain=HalfSpace(), axes=axes, values=np.zeros(11))
        res = holder_estimate_check(P1, gf, ZERO, 0.5, 0.25)
        assert res.quotient == 0.0

    def test_getoor_quotient_finite(self):
        gf = self._ball_solution(19)
        res = holder_estimate_check(P1, gf, ONE, 0.5, 0.5 * min(1.0, 2 * P1.s) * 0.9)
        assert np.isfinite(res.quotient)
        assert 0.0 < res.bound_ratio < 10.0

    def test_rejects_alpha_out_of_range(self):
        gf = self._ball_solution(9)
        with pytest.raises(ValueError):
            holder_estimate_check(P1, gf, ONE, 0.5, 1.5)
        with pytest.raises(ValueError):
            holder_estimate_check(P1, gf, ONE, 0.5, 1.0)
