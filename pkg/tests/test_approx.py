import numpy as np
import pytest

from fplab import (
    CosinePerturbation,
    Field,
    ProblemSpec,
    SchemeConfig,
    ZeroPerturbation,
    assemble,
    approx_residual,
    error_report,
    fit_slope,
    make_grid,
    scaling_study,
    solve_kappa,
    stationary_density,
    stationary_residual,
)
from fplab.approx import ScalingResult

from oracles import lsq_slope


def kappa_final(spec, grid, t1, dt=1e-3):
    scheme = SchemeConfig(dt=dt, snapshot_stride=10**9)
    k0 = Field(grid, np.zeros(grid.n))
    return solve_kappa(spec, grid, scheme, k0, 0.0, t1).final


class TestAssemble:
    def test_zero_epsilon_is_identity(self, ou_spec, grid513):
        phat = stationary_density(ou_spec, grid513)
        kappa = Field(grid513, np.sin(grid513.nodes), time=3.0)
        out = assemble(phat, kappa, 0.0)
        assert np.array_equal(out.values, phat.values)
        assert out.time == 3.0

    def test_constant_correction(self, ou_spec, grid513):
        phat = stationary_density(ou_spec, grid513)
        kappa = Field(grid513, np.full(grid513.n, 2.0), time=1.0)
        out = assemble(phat, kappa, 0.1)
        assert np.allclose(out.values, 1.2 * phat.values, rtol=1e-15)

    def test_linear_in_kappa(self, ou_spec, grid513):
        rng = np.random.default_rng(2)
        phat = stationary_density(ou_spec, grid513)
        k1 = Field(grid513, rng.normal(size=grid513.n))
        k2 = Field(grid513, rng.normal(size=grid513.n))
        combo = Field(grid513, 2 * k1.values - 3 * k2.values)
        lhs = assemble(phat, combo, 0.1).values - phat.values
        rhs = (2 * (assemble(phat, k1, 0.1).values - phat.values)
               - 3 * (assemble(phat, k2, 0.1).values - phat.values))
        assert np.allclose(lhs, rhs, atol=1e-14)

    def test_gap_scales_exactly_linearly_in_epsilon(self, ou_spec, grid513):
        # the correction field is epsilon-free, so halving epsilon halves
        # the gap to the stationary density exactly
        phat = stationary_density(ou_spec, grid513)
        kappa = kappa_final(ou_spec, grid513, 2.0, dt=5e-3)
        gap = lambda eps: np.max(np.abs(assemble(phat, kappa, eps).values - phat.values))
        assert gap(0.1) / gap(0.2) == pytest.approx(0.5, abs=1e-12)

    def test_grid_mismatch(self, ou_spec, grid513):
        phat = stationary_density(ou_spec, grid513)
        other = make_grid(-6, 6, 129)
        with pytest.raises(ValueError):
            assemble(phat, Field(other, np.zeros(129)), 0.1)


class TestErrorReport:
    def test_all_equal_gives_zeros(self, ou_spec, grid513):
        phat = stationary_density(ou_spec, grid513)
        rep = error_report(phat, phat, phat)
        assert rep.norms_p_ptilde == (0, 0, 0)
        assert np.all(rep.q_field.values == 0)

    def test_zero_epsilon_collapses_pairs(self, ou_spec, grid513):
        phat = stationary_density(ou_spec, grid513)
        p = Field(grid513, phat.values * (1 + 0.01 * np.tanh(grid513.nodes)))
        rep = error_report(p, phat, phat)
        assert rep.norms_p_ptilde == rep.norms_p_phat

    def test_triangle_inequality(self, ou_spec, grid513):
        rng = np.random.default_rng(9)
        phat = stationary_density(ou_spec, grid513)
        p = Field(grid513, np.abs(rng.normal(size=grid513.n)))
        pt = Field(grid513, np.abs(rng.normal(size=grid513.n)))
        rep = error_report(p, pt, phat)
        assert rep.norms_p_phat.linf <= (rep.norms_p_ptilde.linf
                                         + rep.norms_ptilde_phat.linf + 1e-12)

    def test_time_mismatch_rejected(self, ou_spec, grid513):
        phat = stationary_density(ou_spec, grid513)
        late = Field(grid513, phat.values, time=5.0)
        with pytest.raises(ValueError, match="time"):
            error_report(phat, late, phat)


class TestApproxResidual:
    def test_zero_perturbation_reduces_to_stationary_residual(self, ou_spec, grid513):
        # with h = 0 the correction stays zero and only the stationary
        # discretization residual remains
        spec = ProblemSpec(ou_spec.potential, ZeroPerturbation(), 0.1, 1.0,
                           ou_spec.domain)
        phat = stationary_density(spec, grid513)
        scheme = SchemeConfig(dt=0.05, snapshot_stride=1)
        k0 = Field(grid513, np.zeros(grid513.n))
        traj = solve_kappa(spec, grid513, scheme, k0, 0.0, 0.5)
        resid = approx_residual(phat, traj, spec)
        assert resid <= stationary_residual(phat, spec)

    def test_second_order_under_joint_refinement(self, ou_spec):
        def run(n, dt):
            grid = make_grid(-6, 6, n)
            phat = stationary_density(ou_spec, grid)
            scheme = SchemeConfig(dt=dt, snapshot_stride=25)
            k0 = Field(grid, np.zeros(grid.n))
            traj = solve_kappa(ou_spec, grid, scheme, k0, 0.0, 5.0)
            return approx_residual(phat, traj, ou_spec)

        ratio = run(257, 4e-3) / run(513, 2e-3)
        assert 3.2 <= ratio <= 4.8


class TestFitSlope:
    def test_exact_square_law(self):
        assert fit_slope([(1, 1), (2, 4), (4, 16)]) == pytest.approx(2.0, abs=1e-12)

    def test_flat(self):
        assert fit_slope([(1, 3), (10, 3)]) == pytest.approx(0.0, abs=1e-15)

    def test_matches_closed_form_least_squares(self):
        pts = [(1, 1), (2, 2.1), (4, 3.9)]
        expected = lsq_slope([p[0] for p in pts], [p[1] for p in pts])
        assert fit_slope(pts) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.98, abs=0.01)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fit_slope([(1, 1)])

    def test_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            fit_slope([(1, 1), (2, 0.0), (3, 2)])
        with pytest.raises(ValueError):
            fit_slope([(-1, 1), (2, 1), (3, 2)])


@pytest.fixture(scope="module")
def small_study(ou_spec):
    grid = make_grid(-6, 6, 257)
    scheme = SchemeConfig(dt=2e-3, snapshot_stride=10**9)
    return scaling_study(ou_spec, grid, scheme, [0.2, 0.1, 0.05], t_eval=7.0)


class TestScalingStudy:
    def test_second_order_gap_to_corrected(self, small_study):
        assert 1.6 <= small_study.slope_p_ptilde <= 2.4

    def test_first_order_gap_to_stationary(self, small_study):
        assert small_study.slope_ptilde_phat == pytest.approx(1.0, abs=1e-6)
        assert 0.8 <= small_study.slope_p_phat <= 1.2

    def test_slope_ordering(self, small_study):
        assert small_study.slope_p_ptilde > small_study.slope_p_phat

    def test_triangle_inequality_per_epsilon(self, small_study):
        for rep in small_study.reports:
            assert rep.norms_p_ptilde.linf <= (rep.norms_p_phat.linf
                                               + rep.norms_ptilde_phat.linf + 1e-12)

    def test_epsilons_sorted_decreasing(self, small_study):
        assert small_study.epsilons == (0.2, 0.1, 0.05)

    def test_workers_do_not_change_results(self, ou_spec):
        grid = make_grid(-6, 6, 129)
        scheme = SchemeConfig(dt=5e-3, snapshot_stride=10**9)
        serial = scaling_study(ou_spec, grid, scheme, [0.2, 0.1, 0.05], 2.0)
        threaded = scaling_study(ou_spec, grid, scheme, [0.2, 0.1, 0.05], 2.0,
                                 workers=3)
        for a, b in zip(serial.reports, threaded.reports):
            assert np.array_equal(a.q_field.values, b.q_field.values)
            assert a.norms_p_ptilde == b.norms_p_ptilde
        assert serial.slope_p_ptilde == threaded.slope_p_ptilde

    def test_validates_epsilon_ladder(self, ou_spec, grid513):
        scheme = SchemeConfig()
        with pytest.raises(ValueError):
            scaling_study(ou_spec, grid513, scheme, [0.2, 0.1], 5.0)
        with pytest.raises(ValueError):
            scaling_study(ou_spec, grid513, scheme, [0.6, 0.2, 0.1], 5.0)
        with pytest.raises(ValueError):
            scaling_study(ou_spec, grid513, scheme, [0.2, 0.2, 0.1], 5.0)
        with pytest.raises(ValueError):
            scaling_study(ou_spec, grid513, scheme, [0.2, 0.1, 0.05], 25.0)

    def test_warns_outside_asymptotic_regime(self, ou_spec):
        grid = make_grid(-6, 6, 65)
        scheme = SchemeConfig(dt=0.01, snapshot_stride=10**9)
        with pytest.warns(UserWarning, match="asymptotic"):
            scaling_study(ou_spec, grid, scheme, [0.5, 0.3, 0.25], 1.0)

    def test_result_invariants_enforced(self):
        with pytest.raises(ValueError):
            ScalingResult(epsilons=(0.1, 0.2, 0.3), reports=(None, None, None),
                          slope_p_ptilde=2, slope_ptilde_phat=1, slope_p_phat=1,
                          eval_time=5.0)
