import dataclasses
import math

import numpy as np
import pytest

from fplab import (
    Field,
    OUOracle,
    Trajectory,
    hamiltonian,
    hjb_residual,
    make_grid,
    ou_exact_density,
    stationary_density,
    to_hj_potential,
)


def stationary_trajectory(spec, grid, times=(0.0, 1.0, 2.0)):
    # the repeated stationary density solves the unforced equation only
    spec = dataclasses.replace(spec, epsilon=0.0)
    phat = stationary_density(spec, grid, normalize=True)
    snaps = tuple(Field(grid, phat.values, time=t) for t in times)
    return Trajectory(snaps, pde_kind="fpe"), spec


class TestToHjPotential:
    def test_gaussian_transform(self, ou_spec, grid513):
        phat = stationary_density(ou_spec, grid513)
        s = to_hj_potential(phat, sigma=1.0)
        expected = grid513.nodes**2 + math.log(math.pi) / 2
        assert np.max(np.abs(s.values - expected)) <= 1e-12

    def test_round_trip(self, langevin_spec, grid513):
        phat = stationary_density(langevin_spec, grid513)
        s = to_hj_potential(phat, sigma=langevin_spec.sigma)
        back = np.exp(-s.values / langevin_spec.sigma**2)
        assert np.allclose(back, phat.values, rtol=1e-14)

    def test_zero_value_names_the_node(self, grid513):
        v = np.ones(grid513.n)
        v[17] = 0.0
        with pytest.raises(ValueError, match="node 17"):
            to_hj_potential(Field(grid513, v), sigma=1.0)


class TestHamiltonian:
    def test_stationary_point_values(self, ou_spec):
        at_origin = hamiltonian(ou_spec, t=0.0, x=0.0, sx=0.0, sxx=2.0)
        assert at_origin.unperturbed == 0.0
        off_origin = hamiltonian(ou_spec, t=0.0, x=1.0, sx=2.0, sxx=2.0)
        assert off_origin.unperturbed == 0.0

    def test_no_gradient_means_no_forcing_term(self, ou_spec):
        assert hamiltonian(ou_spec, t=0.7, x=1.3, sx=0.0, sxx=5.0).perturbed == 0.0

    def test_zero_epsilon_kills_forcing(self, ou_spec):
        import dataclasses
        spec = dataclasses.replace(ou_spec, epsilon=0.0)
        rng = np.random.default_rng(4)
        for t, x, sx, sxx in rng.normal(size=(10, 4)):
            out = hamiltonian(spec, t, x, sx, sxx)
            assert out.perturbed == 0.0
            assert out.total == out.unperturbed

    def test_split_is_exact(self, ou_spec):
        rng = np.random.default_rng(8)
        for t, x, sx, sxx in rng.normal(size=(20, 4)):
            out = hamiltonian(ou_spec, t, x, sx, sxx)
            assert out.total == out.unperturbed + out.perturbed

    @pytest.mark.parametrize("spec_name", ["ou_spec", "quartic_spec", "langevin_spec"])
    def test_stationary_gradient_annihilates(self, spec_name, request):
        # S = 2V + const solves the autonomous equation at every point
        spec = request.getfixturevalue(spec_name)
        rng = np.random.default_rng(12)
        lo, hi = spec.domain
        for x in rng.uniform(lo / 2, hi / 2, 100):
            _, dv, d2v = spec.potential.evaluate(x)
            out = hamiltonian(spec, 0.0, float(x), 2 * float(dv), 2 * float(d2v))
            assert abs(out.unperturbed) <= 1e-12


class TestHjbResidual:
    def test_quadratic_stationary_is_exact(self, ou_spec, grid513):
        # S is a parabola, the stencils reproduce it exactly
        traj, spec = stationary_trajectory(ou_spec, grid513)
        assert hjb_residual(traj, spec) <= 1e-10

    def test_langevin_stationary_magnitude_and_order(self, langevin_spec):
        coarse, spec = stationary_trajectory(langevin_spec, make_grid(-6, 6, 513))
        fine, _ = stationary_trajectory(langevin_spec, make_grid(-6, 6, 1025))
        r_coarse = hjb_residual(coarse, spec)
        r_fine = hjb_residual(fine, spec)
        assert r_coarse <= 1e-3
        assert 3.2 <= r_coarse / r_fine <= 4.8

    def test_forced_oracle_trajectory_second_order(self):
        oracle = OUOracle(0.1, 1.0)
        spec = oracle.problem()

        def residual(n, dt):
            grid = make_grid(-6, 6, n)
            times = np.arange(5.0, 10.0 + 1e-12, dt)
            snaps = tuple(ou_exact_density(oracle, float(t), grid) for t in times)
            return hjb_residual(Trajectory(snaps, pde_kind="fpe"), spec)

        ratio = residual(513, 0.25) / residual(1025, 0.125)
        assert 3.2 <= ratio <= 4.8

    def test_negative_inside_cutoff_rejected(self, ou_spec, grid513):
        phat = stationary_density(ou_spec, grid513)
        broken = phat.values.copy()
        broken[grid513.n // 2] = -1e-3  # at the peak, well inside the cutoff
        snaps = (
            Field(grid513, phat.values, time=0.0),
            Field(grid513, broken, time=1.0),
            Field(grid513, phat.values, time=2.0),
        )
        with pytest.raises(ValueError, match="cutoff"):
            hjb_residual(Trajectory(snaps, pde_kind="fpe"), ou_spec)

    def test_needs_uniform_spacing(self, ou_spec, grid513):
        traj, spec = stationary_trajectory(ou_spec, grid513, times=(0.0, 1.0, 3.0))
        with pytest.raises(ValueError, match="nonuniform"):
            hjb_residual(traj, spec)

    def test_needs_three_snapshots(self, ou_spec, grid513):
        traj, spec = stationary_trajectory(ou_spec, grid513, times=(0.0, 1.0))
        with pytest.raises(ValueError):
            hjb_residual(traj, spec)
