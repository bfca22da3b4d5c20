"""Heat-evolution curves, kernel domination, and exit-time Monte Carlo."""

import math

import numpy as np
import pytest

from qtorsion.analytic import free_heat_kernel
from qtorsion.domains import Ball, Interval, discretize
from qtorsion.semigroup import (
    PathCapError,
    UnderResolvedError,
    check_domination,
    evolve_field,
    evolve_ones,
    growth_vs_bound,
    heat_kernel_column,
    mc_exit_time,
    sup_curve_integral,
)
from qtorsion.spectral import principal_eigenvalue, richardson, solve_torsion


def interval_grid(h):
    return discretize(Interval(0.0, 1.0), h)


class TestEvolveOnes:
    def test_starts_at_one(self):
        curve = evolve_ones(interval_grid(1 / 40), t_final=0.05)
        assert curve.times[0] == 0.0
        assert curve.sup_norm[0] == 1.0

    def test_sup_norm_contracts(self):
        curve = evolve_ones(interval_grid(1 / 40), t_final=0.3)
        assert np.all(curve.sup_norm <= 1.0 + 1e-12)
        assert np.all(np.diff(curve.sup_norm) <= 1e-12)

    def test_scaled_curve_field(self):
        curve = evolve_ones(interval_grid(1 / 40), t_final=0.2)
        np.testing.assert_allclose(
            curve.scaled, np.exp(curve.e0 * curve.times) * curve.sup_norm, rtol=1e-12
        )

    def test_interval_asymptote(self):
        # e^(E0 t) ||e^(t lap) 1||_inf tends to the first-mode coefficient
        # 4/pi on the unit interval
        grid = interval_grid(1 / 60)
        e0 = principal_eigenvalue(grid)
        curve = evolve_ones(grid, t_final=8.0 / e0, e0=e0)
        assert curve.scaled[-1] == pytest.approx(4.0 / math.pi, rel=0.01)

    def test_semigroup_property(self):
        # evolving 0.2 in one go equals two matched-step 0.1 legs
        grid = interval_grid(1 / 30)
        dt = (1 / 30) ** 2 / 2
        ones = np.ones(grid.n_interior)
        direct = evolve_field(grid, ones, 0.2, dt=dt)
        staged = evolve_field(grid, evolve_field(grid, ones, 0.1, dt=dt), 0.1, dt=dt)
        assert np.max(np.abs(direct - staged)) <= 1e-6 * np.max(np.abs(direct))

    def test_scaled_curve_converges_under_refinement(self):
        vals = []
        for h in (1 / 20, 1 / 40, 1 / 80):
            grid = interval_grid(h)
            e0 = principal_eigenvalue(grid)
            curve = evolve_ones(
                grid, t_final=0.5, e0=e0, sample_times=np.array([0.0, 0.25, 0.5])
            )
            vals.append(curve.scaled[-1])
        assert abs(vals[2] - vals[1]) < abs(vals[1] - vals[0])

    def test_potential_accelerates_decay(self):
        grid = interval_grid(1 / 30)
        free = evolve_ones(grid, t_final=0.1)
        damped = evolve_ones(grid, potential=np.full(grid.n_interior, 20.0), t_final=0.1)
        assert damped.sup_norm[-1] < free.sup_norm[-1]

    def test_rejects_unsorted_sample_times(self):
        grid = interval_grid(1 / 20)
        with pytest.raises(ValueError):
            evolve_ones(grid, t_final=0.2, sample_times=np.array([0.1, 0.05]))


class TestGrowthVsBound:
    def test_interval_stays_below_bound(self):
        rep = growth_vs_bound(interval_grid(1 / 50))
        assert rep.ok
        assert rep.worst_margin > 0.0
        assert np.all(rep.bound - rep.curve.sup_norm >= 0.0)
        assert len(rep.curve.times) == 100

    def test_violation_flagging_path(self):
        # an artificially hostile bound must flag, not mask
        rep = growth_vs_bound(interval_grid(1 / 50))
        assert rep.worst_time > 0.0


class TestSupCurveIntegral:
    def test_interval_matches_torsion_sup(self):
        grid = interval_grid(1 / 64)
        direct = solve_torsion(grid).sup()
        integ = sup_curve_integral(grid)
        assert integ == pytest.approx(direct, rel=0.02)
        assert direct == pytest.approx(0.125, abs=1e-10)


class TestHeatKernelColumn:
    def test_mass_bounded_by_one(self):
        grid = interval_grid(1 / 100)
        y = int(np.argmin(np.abs(grid.nodes[:, 0] - 0.5)))
        col = heat_kernel_column(grid, 0.01, y)
        mass = float(np.sum(col.values)) * (1 / 100)
        assert mass <= 1.0 + 1e-10

    def test_symmetry(self):
        grid = interval_grid(1 / 50)
        ya = int(np.argmin(np.abs(grid.nodes[:, 0] - 0.3)))
        yb = int(np.argmin(np.abs(grid.nodes[:, 0] - 0.6)))
        col_a = heat_kernel_column(grid, 0.02, ya)
        col_b = heat_kernel_column(grid, 0.02, yb)
        assert col_a.values[yb] == pytest.approx(col_b.values[ya], abs=1e-8)

    def test_short_time_matches_free_kernel(self):
        # before the boundary is felt the column tracks the whole-line kernel
        grid = interval_grid(1 / 100)
        y = int(np.argmin(np.abs(grid.nodes[:, 0] - 0.5)))
        t = 0.01
        col = heat_kernel_column(grid, t, y)
        assert col.values[y] == pytest.approx(
            float(free_heat_kernel(1, t, 0.0)), rel=0.05
        )

    def test_potential_lowers_kernel(self):
        grid = interval_grid(1 / 60)
        y = int(np.argmin(np.abs(grid.nodes[:, 0] - 0.5)))
        free = heat_kernel_column(grid, 0.02, y)
        damped = heat_kernel_column(
            grid, 0.02, y, potential=np.full(grid.n_interior, 50.0)
        )
        assert damped.values[y] < free.values[y]
        assert np.all(damped.values <= free.values + 1e-12)

    def test_under_resolved_time_rejected(self):
        grid = interval_grid(1 / 10)
        with pytest.raises(UnderResolvedError):
            heat_kernel_column(grid, 0.001, 3)


class TestDomination:
    def test_interval_calibrated_ratio(self):
        ratio = check_domination(interval_grid(1 / 200), 0.05)
        assert ratio <= 1.02

    def test_ratio_decreases_under_refinement(self):
        coarse = check_domination(interval_grid(1 / 100), 0.05)
        fine = check_domination(interval_grid(1 / 200), 0.05)
        assert fine < coarse

    def test_potential_lowers_ratio(self):
        grid = interval_grid(1 / 100)
        free = check_domination(grid, 0.05)
        damped = check_domination(
            grid, 0.05, potential=np.full(grid.n_interior, 30.0)
        )
        assert damped <= free + 1e-12


class TestMcExitTime:
    def test_deterministic_repeat(self):
        a = mc_exit_time(Interval(0.0, 1.0), (0.5,), 500, 2e-4, seed=11)
        b = mc_exit_time(Interval(0.0, 1.0), (0.5,), 500, 2e-4, seed=11)
        assert a.mean_exit == b.mean_exit
        assert a.stderr == b.stderr

    def test_seed_changes_draws(self):
        a = mc_exit_time(Interval(0.0, 1.0), (0.5,), 500, 2e-4, seed=11)
        b = mc_exit_time(Interval(0.0, 1.0), (0.5,), 500, 2e-4, seed=12)
        assert a.mean_exit != b.mean_exit

    def test_interval_bias_shrinks_with_dt(self):
        # Euler paths overshoot the boundary, so means exceed the exact
        # 1/8 and the excess scales like sqrt(dt)
        exact = 0.125
        coarse = mc_exit_time(Interval(0.0, 1.0), (0.5,), 20_000, 6.4e-4, seed=5)
        fine = mc_exit_time(Interval(0.0, 1.0), (0.5,), 20_000, 1.6e-4, seed=6)
        assert coarse.mean_exit > fine.mean_exit > exact
        ratio = (coarse.mean_exit - exact) / (fine.mean_exit - exact)
        assert 1.4 < ratio < 2.7

    def test_disc_center_window(self):
        # 0.25 plus a positive step bias well under 0.01 at this dt
        est = mc_exit_time(Ball((0.0, 0.0), 1.0), (0.0, 0.0), 3000, 2e-4, seed=3)
        assert 0.235 < est.mean_exit < 0.275

    def test_near_boundary_exits_fast(self):
        est = mc_exit_time(Interval(0.0, 1.0), (0.02,), 2000, 1e-5, seed=9)
        assert est.mean_exit < 0.02

    def test_stderr_scales_like_clt(self):
        small = mc_exit_time(Interval(0.0, 1.0), (0.5,), 2000, 4e-4, seed=21)
        big = mc_exit_time(Interval(0.0, 1.0), (0.5,), 8000, 4e-4, seed=21)
        assert big.stderr == pytest.approx(small.stderr / 2.0, rel=0.3)

    def test_start_outside_rejected(self):
        with pytest.raises(ValueError):
            mc_exit_time(Interval(0.0, 1.0), (1.5,), 100, 1e-4, seed=1)

    def test_path_cap_reported(self):
        with pytest.raises(PathCapError):
            mc_exit_time(Interval(0.0, 1.0), (0.5,), 1, 1e-10, seed=1)

    def test_estimate_fields(self):
        est = mc_exit_time(Ball((0.0, 0.0, 0.0), 1.0), (0.0, 0.0, 0.0), 400, 5e-4, seed=2)
        assert est.n_paths == 400
        assert est.dt == 5e-4
        assert est.seed == 2
        assert est.stderr > 0.0


class TestMcAgainstPde:
    def test_disc_five_point_agreement(self):
        # torsion values at five interior points, PDE side extrapolated
        # from two meshes, MC side at n = 1e5 and dt = 1e-4; a coarser-dt
        # rerun prices the Euler overshoot into the error budget
        points = [
            (0.0, 0.0),
            (0.5, 0.0),
            (-0.5, 0.0),
            (0.0, 0.5),
            (0.25, -0.25),
        ]
        disc = Ball((0.0, 0.0), 1.0)
        grids = [discretize(disc, h) for h in (1 / 32, 1 / 64)]
        sols = [solve_torsion(g) for g in grids]

        def pde_value(pt):
            vals = []
            for grid, sol in zip(grids, sols):
                k = int(np.argmin(np.sum((grid.nodes - np.asarray(pt)) ** 2, axis=1)))
                assert np.allclose(grid.nodes[k], pt, atol=1e-9)
                vals.append(float(sol.values[k]))
            return richardson(vals[0], vals[1])

        for i, pt in enumerate(points):
            mc = mc_exit_time(disc, pt, 100_000, 1e-4, seed=40 + i)
            coarse = mc_exit_time(disc, pt, 40_000, 4e-4, seed=140 + i)
            drift = abs(coarse.mean_exit - mc.mean_exit)
            combined = math.sqrt(mc.stderr**2 + coarse.stderr**2 + drift**2)
            assert abs(mc.mean_exit - pde_value(pt)) <= 3.0 * combined
