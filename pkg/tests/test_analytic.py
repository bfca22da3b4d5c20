"""Closed-form and special-function checks against scipy oracles."""

import math

import numpy as np
import pytest
from scipy import integrate, special

from qtorsion import analytic


class TestLogGamma:
    @pytest.mark.parametrize(
        "x,expected",
        [
            (1.0, 0.0),
            (2.0, 0.0),
            (0.5, 0.5 * math.log(math.pi)),
            (6.0, math.log(120.0)),
        ],
    )
    def test_exact_points(self, x, expected):
        assert analytic.log_gamma(x) == pytest.approx(expected, abs=1e-13)

    def test_matches_scipy_on_grid(self):
        xs = np.concatenate([np.linspace(0.05, 5.0, 60), np.geomspace(5.0, 500.0, 40)])
        for x in xs:
            assert analytic.log_gamma(float(x)) == pytest.approx(
                float(special.gammaln(x)), rel=1e-12
            )

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            analytic.log_gamma(0.0)
        with pytest.raises(ValueError):
            analytic.log_gamma(-1.5)


class TestBesselJ:
    def test_half_order_closed_forms(self):
        # J_{1/2}(x) = sqrt(2/(pi x)) sin x, J_{-1/2}(x) = sqrt(2/(pi x)) cos x
        x = math.pi / 2
        assert analytic.bessel_j(0.5, x) == pytest.approx(2.0 / math.pi, rel=1e-12)
        assert analytic.bessel_j(-0.5, x) == pytest.approx(0.0, abs=1e-12)

    def test_at_origin(self):
        assert analytic.bessel_j(0.0, 0.0) == 1.0
        assert analytic.bessel_j(2.0, 0.0) == 0.0

    @pytest.mark.parametrize("nu", [-0.5, 0.0, 0.5, 1.0, 3.5, 10.0, 24.0])
    def test_matches_scipy_on_grid(self, nu):
        for x in np.linspace(0.1, 60.0, 120):
            want = float(special.jv(nu, x))
            assert analytic.bessel_j(nu, float(x)) == pytest.approx(
                want, rel=1e-9, abs=1e-12
            )

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            analytic.bessel_j(-1.0, 1.0)
        with pytest.raises(ValueError):
            analytic.bessel_j(0.0, -1.0)
        with pytest.raises(ValueError):
            analytic.bessel_j(0.0, 61.0)


class TestBesselFirstZero:
    @pytest.mark.parametrize(
        "nu,expected",
        [
            (-0.5, math.pi / 2),
            (0.5, math.pi),
            (0.0, 2.4048255577),
        ],
    )
    def test_known_zeros(self, nu, expected):
        assert analytic.bessel_first_zero(nu) == pytest.approx(expected, abs=5e-10)

    @pytest.mark.parametrize("nu", [0, 1, 2, 5, 10])
    def test_matches_scipy_integer_orders(self, nu):
        want = float(special.jn_zeros(nu, 1)[0])
        assert analytic.bessel_first_zero(float(nu)) == pytest.approx(want, rel=1e-10)

    def test_zero_residual_sweep(self):
        # the returned abscissa must actually be a root
        nus = [-0.5] + [float(k) for k in range(50)]
        for nu in nus:
            z = analytic.bessel_first_zero(nu)
            assert abs(analytic.bessel_j(nu, z)) <= 1e-9


class TestBallData:
    # reference table for the unit-ball ratio in dimensions 1..5
    TABLE_Q = [1.2337, 1.4458, 1.6449, 1.8352, 2.0191]

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
    def test_ratio_table(self, d):
        got = analytic.ball_data(d).q
        assert abs(got - self.TABLE_Q[d - 1]) < 5e-5

    def test_dimension_one_closed_form(self):
        # zero finder is accurate to 1e-10, squaring doubles the error
        data = analytic.ball_data(1)
        assert data.E0 == pytest.approx(math.pi**2 / 4, rel=1e-9)
        assert data.q == pytest.approx(math.pi**2 / 8, rel=1e-9)

    def test_dimension_three_closed_form(self):
        # j_{1/2,1} = pi, so E0 = pi^2 and q = pi^2/6
        data = analytic.ball_data(3)
        assert data.E0 == pytest.approx(math.pi**2, rel=1e-9)
        assert data.q == pytest.approx(math.pi**2 / 6, rel=1e-9)

    @pytest.mark.parametrize("d", list(range(1, 101)))
    def test_structure_identities(self, d):
        data = analytic.ball_data(d)
        assert data.torsion_sup == pytest.approx(1.0 / (2 * d), rel=1e-14)
        assert data.q == pytest.approx(data.E0 * data.torsion_sup, rel=1e-13)
        assert data.E0 >= d * d / 4.0

    def test_growth_trend(self):
        # q_d - d/8 grows like d^(1/3); the scaled gap stays bounded
        for d in range(1, 101):
            data = analytic.ball_data(d)
            assert (data.q - d / 8.0) / d ** (1.0 / 3.0) <= 1.2

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError):
            analytic.ball_data(0)
        with pytest.raises(ValueError):
            analytic.ball_data(101)


class TestExpWeightIntegral:
    @pytest.mark.parametrize(
        "d,alpha,expected",
        [
            (1, 1.0, 2.0),
            (2, 1.0, 2 * math.pi),
            (3, 2.0, math.pi),
        ],
    )
    def test_closed_forms(self, d, alpha, expected):
        assert analytic.exp_weight_integral_exact(d, alpha) == pytest.approx(
            expected, rel=1e-12
        )

    @pytest.mark.parametrize("d,alpha", [(4, 0.7), (7, 2.3)])
    def test_matches_quadrature(self, d, alpha):
        surf = 2 * math.pi ** (d / 2) / special.gamma(d / 2)
        want = integrate.quad(
            lambda r: surf * r ** (d - 1) * math.exp(-alpha * r), 0, np.inf
        )[0]
        assert analytic.exp_weight_integral_exact(d, alpha) == pytest.approx(
            want, rel=1e-10
        )

    def test_rejects_nonpositive_alpha(self):
        with pytest.raises(ValueError):
            analytic.exp_weight_integral_exact(2, 0.0)


class TestFreeHeatKernel:
    def test_spot_values(self):
        assert analytic.free_heat_kernel(1, 0.25, 0.0) == pytest.approx(
            (4 * math.pi * 0.25) ** -0.5, rel=1e-14
        )
        assert analytic.free_heat_kernel(2, 1.0, 2.0) == pytest.approx(
            math.exp(-1.0) / (4 * math.pi), rel=1e-14
        )

    def test_array_input(self):
        r = np.array([0.0, 0.5, 1.0])
        out = analytic.free_heat_kernel(2, 0.3, r)
        assert out.shape == (3,)
        assert np.all(np.diff(out) < 0)

    @pytest.mark.parametrize("d,t", [(1, 0.1), (1, 0.5), (2, 0.25)])
    def test_unit_mass(self, d, t):
        h = 0.02 * math.sqrt(t)
        radius = 10.0 * math.sqrt(t)
        assert analytic.free_heat_mass(d, t, h, radius) == pytest.approx(
            1.0, abs=1e-6
        )

    def test_mass_quadrature_envelope(self):
        with pytest.raises(ValueError):
            analytic.free_heat_mass(3, 0.4, 0.01, 2.0)

    @pytest.mark.parametrize("d,t", [(1, 0.2), (2, 0.35)])
    def test_squared_l2_norm(self, d, t):
        # int k_t(x)^2 dx = (8 pi t)^(-d/2)
        h = 0.01 * math.sqrt(t)
        radius = 10.0 * math.sqrt(t)
        got = analytic.free_heat_l2_norm_sq(d, t, h, radius)
        assert got == pytest.approx((8 * math.pi * t) ** (-d / 2), rel=1e-8)

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValueError):
            analytic.free_heat_kernel(2, 0.0, 1.0)
