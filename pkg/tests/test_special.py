import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp

from gfbt.special import (
    QuadratureError,
    QuadratureSpec,
    RootAtSupremum,
    bisect_increasing,
    cap_fraction,
    cap_fraction_from_cos,
    integrate,
    log_gamma,
    log_q_function,
    q_function,
    regularized_incomplete_beta,
    regularized_upper_gamma,
)
from gfbt import special
from oracles import cap_oracle, chi_tail_oracle, q_oracle, upper_gamma_oracle


class TestQFunction:
    def test_symmetric_point(self):
        assert q_function(0.0) == 0.5

    def test_infinite_limits(self):
        assert q_function(math.inf) == 0.0
        assert q_function(-math.inf) == 1.0

    def test_unit_argument(self):
        # frozen from q_oracle(1.0): 50-digit quadrature of the density
        assert q_oracle(1.0) == pytest.approx(0.15865525393145707, rel=1e-15)
        assert q_function(1.0) == pytest.approx(0.15865525393145707, rel=1e-14)

    @pytest.mark.parametrize("x", [-3.0, 0.3, 2.5, 6.0, 12.0, 25.0])
    def test_against_quadrature(self, x):
        assert q_function(x) == pytest.approx(q_oracle(x), rel=1e-12)

    @pytest.mark.parametrize("x", [5.0, 20.0, 30.0, 37.0, 40.0])
    def test_log_domain_to_forty(self, x):
        import mpmath

        with mpmath.workdps(40):
            ref = float(mpmath.log(mpmath.erfc(x / mpmath.sqrt(2)) / 2))
        assert log_q_function(x) == pytest.approx(ref, rel=1e-12)

    @given(st.floats(-40, 40))
    def test_complement(self, x):
        assert q_function(x) + q_function(-x) == pytest.approx(1.0, abs=1e-13)

    def test_vectorised(self):
        x = np.array([-1.0, 0.0, 1.0])
        np.testing.assert_allclose(q_function(x), [1 - 0.15865525393145707, 0.5, 0.15865525393145707],
                                   rtol=1e-14)


class TestLogGamma:
    def test_examples(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-15)
        assert log_gamma(10.0) == pytest.approx(math.log(362880), rel=1e-15)

    def test_large_dimension_prefactor(self):
        assert math.isfinite(log_gamma(1024 / 2))
        assert log_gamma(512.0) == pytest.approx(float(sp.gammaln(512.0)), rel=1e-13)

    @pytest.mark.parametrize("x", [0.0, -1.0])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            log_gamma(x)


class TestIncompleteBeta:
    def test_endpoints(self):
        assert regularized_incomplete_beta(0.0, 2.3, 4.1) == 0.0
        assert regularized_incomplete_beta(1.0, 2.3, 4.1) == 1.0

    def test_uniform_case(self):
        assert regularized_incomplete_beta(0.5, 1.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_against_scipy(self):
        rng = np.random.default_rng(3)
        x = rng.random(2000)
        a = rng.uniform(0.1, 200, 2000)
        b = rng.uniform(0.1, 200, 2000)
        ref = sp.betainc(a, b, x)
        got = regularized_incomplete_beta(x, a, b)
        big = ref > 1e-280
        np.testing.assert_allclose(got[big], ref[big], rtol=1e-12, atol=1e-300)

    @given(st.floats(0.05, 60), st.floats(0.05, 60), st.floats(0, 1), st.floats(0, 1))
    def test_monotone(self, a, b, x1, x2):
        lo, hi = sorted((x1, x2))
        assert regularized_incomplete_beta(lo, a, b) <= regularized_incomplete_beta(hi, a, b) + 1e-15

    @pytest.mark.parametrize("args", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            regularized_incomplete_beta(*args)


class TestUpperGamma:
    def test_full_mass(self):
        assert regularized_upper_gamma(3.5, 0.0) == 1.0

    @pytest.mark.parametrize("x", [0.01, 0.7, 3.0, 40.0, 300.0])
    def test_exponential(self, x):
        assert regularized_upper_gamma(1.0, x) == pytest.approx(math.exp(-x), rel=1e-13)

    def test_quadrature_point(self):
        assert regularized_upper_gamma(2.5, 3.7) == pytest.approx(upper_gamma_oracle(2.5, 3.7), rel=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 7, 16, 23, 40, 64])
    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0, 12.0, 30.0, 50.0])
    def test_chi_square_tail(self, n, x):
        assert regularized_upper_gamma(n / 2, x) == pytest.approx(chi_tail_oracle(n, x), rel=1e-10)

    def test_monotone_in_x(self):
        x = np.linspace(0, 80, 400)
        vals = regularized_upper_gamma(11.5, x)
        assert np.all(np.diff(vals) <= 0)

    @pytest.mark.parametrize("args", [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            regularized_upper_gamma(*args)


class TestCapFraction:
    @pytest.mark.parametrize("n", [2, 3, 7, 23, 128, 600])
    def test_hemisphere(self, n):
        assert cap_fraction(n, math.pi / 2) == pytest.approx(0.5, abs=1e-13)

    def test_degenerate(self):
        assert cap_fraction(9, 0.0) == 0.0
        assert cap_fraction(9, math.pi) == 1.0

    def test_three_dimensional_closed_form(self):
        assert cap_fraction(3, math.pi / 3) == pytest.approx(0.25, abs=1e-15)
        theta = np.random.default_rng(0).uniform(0, math.pi, 100)
        np.testing.assert_allclose(cap_fraction(3, theta), (1 - np.cos(theta)) / 2, atol=1e-12)

    def test_circle(self):
        theta = np.linspace(0, math.pi, 50)
        np.testing.assert_allclose(cap_fraction(2, theta), theta / math.pi, atol=1e-13)

    @given(st.integers(2, 400), st.floats(0, math.pi))
    def test_complement(self, n, theta):
        assert cap_fraction(n, theta) + cap_fraction(n, math.pi - theta) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("n", [4, 5, 8, 15, 22])
    def test_sin_power_quadrature(self, n):
        for theta in (0.1, 0.7, 1.3, 2.0, 2.9):
            assert cap_fraction(n, theta) == pytest.approx(cap_oracle(n, theta), rel=1e-11, abs=1e-15)

    def test_high_dimension_monotone(self):
        theta = np.linspace(0, math.pi, 300)
        vals = cap_fraction(1000, theta)
        assert np.all(np.isfinite(vals))
        assert np.all(np.diff(vals) >= 0)

    def test_cosine_parameterisation(self):
        c = np.linspace(-1, 1, 41)
        np.testing.assert_allclose(cap_fraction_from_cos(7, c), cap_fraction(7, np.arccos(c)), atol=1e-13)

    @pytest.mark.parametrize("args", [(1, 0.3), (5, -0.1), (5, 3.2)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            cap_fraction(*args)


class TestIntegrate:
    def test_constant(self):
        assert integrate(lambda x: np.ones_like(x), 0, 1).value == pytest.approx(1.0, abs=1e-15)

    def test_gaussian_normalisation(self):
        res = integrate(lambda x: np.exp(-x * x / 2) / math.sqrt(2 * math.pi), -math.inf, math.inf)
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_rayleigh_substitution(self):
        res = integrate(lambda r: 2 * r * np.exp(-r * r), 0, math.inf)
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_semi_infinite_left(self):
        res = integrate(lambda x: np.exp(x), -math.inf, 0.0)
        assert res.value == pytest.approx(1.0, rel=1e-10)

    def test_kronrod_rule_is_exact_to_degree_31(self):
        k = special._KWEIGHTS @ special._NODES ** 30
        assert k == pytest.approx(2 / 31, rel=1e-14)
        gauss_nodes, _ = np.polynomial.legendre.leggauss(10)
        np.testing.assert_allclose(np.sort(special._NODES[special._GWEIGHTS > 0]), gauss_nodes, atol=1e-15)
        assert special._GWEIGHTS @ special._NODES ** 18 == pytest.approx(2 / 19, rel=1e-14)

    def test_breakpoints_with_kink(self):
        res = integrate(lambda x: np.abs(x - 0.3), 0, 1, points=[0.3])
        assert res.value == pytest.approx(0.5 * (0.3 ** 2 + 0.7 ** 2), rel=1e-13)

    def test_vector_valued(self):
        res = integrate(lambda x: np.stack([x, x ** 2, np.exp(-x)]), 0, 2)
        np.testing.assert_allclose(res.value, [2.0, 8 / 3, 1 - math.exp(-2)], rtol=1e-13)

    def test_deterministic(self):
        f = lambda x: np.sin(30 * x) ** 2
        assert integrate(f, 0, 3) == integrate(f, 0, 3)

    def test_non_convergence_reported(self):
        spec = QuadratureSpec(relative_tolerance=1e-14, absolute_tolerance=1e-300, max_subdivisions=3)
        with pytest.raises(QuadratureError) as info:
            integrate(lambda x: np.sin(1 / x) / np.sqrt(x), 1e-9, 1, spec)
        assert info.value.partial.subdivisions == 3

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(relative_tolerance=0)
        with pytest.raises(ValueError):
            QuadratureSpec(max_subdivisions=0)

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("GFBT_QUAD_TOL", "1e-6")
        assert QuadratureSpec.from_env().relative_tolerance == 1e-6


class TestBisect:
    def test_identity(self):
        assert bisect_increasing(lambda r: r, 0.5, 0, 1) == pytest.approx(0.5, abs=1e-12)

    def test_square(self):
        assert bisect_increasing(lambda r: r * r, 4, 0, 10) == pytest.approx(2.0, abs=1e-12)

    def test_bounded_function_signals_supremum(self):
        with pytest.raises(RootAtSupremum):
            bisect_increasing(lambda r: 0.5 * r / (1 + r), 1.0, 0.0, math.inf)

    def test_expands_bracket(self):
        assert bisect_increasing(lambda r: r, 300.0, 0.0, 1.0) == pytest.approx(300.0, abs=1e-9)

    def test_invalid_bracket(self):
        with pytest.raises(ValueError):
            bisect_increasing(lambda r: r + 5, 1.0, 0.0, 1.0)

    @given(st.floats(0.01, 50), st.floats(1e-12, 1e-3))
    @settings(max_examples=50)
    def test_resolution(self, root, tol):
        f = lambda r: r ** 3 - root ** 3
        r = bisect_increasing(f, 0.0, 0.0, 100.0, tol=tol)
        assert abs(r - root) <= tol
