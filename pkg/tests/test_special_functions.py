import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from stragmit.errors import DegenerateError, DivergenceError, DomainError, PoleError
from stragmit.special_functions import (
    approx_binom_harmonic,
    approx_binom_reg_inc_beta,
    beta,
    binom_expect,
    gamma_fn,
    gamma_ratio_sum,
    gen_harmonic2,
    harmonic,
    inc_beta,
    reg_inc_beta,
)

SQRT_PI = math.sqrt(math.pi)


class TestHarmonic:
    def test_empty_sum(self):
        assert harmonic(0) == 0.0

    def test_integer_values_match_finite_sum(self):
        for n in (1, 2, 4, 10, 50, 200):
            exact = sum(1.0 / i for i in range(1, n + 1))
            assert harmonic(n) == pytest.approx(exact, rel=1e-12)

    def test_real_argument_matches_integral(self):
        # frozen from adaptive quadrature of (1 - t**2.5) / (1 - t) on [0, 1]
        assert harmonic(2.5) == pytest.approx(1.680372305546776, rel=1e-12)

    def test_quadrature_oracle_on_grid(self):
        for x in (0.3, 1.7, 5.25, 12.0):
            oracle, _ = integrate.quad(lambda t, x=x: (1 - t**x) / (1 - t), 0, 1)
            assert harmonic(x) == pytest.approx(oracle, rel=1e-9)

    def test_rejects_negative_and_nonfinite(self):
        for bad in (-0.5, math.nan, math.inf):
            with pytest.raises(DomainError):
                harmonic(bad)


class TestGenHarmonic2:
    def test_small_values(self):
        assert gen_harmonic2(1) == pytest.approx(1.0)
        assert gen_harmonic2(3) == pytest.approx(49.0 / 36.0)

    def test_direct_summation_oracle(self):
        exact = sum(1.0 / i**2 for i in range(1, 101))
        assert gen_harmonic2(100) == pytest.approx(exact, rel=1e-12)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            gen_harmonic2(0)


class TestGamma:
    def test_factorial(self):
        assert gamma_fn(5) == pytest.approx(24.0)

    def test_half(self):
        assert gamma_fn(0.5) == pytest.approx(SQRT_PI)

    def test_negative_half(self):
        assert gamma_fn(-0.5) == pytest.approx(-2.0 * SQRT_PI)

    def test_poles(self):
        for x in (0.0, -1.0, -2.0, -7.0):
            with pytest.raises(PoleError):
                gamma_fn(x)

    def test_recurrence_on_grid(self):
        # Gamma(x+1) = x Gamma(x) away from poles
        for x in np.arange(-5.0, 20.0, 0.37):
            if x <= 0 and abs(x - round(x)) < 1e-9:
                continue
            assert gamma_fn(x + 1) == pytest.approx(x * gamma_fn(x), rel=1e-10)


class TestBeta:
    def test_ones(self):
        assert beta(1, 1) == pytest.approx(1.0)

    def test_integer_case(self):
        assert beta(2, 3) == pytest.approx(1.0 / 12.0)

    def test_negative_parameter(self):
        # frozen from an independent high-precision Gamma evaluation
        assert beta(3.5, -0.4) == pytest.approx(-5.6300769449757619, rel=1e-12)

    def test_pole(self):
        with pytest.raises(PoleError):
            beta(1.0, -2.0)


class TestIncBeta:
    def test_zero(self):
        assert inc_beta(0.0, 2.0, 3.0) == 0.0

    def test_complete_case(self):
        assert inc_beta(1.0, 2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-12)

    def test_n_zero_quadrature(self):
        # frozen from adaptive quadrature of u**2 / (1 - u) on [0, 0.5]
        assert inc_beta(0.5, 3.0, 0.0) == pytest.approx(0.068147180559945309, rel=1e-10)

    def test_n_zero_non_integer_m(self):
        oracle, _ = integrate.quad(lambda u: u**1.7 / (1 - u), 0, 0.8)
        assert inc_beta(0.8, 2.7, 0.0) == pytest.approx(oracle, rel=1e-8)

    def test_negative_n(self):
        oracle, _ = integrate.quad(lambda u: u**3.2 * (1 - u) ** (-1.4), 0, 0.9)
        assert inc_beta(0.9, 4.2, -0.4) == pytest.approx(oracle, rel=1e-8)

    def test_divergence_at_one(self):
        with pytest.raises(DivergenceError):
            inc_beta(1.0, 2.0, 0.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            inc_beta(1.5, 2.0, 1.0)


class TestRegIncBeta:
    def test_uniform_cdf(self):
        assert reg_inc_beta(0.5, 1.0, 1.0) == pytest.approx(0.5)

    def test_complete(self):
        assert reg_inc_beta(1.0, 3.0, 4.5) == pytest.approx(1.0)

    def test_quadrature_ratio(self):
        assert reg_inc_beta(0.3, 4.0, 2.5) == pytest.approx(0.048500541136373826, rel=1e-10)

    def test_degenerate_second_parameter(self):
        with pytest.raises((DegenerateError, PoleError)):
            reg_inc_beta(0.5, 2.0, 0.0)

    @given(
        q=st.floats(0.001, 0.999),
        m=st.floats(0.1, 25.0),
        n=st.floats(0.1, 25.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_complement_identity(self, q, m, n):
        assert reg_inc_beta(q, m, n) + reg_inc_beta(1 - q, n, m) == pytest.approx(1.0, abs=1e-10)


class TestGammaRatioSum:
    def test_frozen_examples(self):
        # frozen from term-by-term high-precision summation
        assert gamma_ratio_sum(3, 0.5) == pytest.approx(3.3233509704478426, rel=1e-12)
        assert gamma_ratio_sum(1, 0.5) == pytest.approx(SQRT_PI, rel=1e-12)
        assert gamma_ratio_sum(10, 0.25) == pytest.approx(7.428521270318653, rel=1e-12)

    @pytest.mark.parametrize("beta_param", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    def test_direct_summation_oracle(self, beta_param):
        # term-by-term summation in arbitrary precision (float Gamma overflows
        # long before n = 200; the identity itself is ratio-stable)
        mp = pytest.importorskip("mpmath")
        for n in (1, 2, 5, 20, 77, 200):
            direct = float(
                sum(mp.gamma(m - beta_param) / mp.gamma(m) for m in range(1, n + 1))
            )
            assert gamma_ratio_sum(n, beta_param) == pytest.approx(direct, rel=1e-9)

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma_ratio_sum(3, 1.0)
        with pytest.raises(DomainError):
            gamma_ratio_sum(0, 0.5)


class TestBinomExpect:
    def test_mean(self):
        assert binom_expect(lambda r: float(r), 10, 0.3) == pytest.approx(3.0, rel=1e-12)

    def test_normalization(self):
        assert binom_expect(lambda r: 1.0, 17, 0.42) == pytest.approx(1.0, rel=1e-12)

    def test_harmonic_expectation_frozen(self):
        # frozen from high-precision summation of H_{20-r} * pmf(r)
        value = binom_expect(lambda r: harmonic(20 - r), 10, 0.4)
        assert value == pytest.approx(3.376231895350036, rel=1e-12)

    def test_nonfinite_propagates(self):
        with pytest.raises(DomainError):
            binom_expect(lambda r: math.inf, 3, 0.5)

    def test_large_k_stability(self):
        assert binom_expect(lambda r: 1.0, 5000, 1e-3) == pytest.approx(1.0, rel=1e-9)


class TestBinomApproximations:
    def test_harmonic_exact_at_q0(self):
        n, k = 20.0, 10
        assert approx_binom_harmonic(n, k, 0.0) == pytest.approx(
            binom_expect(lambda r: harmonic(n - r), k, 0.0), rel=1e-12
        )

    def test_harmonic_exact_at_q1(self):
        n, k = 20.0, 10
        assert approx_binom_harmonic(n, k, 1.0) == pytest.approx(
            binom_expect(lambda r: harmonic(n - r), k, 1.0), rel=1e-12
        )

    def test_harmonic_mid_q_vs_oracle(self):
        value = approx_binom_harmonic(20.0, 10, 0.4)
        assert value == pytest.approx(harmonic(16.0), rel=1e-12)
        oracle = binom_expect(lambda r: harmonic(20 - r), 10, 0.4)
        rel_err = abs(value - oracle) / oracle
        assert rel_err < 0.05
        print(f"\n[recorded] E[H_(n-R)] approximation rel err at k=10, q=0.4: {rel_err:.2e}")

    def test_reg_inc_beta_exact_at_endpoints(self):
        for q in (0.0, 1.0):
            value = approx_binom_reg_inc_beta(0.6, 12.0, 5.0, 8, q)
            oracle = binom_expect(lambda r: reg_inc_beta(0.6, 12.0 - r, 5.0), 8, q)
            assert value == pytest.approx(oracle, rel=1e-10)

    def test_reg_inc_beta_mid_q_vs_oracle(self):
        value = approx_binom_reg_inc_beta(0.6, 12.0, 5.0, 8, 0.5)
        assert value == pytest.approx(0.43817822208, rel=1e-9)
        oracle = binom_expect(lambda r: reg_inc_beta(0.6, 12.0 - r, 5.0), 8, 0.5)
        assert abs(value - oracle) / oracle < 0.05

    def test_approximation_quality_grid(self):
        # published grid: the harmonic form everywhere, the I form at the bulk
        # of the limiting Beta (z chosen so I is near 0.5). Relative error in
        # the deep lower tail of I grows without bound; recorded, not asserted.
        worst_bulk = 0.0
        worst_tail = 0.0
        for k in (10, 20, 50):
            for q in (0.1, 0.3, 0.5, 0.7, 0.9):
                n = 2.0 * k
                ah = approx_binom_harmonic(n, k, q)
                oh = binom_expect(lambda r: harmonic(n - r), k, q)
                worst_bulk = max(worst_bulk, abs(ah - oh) / oh)
                x, y = float(k), n - k + 1.0
                z_bulk = (x - k * q) / ((x - k * q) + y)
                for z, bucket in ((z_bulk, "bulk"), (0.5 * z_bulk, "tail")):
                    ab = approx_binom_reg_inc_beta(z, x, y, k, q)
                    ob = binom_expect(
                        lambda r: reg_inc_beta(z, x - r, y) if x - r > 0 else 1.0, k, q
                    )
                    err = abs(ab - ob) / ob
                    if bucket == "bulk":
                        worst_bulk = max(worst_bulk, err)
                    else:
                        worst_tail = max(worst_tail, err)
        print(
            f"\n[recorded] binomial-approximation rel err, k >= 10: "
            f"bulk grid {worst_bulk:.2e}, lower-tail grid {worst_tail:.2e}"
        )
        assert worst_bulk < 0.05

    def test_domain(self):
        with pytest.raises(DomainError):
            approx_binom_harmonic(3.0, 10, 0.5)
        with pytest.raises(DomainError):
            approx_binom_reg_inc_beta(0.5, 4.0, 2.0, 10, 0.5)
