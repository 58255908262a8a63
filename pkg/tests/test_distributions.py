import math

import numpy as np
import pytest

from stragmit.distributions import (
    Empirical,
    Exp,
    OrderStatSpec,
    Pareto,
    SExp,
    TruncatedPareto,
    dist_mean,
    empirical_from_file,
    empirical_from_samples,
    exp_joint_moment,
    order_stat_mean,
    pareto_joint_moment,
    sample,
    tail,
)
from stragmit.errors import DomainError, InfiniteMomentError

ALL_DISTS = [
    Exp(1.0),
    Exp(2.5),
    SExp(1.0, 1.0),
    SExp(2.0, 0.5),
    Pareto(1.0, 2.0),
    Pareto(0.5, 1.3),
    TruncatedPareto(1.0, 1e10, 1.1),
    TruncatedPareto(1.0, 50.0, 2.0),
    Empirical((0.5, 1.0, 1.0, 2.0, 7.5)),
]


class TestConstruction:
    def test_invariants_enforced(self):
        with pytest.raises(DomainError):
            Exp(0.0)
        with pytest.raises(DomainError):
            SExp(-1.0, 1.0)
        with pytest.raises(DomainError):
            Pareto(1.0, 0.0)
        with pytest.raises(DomainError):
            TruncatedPareto(2.0, 1.0, 1.1)
        with pytest.raises(DomainError):
            Empirical(())
        with pytest.raises(DomainError):
            Empirical((2.0, 1.0))  # unsorted


class TestSampling:
    def test_pareto_inverse_cdf(self):
        # a single uniform u maps to s * (1 - u)^(-1/alpha)
        rng = np.random.default_rng(0)
        u = np.random.default_rng(0).random(None)
        assert sample(Pareto(1.0, 2.0), rng) == pytest.approx((1 - u) ** -0.5)

    def test_sexp_mean_within_3se(self):
        rng = np.random.default_rng(7)
        draws = SExp(1.0, 1.0).sample_array(rng, 10**6)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - 2.0) <= 3 * se

    def test_point_mass_empirical(self):
        rng = np.random.default_rng(1)
        d = Empirical((3.0,))
        assert all(sample(d, rng) == 3.0 for _ in range(10))

    @pytest.mark.parametrize("dist", ALL_DISTS, ids=lambda d: repr(d))
    def test_empirical_tail_matches_analytic(self, dist):
        rng = np.random.default_rng(42)
        draws = dist.sample_array(rng, 10**5)
        grid = np.quantile(draws, [0.1, 0.3, 0.5, 0.8, 0.95])
        for t in grid:
            p = tail(dist, float(t))
            phat = float((draws > t).mean())
            se = math.sqrt(max(p * (1 - p), 1e-12) / draws.size)
            assert abs(phat - p) <= 3 * se + 1e-9


class TestTail:
    def test_pareto_value(self):
        assert tail(Pareto(1.0, 2.0), 2.0) == pytest.approx(0.25)

    def test_at_zero_everything_survives(self):
        for dist in ALL_DISTS:
            assert tail(dist, 0.0) == 1.0

    def test_sexp_value(self):
        assert tail(SExp(1.0, 1.0), 2.0) == pytest.approx(math.exp(-1.0))

    def test_empirical_strictly_greater(self):
        d = Empirical((1.0, 2.0, 2.0, 3.0))
        assert tail(d, 2.0) == pytest.approx(0.25)


class TestMean:
    def test_closed_forms(self):
        assert dist_mean(Pareto(1.0, 2.0)) == pytest.approx(2.0)
        assert dist_mean(SExp(2.0, 0.5)) == pytest.approx(4.0)
        assert dist_mean(Exp(4.0)) == pytest.approx(0.25)
        assert dist_mean(Empirical((1.0, 2.0, 3.0))) == pytest.approx(2.0)

    def test_pareto_infinite_mean(self):
        with pytest.raises(InfiniteMomentError):
            dist_mean(Pareto(1.0, 1.0))

    def test_truncated_pareto_quadrature_oracle(self):
        # at alpha=1.1, u=1e10 the sample mean of 1e6 draws is nowhere near
        # normal (the mean rides on ~1e-7-probability giants), so the closed
        # form is checked against quadrature in log space instead
        from scipy import integrate

        d = TruncatedPareto(1.0, 1e10, 1.1)
        mass = 1.0 - (d.s / d.u) ** d.alpha
        integrand = lambda y: math.exp(y) * d.alpha * math.exp(-d.alpha * y) / mass
        oracle, _ = integrate.quad(integrand, 0.0, math.log(d.u / d.s), limit=200)
        assert dist_mean(d) == pytest.approx(oracle, rel=1e-9)

    def test_truncated_pareto_sampling_oracle_moderate_tail(self):
        d = TruncatedPareto(1.0, 50.0, 2.0)
        rng = np.random.default_rng(3)
        draws = d.sample_array(rng, 10**6)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - dist_mean(d)) <= 3 * se

    def test_truncated_pareto_alpha_one(self):
        d = TruncatedPareto(1.0, 100.0, 1.0)
        rng = np.random.default_rng(4)
        draws = d.sample_array(rng, 10**6)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - dist_mean(d)) <= 3 * se


class TestOrderStatMean:
    def test_exp_small_case(self):
        assert order_stat_mean(Exp(1.0), OrderStatSpec(2, 2)) == pytest.approx(1.5)

    def test_pareto_single_draw(self):
        assert order_stat_mean(Pareto(1.0, 2.0), OrderStatSpec(1, 1)) == pytest.approx(2.0)

    def test_pareto_max_of_ten_vs_sampling(self):
        spec = OrderStatSpec(10, 10)
        value = order_stat_mean(Pareto(1.0, 2.0), spec)
        rng = np.random.default_rng(5)
        draws = Pareto(1.0, 2.0).sample_array(rng, (10**5, 10)).max(axis=1)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - value) <= 3 * se

    def test_exp_vs_sampling(self):
        spec = OrderStatSpec(7, 3)
        value = order_stat_mean(Exp(2.0), spec)
        rng = np.random.default_rng(6)
        draws = np.sort(Exp(2.0).sample_array(rng, (10**5, 7)), axis=1)[:, 2]
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - value) <= 3 * se

    def test_monotone_in_i_and_n(self):
        for dist in (Exp(1.0), Pareto(1.0, 2.0)):
            values_i = [order_stat_mean(dist, OrderStatSpec(10, i)) for i in range(1, 11)]
            assert all(b > a for a, b in zip(values_i, values_i[1:]))
            values_n = [order_stat_mean(dist, OrderStatSpec(n, 3)) for n in range(3, 12)]
            assert all(b < a for a, b in zip(values_n, values_n[1:]))

    def test_existence_boundary(self):
        with pytest.raises(InfiniteMomentError):
            order_stat_mean(Pareto(1.0, 0.5), OrderStatSpec(3, 2))  # alpha = 1/(n-i+1)

    def test_unsupported_dist(self):
        with pytest.raises(DomainError):
            order_stat_mean(SExp(1.0, 1.0), OrderStatSpec(2, 1))


class TestExpJointMoment:
    def test_single_sample_second_moment(self):
        assert exp_joint_moment(1, 1, 1, 1.0) == pytest.approx(2.0)

    def test_max_of_two_frozen(self):
        # E[X_{2:2}^2] = H_{2^2} + H_2^2 = 5/4 + 9/4
        assert exp_joint_moment(2, 2, 2, 1.0) == pytest.approx(3.5)

    def test_vs_sampling(self):
        rng = np.random.default_rng(8)
        draws = np.sort(Exp(1.0).sample_array(rng, (10**6, 3)), axis=1)
        prod = draws[:, 0] * draws[:, 1]
        se = prod.std(ddof=1) / math.sqrt(prod.size)
        assert abs(prod.mean() - exp_joint_moment(3, 1, 2, 1.0)) <= 3.5 * se

    def test_variance_nonnegative(self):
        for n in (1, 2, 5, 10):
            for i in range(1, n + 1):
                mean = order_stat_mean(Exp(1.0), OrderStatSpec(n, i))
                assert exp_joint_moment(n, i, i, 1.0) >= mean**2 - 1e-12

    def test_index_validation(self):
        with pytest.raises(DomainError):
            exp_joint_moment(3, 2, 1, 1.0)


class TestParetoJointMoment:
    def test_single_sample_second_moment(self):
        # E[X^2] = s^2 alpha / (alpha - 2) = 3 at alpha = 3
        assert pareto_joint_moment(1, 1, 1, 1.0, 3.0) == pytest.approx(3.0)

    def test_vs_sampling(self):
        rng = np.random.default_rng(9)
        draws = np.sort(Pareto(1.0, 3.0).sample_array(rng, (10**6, 2)), axis=1)
        prod = draws[:, 0] * draws[:, 0]
        se = prod.std(ddof=1) / math.sqrt(prod.size)
        assert abs(prod.mean() - pareto_joint_moment(2, 1, 1, 1.0, 3.0)) <= 3.5 * se

    def test_existence_boundary(self):
        with pytest.raises(InfiniteMomentError):
            pareto_joint_moment(3, 2, 2, 1.0, 1.0)  # alpha = 2/(n-i+1)

    def test_marginal_reduction_matches_sampling_grid(self):
        rng = np.random.default_rng(10)
        n, s, alpha = 6, 1.0, 3.0
        draws = np.sort(Pareto(s, alpha).sample_array(rng, (2 * 10**5, n)), axis=1)
        for i in range(1, n + 1):
            if alpha <= 2.0 / (n - i + 1):
                continue
            sq = draws[:, i - 1] ** 2
            se = sq.std(ddof=1) / math.sqrt(sq.size)
            assert abs(sq.mean() - pareto_joint_moment(n, i, i, s, alpha)) <= 4 * se

    def test_cross_moment_vs_sampling(self):
        rng = np.random.default_rng(11)
        n, i, j = 5, 2, 4
        draws = np.sort(Pareto(1.0, 3.0).sample_array(rng, (5 * 10**5, n)), axis=1)
        prod = draws[:, i - 1] * draws[:, j - 1]
        se = prod.std(ddof=1) / math.sqrt(prod.size)
        assert abs(prod.mean() - pareto_joint_moment(n, i, j, 1.0, 3.0)) <= 3.5 * se


class TestEmpiricalBuilders:
    def test_sorts(self):
        d = empirical_from_samples([3.0, 1.0, 2.0])
        assert d.samples == (1.0, 2.0, 3.0)

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            empirical_from_samples([])

    def test_pareto_draws_roundtrip_tail(self):
        rng = np.random.default_rng(12)
        draws = Pareto(1.0, 2.0).sample_array(rng, 10**4)
        d = empirical_from_samples(draws)
        assert abs(tail(d, 2.0) - 0.25) < 0.02

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "samples.txt"
        path.write_text("1.5\n2.25\n\n0.75\n")
        d = empirical_from_file(path)
        assert d.samples == (0.75, 1.5, 2.25)

    def test_file_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1.0\nnot-a-number\n")
        with pytest.raises(DomainError):
            empirical_from_file(path)
