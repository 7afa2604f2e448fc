import math

import numpy as np
import pytest

from relaxed_growth.baselines import (
    a_of_h,
    a_of_h_taylor,
    golden_section_max,
    h_investor_growth,
    lambda_investor_growth,
    period_return_moment,
)
from relaxed_growth.errors import InvalidParameterError
from relaxed_growth.market import MarketParams, merton_growth
from relaxed_growth.montecarlo import path_generator
from relaxed_growth.optimizer import solve_relaxed

EX1 = MarketParams(0.08, 0.40)
EX2 = MarketParams(0.08, math.sqrt(2.0 / 15.0))
SWEEP = (0.01, 0.02, 0.05, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0)


def mc_expected_log(mp, h, a, n, seed):
    z = path_generator(seed, 0).standard_normal(n)
    ret = np.exp(mp.sigma * math.sqrt(h) * z + (mp.mu - 0.5 * mp.sigma**2) * h)
    vals = np.log1p(a * (ret - 1.0))
    return vals.mean(), vals.std(ddof=1) / math.sqrt(n)


class TestGoldenSection:
    def test_interior_maximum_to_tolerance(self):
        x, fx = golden_section_max(lambda t: -(t - 0.3141592653589793) ** 2, 0.0, 1.0, tol=1e-10)
        assert abs(x - 0.3141592653589793) < 1e-10
        assert fx == pytest.approx(0.0, abs=1e-20)

    def test_endpoint_maxima(self):
        assert golden_section_max(lambda t: t, 0.0, 1.0)[0] == 1.0
        assert golden_section_max(lambda t: -t, 0.0, 1.0)[0] == 0.0


class TestMoments:
    def test_examples(self):
        assert period_return_moment(0, EX1, 1.0) == 1.0
        assert period_return_moment(1, EX1, 1.0) == pytest.approx(math.exp(0.08), rel=1e-14)
        assert period_return_moment(1, EX1, 1.0) == pytest.approx(1.083287, abs=1e-6)
        assert period_return_moment(2, EX1, 1.0) == pytest.approx(math.exp(0.32), rel=1e-14)
        assert period_return_moment(2, EX1, 1.0) == pytest.approx(1.377128, abs=1e-6)

    def test_sampled_first_moment(self):
        z = path_generator(3, 0).standard_normal(10**6)
        ret = np.exp(0.4 * z + (0.08 - 0.08))
        se = ret.std(ddof=1) / 1e3
        assert abs(ret.mean() - period_return_moment(1, EX1, 1.0)) < 4 * se

    def test_negative_order_rejected(self):
        with pytest.raises(InvalidParameterError):
            period_return_moment(-1, EX1, 1.0)


class TestQuadrature:
    def test_small_h_limit(self):
        A, _ = a_of_h(EX1, 0.01)
        assert A / 0.01 == pytest.approx(0.02, abs=1e-4)

    def test_nonnegative_since_zero_fraction_is_free(self):
        for h in SWEEP:
            A, a_star = a_of_h(EX1, h)
            assert A >= 0.0
            assert 0.0 <= a_star <= 1.0

    def test_below_merton_and_nonincreasing(self):
        for mp in (EX1, EX2):
            rates = [a_of_h(mp, h)[0] / h for h in SWEEP]
            assert all(r <= merton_growth(mp) for r in rates)
            assert all(r1 >= r2 for r1, r2 in zip(rates, rates[1:]))

    @pytest.mark.parametrize("h", [0.25, 1.0])
    def test_against_monte_carlo(self, h):
        A, a_star = a_of_h(EX1, h)
        mean, se = mc_expected_log(EX1, h, a_star, 10**6, seed=1)
        assert abs(mean - A) < 4 * se

    @pytest.mark.slow
    def test_h1_against_large_monte_carlo(self):
        A, a_star = a_of_h(EX1, 1.0)
        assert A < 0.02
        means, ses = zip(*(mc_expected_log(EX1, 1.0, a_star, 10**6, seed=s) for s in range(10, 20)))
        mean, se = float(np.mean(means)), float(np.sqrt(np.sum(np.square(ses)))) / 10
        assert abs(mean - A) < 3 * se

    def test_node_count_converged(self):
        assert a_of_h(EX1, 2.0, nodes=64)[0] == pytest.approx(a_of_h(EX1, 2.0, nodes=128)[0], rel=1e-12)
        with pytest.raises(InvalidParameterError):
            a_of_h(EX1, 1.0, nodes=16)


class TestTaylor:
    def test_agrees_with_quadrature_at_small_h(self):
        A_t, a_t = a_of_h_taylor(EX1, 0.1, order=6)
        A_q, a_q = a_of_h(EX1, 0.1)
        assert abs(A_t - A_q) <= 1e-3 * A_q
        assert 0.0 <= a_t <= 1.0

    def test_error_shrinks_with_order(self):
        A_q, _ = a_of_h(EX1, 0.5)
        errors = [abs(a_of_h_taylor(EX1, 0.5, order=n)[0] - A_q) for n in range(2, 9)]
        assert all(e1 > e2 for e1, e2 in zip(errors, errors[1:]))

    def test_order_below_two_rejected(self):
        with pytest.raises(InvalidParameterError):
            a_of_h_taylor(EX1, 0.1, order=1)


class TestInvestors:
    def test_h_investor(self):
        assert h_investor_growth(EX1, 0.01).growth_rate == pytest.approx(0.02, abs=1e-4)
        res = h_investor_growth(EX1, 1.0)
        assert res.method == "quadrature"
        assert res.growth_rate < 0.02
        assert res.growth_rate < solve_relaxed(EX1, 0.0, 1.0).growth_rate

    def test_lambda_investor(self):
        res = lambda_investor_growth(EX1, 1.0)
        assert res.growth_rate == pytest.approx(0.0192, abs=1e-15)
        assert res.method == "formula" and res.optimal_fraction is None
        assert lambda_investor_growth(EX1, 1e9).growth_rate == pytest.approx(0.02, abs=1e-11)
        for lam in (0.5, 1.0, 10.0, 1e3):
            gap = merton_growth(EX1) - lambda_investor_growth(EX1, lam).growth_rate
            assert lam * gap == pytest.approx(0.0008, rel=1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidParameterError):
            lambda_investor_growth(EX1, 0.0)
        with pytest.raises(InvalidParameterError):
            h_investor_growth(EX1, -1.0)
