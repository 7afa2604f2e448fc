import math

import numpy as np
import pytest

from relaxed_growth.errors import InvalidParameterError
from relaxed_growth.market import MarketParams, merton_growth, merton_with_costs
from relaxed_growth.optimizer import (
    FREQ_TOL,
    _relative_value,
    _value_slope,
    default_starts,
    efficiency,
    solve_relaxed,
    symmetric_solution,
    verify_explicit,
)
from relaxed_growth.renewal import expected_cycle_time

EX1 = MarketParams(0.08, 0.40)
EX2 = MarketParams(0.08, math.sqrt(2.0 / 15.0))
COST = MarketParams(0.096, 0.40)


def closed_form_v(x, lam, sigma):
    """Antiderivative of the symmetric value slope with v(1/2) = 0."""
    z = math.log(x / (1 - x))
    return lam / sigma**2 * z * z + 0.5 * math.log(x * (1 - x)) + math.log(2.0)


class TestEfficiency:
    def test_examples(self):
        assert efficiency(0.02, 0.02) == 1.0
        assert efficiency(0.0284782, 0.0284795) == pytest.approx(0.9999544, abs=1e-7)
        assert efficiency(0.0284782, 0.0284795) > 0.99995
        assert efficiency(0.0198677, 0.02) == pytest.approx(0.993385, abs=1e-6)

    def test_rejects_nonpositive_reference(self):
        with pytest.raises(InvalidParameterError):
            efficiency(0.01, 0.0)


class TestSymmetricSolution:
    def test_h1(self):
        sol = symmetric_solution(EX1, 1.0)
        assert sol.policy.b == pytest.approx(0.59868766, abs=1e-8)
        assert sol.policy.a == pytest.approx(0.40131234, abs=1e-8)
        assert sol.policy.alpha == sol.policy.beta == 0.5
        assert sol.growth_rate == pytest.approx(math.log(math.cosh(0.2)), rel=1e-14)
        assert sol.growth_rate == pytest.approx(0.0198677, abs=1e-6)

    def test_h_quarter(self):
        sol = symmetric_solution(EX1, 0.25)
        assert sol.policy.b == pytest.approx(0.549834, abs=1e-6)
        assert sol.growth_rate == pytest.approx(0.0199667, abs=1e-7)

    def test_matches_renewal_rate(self):
        for h in (0.01, 0.3, 1.0, 4.0):
            sol = symmetric_solution(EX1, h)
            assert sol.summary.growth_rate == pytest.approx(sol.growth_rate, rel=1e-11)
            assert sol.residual_frequency < 1e-12 * max(h, 1)

    def test_lambda_and_c_reproduce_rate(self):
        for h in (0.1, 1.0, 2.0):
            sol = symmetric_solution(EX1, h)
            assert sol.lam + sol.c / h == pytest.approx(sol.growth_rate, rel=1e-10)

    def test_small_h_limit(self):
        for h in (0.1, 0.01, 0.001):
            err = 0.02 - symmetric_solution(EX1, h).growth_rate
            assert err == pytest.approx(0.4**4 * h / 192, rel=0.02)

    def test_taylor_law(self):
        d = {h: (merton_growth(EX1) - symmetric_solution(EX1, h).growth_rate) / h for h in (0.04, 0.02, 0.01)}
        target = 0.4**4 / 192
        for v in d.values():
            assert v == pytest.approx(target, rel=0.05)
        # Richardson removes the O(h) term
        assert 2 * d[0.01] - d[0.02] == pytest.approx(target, rel=1e-3)

    def test_rejects_non_symmetric(self):
        with pytest.raises(InvalidParameterError):
            symmetric_solution(EX2, 1.0)
        with pytest.raises(InvalidParameterError):
            symmetric_solution(EX1, 1.0, gamma=0.003)
        with pytest.raises(InvalidParameterError):
            symmetric_solution(EX1, 0.0)


class TestValueFunction:
    def test_slope_zero_at_midpoint(self):
        sol = symmetric_solution(EX1, 1.0)
        assert _value_slope(0.5, sol.lam, 0.4) == 0.0

    def test_quadrature_against_antiderivative(self):
        sol = symmetric_solution(EX1, 1.0)
        for x in (0.3, sol.policy.a, 0.45, 0.55, sol.policy.b, 0.9):
            assert _relative_value(x, sol.lam, 0.4) == pytest.approx(closed_form_v(x, sol.lam, 0.4), abs=1e-13)

    def test_c_matches_antiderivative(self):
        sol = symmetric_solution(EX1, 0.5)
        assert sol.c == pytest.approx(-closed_form_v(sol.policy.b, sol.lam, 0.4), abs=1e-13)


class TestVerifyExplicit:
    def test_conditions_hold(self):
        rep = verify_explicit(EX1, 1.0, grid_size=2001)
        assert rep.max_ode_residual < 1e-8
        assert max(rep.smooth_fit_residuals) < 1e-8
        assert rep.intervention_inequality_margin >= -1e-10
        assert rep.frequency_residual < 1e-10
        assert rep.generator_margin >= -1e-8

    @pytest.mark.parametrize("h", [0.1, 2.0])
    def test_other_budgets(self, h):
        rep = verify_explicit(EX1, h, grid_size=501)
        assert rep.max_ode_residual < 1e-8
        assert rep.intervention_inequality_margin >= -1e-10

    def test_detects_wrong_policy(self):
        # the ODE holds only with the optimal lambda; a perturbed rate breaks it
        from relaxed_growth.optimizer import _symmetric_lambda
        sol = symmetric_solution(EX1, 1.0)
        assert _symmetric_lambda(sol.policy.b, 0.4) == pytest.approx(sol.lam)
        x = np.linspace(sol.policy.a, sol.policy.b, 101)
        lam = sol.lam * 1.01
        v1 = _value_slope(x, lam, 0.4)
        v2 = (_value_slope(x + 1e-6, lam, 0.4) - _value_slope(x - 1e-6, lam, 0.4)) / 2e-6
        res = x * (1 - x) * (0.08 - 0.16 * x) * v1 + 0.5 * (0.4 * x * (1 - x)) ** 2 * v2 + x * (0.08 - 0.08 * x) - sol.lam
        assert np.max(np.abs(res)) > 1e-6

    def test_requires_symmetric_market(self):
        with pytest.raises(InvalidParameterError):
            verify_explicit(EX2, 1.0)


class TestSolveRelaxed:
    @pytest.mark.parametrize("h", [0.1, 0.25, 0.5, 1.0, 2.0])
    def test_closed_form_oracle(self, h):
        sol = solve_relaxed(EX1, 0.0, h)
        ref = symmetric_solution(EX1, h)
        assert sol.converged
        assert abs(sol.growth_rate - ref.growth_rate) <= 1e-6
        np.testing.assert_allclose(sol.policy.as_tuple(), ref.policy.as_tuple(), atol=1e-4)

    def test_h1_example(self):
        sol = solve_relaxed(EX1, 0.0, 1.0)
        assert sol.growth_rate == pytest.approx(0.0198677, abs=1e-6)
        assert sol.lam is not None and sol.lam + sol.c / 1.0 == pytest.approx(sol.growth_rate, rel=1e-6)

    def test_cost_example_rate_and_efficiency(self):
        sol = solve_relaxed(COST, 0.003, 0.2)
        assert sol.converged
        assert sol.growth_rate == pytest.approx(0.0284782, abs=5e-6)
        assert efficiency(sol.growth_rate, merton_with_costs(COST, 0.003).growth_rate) > 0.99995
        assert sol.policy.alpha < sol.policy.beta
        assert sol.lam is None and sol.c is None

    def test_cost_rate_increases_as_h_shrinks(self):
        rates = [solve_relaxed(COST, 0.003, h).growth_rate for h in (0.2, 0.1, 0.05)]
        v_c = merton_with_costs(COST, 0.003).growth_rate
        assert rates[0] < rates[1] < rates[2] < v_c

    @pytest.mark.parametrize("mp,gamma", [(EX1, 0.0), (EX2, 0.0), (COST, 0.003)])
    def test_monotone_in_h(self, mp, gamma):
        rates = [solve_relaxed(mp, gamma, h).growth_rate for h in (0.05, 0.1, 0.2, 0.5, 1.0)]
        assert all(r1 >= r2 for r1, r2 in zip(rates, rates[1:]))

    @pytest.mark.parametrize("mp,gamma,h", [
        (EX2, 0.0, 1.0), (EX2, 0.01, 0.5), (COST, 0.003, 2.0),
        (MarketParams(0.03, 0.4), 0.002, 0.3), (MarketParams(0.14, 0.4), 0.0, 0.7),
    ])
    def test_feasibility_and_sandwich(self, mp, gamma, h):
        sol = solve_relaxed(mp, gamma, h)
        t = expected_cycle_time(sol.policy, mp)
        assert abs(t - h) / h <= FREQ_TOL
        assert sol.growth_rate == sol.summary.growth_rate
        assert 0.0 <= sol.growth_rate <= merton_with_costs(mp, gamma).growth_rate
        assert sol.growth_rate <= merton_growth(mp)

    def test_example_two_beats_start_points(self):
        # the optimum dominates every deterministic start it was seeded with
        from relaxed_growth.optimizer import _solve_upper
        from relaxed_growth.renewal import BoundaryPolicy, _exponent, policy_growth_rate
        from scipy.special import expit, logit
        sol = solve_relaxed(EX2, 0.0, 1.0)
        k = _exponent(EX2)
        for a, al, be in default_starts(EX2, 0.0, 1.0):
            lo, hi = sorted((al, be))
            zb = _solve_upper(logit(a), logit(lo), logit(hi), k, EX2.sigma, 1.0)
            if zb is None:
                continue
            r = policy_growth_rate(BoundaryPolicy(a, lo, hi, float(expit(zb))), EX2, 0.0).growth_rate
            assert r <= sol.growth_rate + 1e-15

    def test_deterministic_across_workers(self):
        one = solve_relaxed(COST, 0.003, 0.5, workers=1)
        two = solve_relaxed(COST, 0.003, 0.5, workers=2)
        assert one == two

    def test_warm_start_does_not_hurt(self):
        cold = solve_relaxed(EX2, 0.0, 0.4)
        warm = solve_relaxed(EX2, 0.0, 0.4, extra_starts=[cold.policy.as_tuple()[:3]])
        assert warm.growth_rate >= cold.growth_rate - 1e-15

    def test_input_validation(self):
        with pytest.raises(InvalidParameterError):
            solve_relaxed(EX1, 0.0, 0.0)
        with pytest.raises(InvalidParameterError):
            solve_relaxed(EX1, 1.2, 1.0)
        with pytest.raises(InvalidParameterError):
            solve_relaxed(MarketParams(0.2, 0.4), 0.0, 1.0)
        with pytest.raises(InvalidParameterError):
            solve_relaxed(EX1, 0.0, 1.0, n_starts=3)
