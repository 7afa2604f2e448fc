"""Renewal-reward statistics of constant boundary strategies.

A constant boundary strategy lets the risky fraction diffuse freely inside
``(a, b)``; on hitting ``a`` it is traded back to ``alpha`` and on hitting
``b`` back to ``beta``. Restart points form a two-state Markov chain, so
long-run rates follow from the chain's stationary law and the expected
cycle length.

The scale function ``h0`` and the time function ``h1`` are written in the
log-odds variable ``ell(x) = log((1 - x)/x)``. Differences are evaluated
through ``expm1`` and factored logs so that nearby arguments do not cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidParameterError
from .market import (
    HALF_TOL,
    MarketParams,
    rebalance_reward,
    require_interior_ratio,
)


@dataclass(frozen=True)
class BoundaryPolicy:
    """Trigger/restart levels ``0 < a < alpha <= beta < b < 1``."""

    a: float
    alpha: float
    beta: float
    b: float

    def __post_init__(self):
        vals = (self.a, self.alpha, self.beta, self.b)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidParameterError("policy levels must be finite")
        if not (0.0 < self.a < self.alpha <= self.beta < self.b < 1.0):
            raise InvalidParameterError(
                "policy requires 0 < a < alpha <= beta < b < 1, got "
                f"({self.a}, {self.alpha}, {self.beta}, {self.b})"
            )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.alpha, self.beta, self.b)


@dataclass(frozen=True)
class RenewalSummary:
    nu_alpha: float
    expected_cycle_time: float
    growth_rate: float
    trade_frequency: float


def _exponent(mp: MarketParams) -> float:
    """2 pi* - 1, snapped to 0 inside the symmetric branch."""
    k = 2.0 * mp.merton_ratio - 1.0
    return 0.0 if abs(k) < HALF_TOL else k


def _ell(x: float) -> float:
    return math.log1p(-x) - math.log(x)


def _check_open_unit(x) -> None:
    arr = np.asarray(x, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError(f"fraction must lie in (0, 1), got {x}")


def scale_h0(x, mp: MarketParams):
    """Scale function of the uncontrolled fraction diffusion."""
    _check_open_unit(x)
    x = np.asarray(x, dtype=float)
    ell = np.log1p(-x) - np.log(x)
    k = _exponent(mp)
    out = ell if k == 0.0 else -np.exp(k * ell)
    return float(out) if out.ndim == 0 else out


def time_h1(x, mp: MarketParams):
    """Expected-time function: E_pi(tau) is affine in h0 minus h1."""
    _check_open_unit(x)
    x = np.asarray(x, dtype=float)
    ell = np.log1p(-x) - np.log(x)
    k = _exponent(mp)
    if k == 0.0:
        out = ell**2 / mp.sigma**2
    else:
        out = -2.0 * ell / (mp.sigma**2 * k)
    return float(out) if out.ndim == 0 else out


# Scalar difference kernels. ``x`` and ``y`` are already validated fractions.

def _h0_diff(x: float, y: float, k: float) -> float:
    """h0(x) - h0(y)."""
    ex, ey = _ell(x), _ell(y)
    if k == 0.0:
        return ex - ey
    return -math.exp(k * ey) * math.expm1(k * (ex - ey))


def _h1_diff(x: float, y: float, k: float, sigma: float) -> float:
    """h1(x) - h1(y)."""
    ex, ey = _ell(x), _ell(y)
    if k == 0.0:
        return (ex - ey) * (ex + ey) / sigma**2
    return -2.0 * (ex - ey) / (sigma**2 * k)


def _check_interval(pi: float, a: float, b: float) -> None:
    if not (0.0 < a < b < 1.0):
        raise InvalidParameterError(f"0 < a < b < 1 required, got a={a}, b={b}")
    if not (a <= pi <= b):
        raise DomainError(f"pi must lie in [a, b] = [{a}, {b}], got {pi}")


def exit_probability_upper(pi: float, a: float, b: float, mp: MarketParams) -> float:
    """Probability that the fraction started at ``pi`` reaches ``b`` before ``a``."""
    _check_interval(pi, a, b)
    if pi == a:
        return 0.0
    if pi == b:
        return 1.0
    k = _exponent(mp)
    return _h0_diff(pi, a, k) / _h0_diff(b, a, k)


def expected_exit_time(pi: float, a: float, b: float, mp: MarketParams) -> float:
    """Mean first exit time of ``(a, b)`` from ``pi``."""
    _check_interval(pi, a, b)
    if pi == a or pi == b:
        return 0.0
    k = _exponent(mp)
    p_up = _h0_diff(pi, a, k) / _h0_diff(b, a, k)
    return p_up * _h1_diff(b, a, k, mp.sigma) - _h1_diff(pi, a, k, mp.sigma)


def _nu_alpha(a: float, alpha: float, beta: float, b: float, k: float) -> float:
    lower = _h0_diff(alpha, a, k)
    upper = _h0_diff(b, beta, k)
    denom = lower + upper
    if denom == 0.0:
        raise InvalidParameterError("degenerate policy: alpha = a and beta = b")
    return upper / denom


def _cycle_time(a: float, alpha: float, beta: float, b: float, k: float, sigma: float) -> tuple[float, float]:
    """Return (nu_alpha, expected cycle time)."""
    p = _nu_alpha(a, alpha, beta, b, k)
    t = p * -_h1_diff(alpha, a, k, sigma) + (1.0 - p) * _h1_diff(b, beta, k, sigma)
    return p, t


def invariant_distribution(policy: BoundaryPolicy, mp: MarketParams) -> float:
    """Stationary probability that a cycle restarts at ``alpha``."""
    return _nu_alpha(*policy.as_tuple(), _exponent(mp))


def expected_cycle_time(policy: BoundaryPolicy, mp: MarketParams) -> float:
    """Mean time between consecutive trades under the stationary restart law."""
    return _cycle_time(*policy.as_tuple(), _exponent(mp), mp.sigma)[1]


def _growth(a, alpha, beta, b, k, sigma, gamma) -> tuple[float, float, float]:
    p, t = _cycle_time(a, alpha, beta, b, k, sigma)
    reward = p * rebalance_reward(a, alpha, gamma) + (1.0 - p) * rebalance_reward(b, beta, gamma)
    return p, t, reward / t


def policy_growth_rate(policy: BoundaryPolicy, mp: MarketParams, gamma) -> RenewalSummary:
    """Long-run growth rate and trade frequency of a constant boundary strategy.

    The rate is the stationary expected cycle reward divided by the expected
    cycle length (renewal-reward theorem).
    """
    require_interior_ratio(mp)
    gamma = float(gamma)
    p, t, rate = _growth(*policy.as_tuple(), _exponent(mp), mp.sigma, gamma)
    return RenewalSummary(
        nu_alpha=p, expected_cycle_time=t, growth_rate=rate, trade_frequency=1.0 / t
    )
