"""Black-Scholes market primitives and the two Merton benchmarks.

All functions are pure. Scalar inputs return floats; ``g_flow`` and
``trade_cost`` also broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InvalidParameterError, NoRootError, SingularCaseError

# Merton ratios this close to 1/2 are treated as exactly 1/2.
HALF_TOL = 1e-9

_BRACKET_EPS = 1e-9
_F_TOL = 1e-12
_X_TOL = 1e-14


@dataclass(frozen=True)
class MarketParams:
    """Stock drift ``mu`` (per time unit) and volatility ``sigma`` (per sqrt time unit)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise InvalidParameterError("mu and sigma must be finite")
        if self.sigma <= 0:
            raise InvalidParameterError(f"sigma > 0 required, got sigma={self.sigma}")

    @property
    def merton_ratio(self) -> float:
        return self.mu / self.sigma**2

    @property
    def is_symmetric(self) -> bool:
        """True when the Merton ratio equals 1/2 (up to rounding)."""
        return abs(2.0 * self.merton_ratio - 1.0) < HALF_TOL


@dataclass(frozen=True)
class CostRate:
    """Proportional transaction cost: fraction ``gamma`` of the traded volume."""

    gamma: float = 0.0

    def __post_init__(self):
        check_gamma(self.gamma)

    def __float__(self) -> float:
        return float(self.gamma)


@dataclass(frozen=True)
class CostMertonSolution:
    a: float
    b: float
    growth_rate: float


def check_gamma(gamma) -> float:
    gamma = float(gamma)
    if not (0.0 <= gamma < 1.0):
        raise InvalidParameterError(f"gamma in [0, 1) required, got gamma={gamma}")
    return gamma


def require_interior_ratio(mp: MarketParams) -> float:
    """Return the Merton ratio, raising unless it lies strictly inside (0, 1)."""
    p = mp.merton_ratio
    if not (0.0 < p < 1.0):
        raise InvalidParameterError(
            f"merton_ratio = mu/sigma^2 in (0, 1) required, got {p:.6g}"
        )
    return p


def merton_fraction(mp: MarketParams) -> float:
    return mp.merton_ratio


def merton_growth(mp: MarketParams) -> float:
    """Frictionless optimal growth rate mu^2 / (2 sigma^2).

    Evaluated exactly from the shortest decimal form of the inputs and rounded
    once, so decimal parameters give the correctly rounded decimal result
    (mu = 0.08, sigma = 0.4 gives 0.02, not 0.019999999999999997).
    """
    mu, sigma = Fraction(repr(mp.mu)), Fraction(repr(mp.sigma))
    return float(mu * mu / (2 * sigma * sigma))


def g_flow(x, mp: MarketParams):
    """Instantaneous log-growth x (mu - sigma^2 x / 2) of holding fraction x."""
    return x * (mp.mu - 0.5 * mp.sigma**2 * x)


def trade_cost(x, y, gamma):
    """Log-wealth change from trading the risky fraction from ``x`` to ``y``.

    Arguments broadcast, including ``gamma``.

    Selling (``y < x``) gives ``log((1 - gamma x)/(1 - gamma y))``, buying gives
    ``log((1 + gamma x)/(1 + gamma y))``; both are nonpositive.
    """
    if np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(gamma) == 0:
        gamma = float(gamma)
        if y < x:
            return math.log1p(-gamma * x) - math.log1p(-gamma * y)
        return math.log1p(gamma * x) - math.log1p(gamma * y)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    sell = np.log1p(-gamma * x) - np.log1p(-gamma * y)
    buy = np.log1p(gamma * x) - np.log1p(gamma * y)
    return np.where(y < x, sell, buy)


def rebalance_reward(pi: float, eta: float, gamma) -> float:
    """Log-wealth earned over a cycle that ends at ``pi`` and restarts at ``eta``.

    Between trades the bond account is constant, so the diffusive part
    telescopes to ``log((1 - eta)/(1 - pi))``; the trade cost is added.
    """
    return math.log1p(-eta) - math.log1p(-pi) + trade_cost(pi, eta, gamma)


def _cost_f_bracket(pi_star: float) -> tuple[float, float]:
    return max(0.0, 2.0 * pi_star - 1.0), min(2.0 * pi_star, 1.0)


def cost_f(x: float, pi_star: float, gamma) -> float:
    """Boundary equation whose root above the Merton ratio is the upper no-trade boundary.

    Evaluated in log space so large exponents (Merton ratio near 1/2) do not
    overflow before the product is formed.
    """
    gamma = check_gamma(gamma)
    if not (0.0 < pi_star < 1.0):
        raise DomainError(f"pi_star in (0, 1) required, got {pi_star}")
    if abs(2.0 * pi_star - 1.0) < HALF_TOL:
        raise SingularCaseError("cost_f exponents diverge at merton_ratio = 1/2")
    lo, hi = _cost_f_bracket(pi_star)
    if not (lo < x < hi):
        raise DomainError(f"x must lie in ({lo:.6g}, {hi:.6g}), got {x}")
    k = 2.0 * pi_star - 1.0
    log_first = math.log((2.0 * pi_star - x) / x)
    log_second = math.log((1.0 - 2.0 * pi_star + x) / (1.0 - x))
    exponent = (2.0 * pi_star * log_first + 2.0 * (1.0 - pi_star) * log_second) / k
    return math.exp(exponent) - 1.0 - 2.0 * gamma / (1.0 - gamma)


def merton_with_costs(mp: MarketParams, gamma) -> CostMertonSolution:
    """Optimal no-trade region (a, b) and growth rate under proportional costs."""
    gamma = check_gamma(gamma)
    p = require_interior_ratio(mp)
    if gamma == 0.0:
        return CostMertonSolution(a=p, b=p, growth_rate=merton_growth(mp))
    if abs(2.0 * p - 1.0) < HALF_TOL:
        raise SingularCaseError(
            "merton_ratio = 1/2 with gamma > 0: boundary equation is singular"
        )

    lo = p + _BRACKET_EPS
    hi = _cost_f_bracket(p)[1] - _BRACKET_EPS
    f_lo, f_hi = cost_f(lo, p, gamma), cost_f(hi, p, gamma)
    if f_lo * f_hi > 0:
        raise NoRootError(
            f"cost_f has no sign change on ({lo:.6g}, {hi:.6g}): f={f_lo:.3g}, {f_hi:.3g}"
        )
    b = brentq(cost_f, lo, hi, args=(p, gamma), xtol=_X_TOL, rtol=4 * np.finfo(float).eps)
    residual = abs(cost_f(b, p, gamma))
    if residual >= _F_TOL:
        raise NoRootError(f"root refinement stalled with |f(b)| = {residual:.3g}")

    kappa = 2.0 * gamma / (1.0 - gamma)
    a = (2.0 * p - b) / (1.0 + kappa * (1.0 - 2.0 * p + b))
    growth = b * mp.sigma**2 * (p - 0.5 * b)
    return CostMertonSolution(a=a, b=b, growth_rate=growth)
