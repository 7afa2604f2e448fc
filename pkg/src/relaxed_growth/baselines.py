"""Discrete-trading reference investors.

The h-investor rebalances to a fixed fraction every ``h`` time units; its
growth rate is ``A(h)/h`` with ``A(h) = max_a E log(a Z + 1 - a)`` and ``Z``
the lognormal one-period stock return. The lambda-investor trades at Poisson
times; only its large-intensity approximation is available here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.hermite import hermgauss

from .errors import InvalidParameterError
from .market import MarketParams, merton_growth

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class BaselineResult:
    h_or_lambda: float
    growth_rate: float
    optimal_fraction: Optional[float]
    method: str  # "quadrature" | "taylor" | "formula"


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise InvalidParameterError(f"{name} > 0 required, got {name}={value}")
    return value


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[lo, hi]``; returns ``(argmax, max)``.

    Endpoints are compared at the end so boundary maxima are returned exactly.
    """
    x1 = hi - _INV_PHI * (hi - lo)
    x2 = lo + _INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    a, b = lo, hi
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
    best = (x1, f1) if f1 >= f2 else (x2, f2)
    for x in (lo, hi):
        fx = f(x)
        if fx > best[1]:
            best = (x, fx)
    return best


def period_return_moment(k: int, mp: MarketParams, h: float) -> float:
    """E[Z^k] for the one-period gross return Z = exp(sigma W_h + (mu - sigma^2/2) h)."""
    if k < 0:
        raise InvalidParameterError(f"k >= 0 required, got {k}")
    h = _check_positive("h", h)
    return math.exp(k * (mp.mu - 0.5 * mp.sigma**2) * h + 0.5 * k * k * mp.sigma**2 * h)


def _return_nodes(mp: MarketParams, h: float, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = hermgauss(nodes)
    z = np.exp(mp.sigma * math.sqrt(2.0 * h) * x + (mp.mu - 0.5 * mp.sigma**2) * h)
    return z, w / math.sqrt(math.pi)


def a_of_h(mp: MarketParams, h: float, nodes: int = 128, tol: float = 1e-10) -> tuple[float, float]:
    """Return ``(A(h), a*)`` by Gauss-Hermite quadrature and golden-section search."""
    h = _check_positive("h", h)
    if nodes < 64:
        raise InvalidParameterError("at least 64 quadrature nodes required")
    z, w = _return_nodes(mp, h, nodes)

    def expected_log(a: float) -> float:
        return float(np.dot(w, np.log1p(a * (z - 1.0))))

    a_star, value = golden_section_max(expected_log, 0.0, 1.0, tol)
    return value, a_star


def a_of_h_taylor(mp: MarketParams, h: float, order: int = 8, tol: float = 1e-10) -> tuple[float, float]:
    """``A(h)`` from the truncated series of ``log(1 + Y)`` with ``Y = a (Z - 1)``."""
    if order < 2:
        raise InvalidParameterError("order >= 2 required (order 1 has no interior maximum)")
    h = _check_positive("h", h)
    moments = [period_return_moment(j, mp, h) for j in range(order + 1)]
    # E[(Z - 1)^k] by binomial expansion of the raw moments
    centered = [
        sum(math.comb(k, j) * (-1) ** (k - j) * moments[j] for j in range(k + 1))
        for k in range(order + 1)
    ]

    def series(a: float) -> float:
        return sum((-1) ** (k + 1) * a**k * centered[k] / k for k in range(1, order + 1))

    a_star, value = golden_section_max(series, 0.0, 1.0, tol)
    return value, a_star


def h_investor_growth(mp: MarketParams, h: float, nodes: int = 128) -> BaselineResult:
    A, a_star = a_of_h(mp, h, nodes)
    return BaselineResult(h_or_lambda=float(h), growth_rate=A / h, optimal_fraction=a_star, method="quadrature")


def lambda_investor_growth(mp: MarketParams, lam: float) -> BaselineResult:
    """Large-intensity approximation of the Poisson-trading investor's growth rate.

    Not exact for small intensities; the result is labeled ``method="formula"``.
    """
    lam = _check_positive("lambda", lam)
    p = mp.merton_ratio
    loss = 0.5 * mp.mu**2 * (1.0 - p) ** 2
    return BaselineResult(
        h_or_lambda=lam,
        growth_rate=merton_growth(mp) - loss / lam,
        optimal_fraction=None,
        method="formula",
    )
