"""Optimal constant boundary strategies under a trade-frequency budget.

``solve_relaxed`` maximizes the renewal growth rate over policies whose
expected time between trades equals ``h``. For fixed ``(a, alpha, beta)``
the expected cycle time increases with ``b`` from 0 at ``b = beta``, so the
constraint is removed by a bracketed root search for ``b`` and the
remaining three levels are searched with Nelder-Mead in log-odds
coordinates from a fixed set of starts.

When the Merton ratio is 1/2 and trading is free, ``symmetric_solution``
gives the optimum in closed form and ``verify_explicit`` checks it against
the optimality conditions of the verification theorem.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize
from scipy.special import expit, logit

from .errors import (
    InfeasibleBudgetError,
    InvalidParameterError,
    NoRootError,
    SingularCaseError,
)
from .market import (
    MarketParams,
    check_gamma,
    g_flow,
    merton_with_costs,
    require_interior_ratio,
    trade_cost,
)
from .renewal import (
    BoundaryPolicy,
    RenewalSummary,
    _cycle_time,
    _exponent,
    _growth,
    expected_cycle_time,
    policy_growth_rate,
)

BOX_EPS = 1e-4
FREQ_TOL = 1e-8

_Z_MIN = float(logit(BOX_EPS))
_Z_MAX = float(logit(1.0 - BOX_EPS))
_PENALTY = 1.0
_RTOL = 4 * np.finfo(float).eps

# Start offsets (a, alpha, beta) relative to logit(pi*), in units of the
# lower / upper half-widths; alpha and beta are unordered (see _unpack).
_START_PATTERNS = (
    (-1.0, -0.05, 0.05),
    (-1.0, 0.0, 0.0),
    (-1.3, -0.8, 0.8),
    (-0.8, -0.3, 0.5),
    (-1.6, -0.4, 0.2),
    (-0.7, -0.1, 0.3),
    (-1.1, -0.6, 0.6),
    (-2.0, -0.2, 0.4),
)


@dataclass(frozen=True)
class RelaxedSolution:
    policy: BoundaryPolicy
    h: float
    growth_rate: float
    summary: RenewalSummary
    converged: bool
    residual_frequency: float
    # Only known in the explicit symmetric case, where V^o(h) = lam + c / h.
    lam: Optional[float] = None
    c: Optional[float] = None


@dataclass(frozen=True)
class VerificationReport:
    max_ode_residual: float
    smooth_fit_residuals: tuple[float, float]
    intervention_inequality_margin: float
    frequency_residual: float
    generator_margin: float


def _check_h(h: float) -> float:
    h = float(h)
    if not (math.isfinite(h) and h > 0.0):
        raise InvalidParameterError(f"h > 0 required, got h={h}")
    return h


def efficiency(v: float, v_ref: float) -> float:
    if not v_ref > 0.0:
        raise InvalidParameterError(f"reference rate must be positive, got {v_ref}")
    return v / v_ref


# --------------------------------------------------------------------------
# Closed-form symmetric case

def _require_symmetric(mp: MarketParams, gamma) -> None:
    if not mp.is_symmetric:
        raise InvalidParameterError(
            f"explicit solution needs merton_ratio = 1/2, got {mp.merton_ratio:.6g}"
        )
    if float(gamma) != 0.0:
        raise InvalidParameterError("explicit solution needs gamma = 0")


def _symmetric_lambda(b: float, sigma: float) -> float:
    return sigma**2 * (b - 0.5) / (2.0 * math.log(b / (1.0 - b)))


def _value_slope(y, lam: float, sigma: float):
    """Derivative of the relative value function in the symmetric case."""
    y = np.asarray(y, dtype=float)
    out = (2.0 * lam / sigma**2 * np.log(y / (1.0 - y)) + 0.5 - y) / (y * (1.0 - y))
    return float(out) if out.ndim == 0 else out


def _relative_value(x: float, lam: float, sigma: float) -> float:
    """v(x) = integral of the slope from 1/2 to x."""
    val, _ = quad(_value_slope, 0.5, x, args=(lam, sigma), epsabs=1e-15, epsrel=1e-13, limit=200)
    return val


def symmetric_solution(mp: MarketParams, h: float, gamma=0.0) -> RelaxedSolution:
    """Optimal policy ``(1 - b_h, 1/2, 1/2, b_h)`` with ``logit(b_h) = sigma sqrt(h)``."""
    _require_symmetric(mp, gamma)
    h = _check_h(h)
    s = mp.sigma * math.sqrt(h)
    b = float(expit(s))
    a = float(expit(-s))
    # log(1/2) - log(e^{s/2} / (1 + e^s))
    growth = (math.log(0.5) - 0.5 * s + np.logaddexp(0.0, s)) / h
    policy = BoundaryPolicy(a, 0.5, 0.5, b)
    summary = policy_growth_rate(policy, mp, 0.0)
    lam = _symmetric_lambda(b, mp.sigma)
    c = -_relative_value(b, lam, mp.sigma)
    return RelaxedSolution(
        policy=policy,
        h=h,
        growth_rate=float(growth),
        summary=summary,
        converged=True,
        residual_frequency=abs(summary.expected_cycle_time - h),
        lam=lam,
        c=c,
    )


def verify_explicit(mp: MarketParams, h: float, grid_size: int = 2001) -> VerificationReport:
    """Evaluate the verification-theorem conditions at the explicit solution.

    Outside ``[a, b]`` the value function is extended by immediate
    intervention, ``v(x) = v(1/2) - c``, which is how the inequality
    conditions are read on the whole unit interval.
    """
    _require_symmetric(mp, 0.0)
    if grid_size < 3:
        raise InvalidParameterError("grid_size >= 3 required")
    sol = symmetric_solution(mp, h)
    a, alpha, beta, b = sol.policy.as_tuple()
    lam, c, sigma = sol.lam, sol.c, mp.sigma

    # (v) generator equation inside the no-trade region
    x = np.linspace(a, b, grid_size)
    step = 1e-6
    v1 = _value_slope(x, lam, sigma)
    v2 = (_value_slope(x + step, lam, sigma) - _value_slope(x - step, lam, sigma)) / (2 * step)
    drift = x * (1 - x) * (mp.mu - sigma**2 * x)
    vol = sigma * x * (1 - x)
    ode = drift * v1 + 0.5 * vol**2 * v2 + g_flow(x, mp) - lam
    max_ode = float(np.max(np.abs(ode)))

    v_a = _relative_value(a, lam, sigma)
    v_b = -c
    fit_low = _relative_value(alpha, lam, sigma) - v_a + trade_cost(a, alpha, 0.0) - c
    fit_high = _relative_value(beta, lam, sigma) - v_b + trade_cost(b, beta, 0.0) - c

    # (ii) intervention inequality over pairs
    m = min(grid_size, 401)
    pts = np.unique(np.concatenate([
        np.linspace(BOX_EPS, 1 - BOX_EPS, m),
        np.linspace(a, b, m),
        [a, 0.5, b],
    ]))
    inside = (pts >= a) & (pts <= b)
    v = np.full(pts.shape, v_b)
    v[inside] = [_relative_value(p, lam, sigma) for p in pts[inside]]
    lhs = v[None, :] - v[:, None] + trade_cost(pts[:, None], pts[None, :], 0.0) - c
    margin = -float(np.max(lhs))

    # (iii) on the whole interval: the extension is flat, so Lv = 0 outside
    outside = pts[~inside]
    gen = float(np.max(g_flow(outside, mp) - lam)) if outside.size else -np.inf
    gen_margin = -max(gen, float(np.max(ode)))

    return VerificationReport(
        max_ode_residual=max_ode,
        smooth_fit_residuals=(abs(fit_low), abs(fit_high)),
        intervention_inequality_margin=margin,
        frequency_residual=abs(expected_cycle_time(sol.policy, mp) - sol.h),
        generator_margin=gen_margin,
    )


# --------------------------------------------------------------------------
# General constrained optimization

def _unpack(z) -> tuple[float, float, float]:
    za, z1, z2 = float(z[0]), float(z[1]), float(z[2])
    return za, min(z1, z2), max(z1, z2)


def _solve_upper(za, zal, zbe, k, sigma, h) -> Optional[float]:
    """Logit of the upper trigger giving expected cycle time ``h``; None if unattainable."""
    a, al, be = expit(za), expit(zal), expit(zbe)

    def excess(zb):
        return _cycle_time(a, al, be, float(expit(zb)), k, sigma)[1] - h

    if excess(_Z_MAX) < 0.0:
        return None
    try:
        return brentq(excess, zbe, _Z_MAX, xtol=1e-14, rtol=_RTOL, maxiter=200)
    except ValueError:
        return None


def _evaluate(z, k, sigma, gamma, h):
    """Growth rate and full policy for search point ``z``; None if infeasible."""
    za, zal, zbe = _unpack(z)
    if not (_Z_MIN <= za < zal) or zbe >= _Z_MAX:
        return None
    zb = _solve_upper(za, zal, zbe, k, sigma, h)
    if zb is None or zb <= zbe:
        return None
    levels = (float(expit(za)), float(expit(zal)), float(expit(zbe)), float(expit(zb)))
    if not (levels[0] < levels[1] <= levels[2] < levels[3]):
        return None
    _, _, rate = _growth(*levels, k, sigma, gamma)
    return rate, levels


def _objective(z, k, sigma, gamma, h):
    out = _evaluate(z, k, sigma, gamma, h)
    if out is None:
        za, zal, _ = _unpack(z)
        return _PENALTY + max(0.0, za - zal) + max(0.0, _Z_MIN - za)
    return -out[0]


def _run_start(args):
    z0, scale, k, sigma, gamma, h, xatol, fatol, maxiter = args
    simplex = np.vstack([z0, z0 + np.diag(np.full(3, scale))])
    res = minimize(
        _objective,
        z0,
        args=(k, sigma, gamma, h),
        method="Nelder-Mead",
        options=dict(initial_simplex=simplex, xatol=xatol, fatol=fatol, maxiter=maxiter, maxfev=4 * maxiter),
    )
    out = _evaluate(res.x, k, sigma, gamma, h)
    if out is None:
        return None
    rate, levels = out
    return rate, levels, bool(res.success)


def _half_widths(mp: MarketParams, gamma: float, h: float) -> tuple[float, float]:
    w = mp.sigma * math.sqrt(h)
    lo = hi = w
    if gamma > 0.0:
        try:
            sol = merton_with_costs(mp, gamma)
        except (SingularCaseError, NoRootError):
            return lo, hi
        center = float(logit(mp.merton_ratio))
        lo = max(lo, center - float(logit(sol.a)))
        hi = max(hi, float(logit(sol.b)) - center)
    return lo, hi


def default_starts(mp: MarketParams, gamma: float, h: float, n: int = 8) -> list[tuple[float, float, float]]:
    """Deterministic starting levels ``(a, alpha, beta)`` seeded around the Merton ratio."""
    center = float(logit(mp.merton_ratio))
    lo, hi = _half_widths(mp, gamma, h)
    starts = []
    for i in range(n):
        da, dal, dbe = _START_PATTERNS[i % len(_START_PATTERNS)]
        stretch = 1.0 + 0.25 * (i // len(_START_PATTERNS))
        za = max(center + stretch * da * lo, _Z_MIN + 1e-3)
        z1 = center + stretch * dal * lo
        z2 = center + stretch * dbe * hi
        starts.append(tuple(float(expit(v)) for v in (za, z1, z2)))
    return starts


def solve_relaxed(
    mp: MarketParams,
    gamma,
    h: float,
    *,
    n_starts: int = 8,
    extra_starts: Sequence[tuple[float, float, float]] = (),
    xatol: float = 1e-10,
    fatol: float = 1e-15,
    maxiter: int = 6000,
    workers: int = 1,
) -> RelaxedSolution:
    """Growth-optimal constant boundary policy with mean inter-trade time ``h``.

    Parameters
    ----------
    mp, gamma, h
        Market, proportional cost and trade budget (one trade per ``h`` time
        units on average).
    n_starts
        Number of deterministic Nelder-Mead starts (at least 8).
    extra_starts
        Additional ``(a, alpha, beta)`` starts, e.g. the optimum at a nearby
        ``h`` when tracing a curve.
    workers
        Run starts in a process pool; the result does not depend on it.

    Returns
    -------
    RelaxedSolution
        ``converged`` is False if no start met the optimizer tolerances and
        the frequency tolerance; the best feasible policy is still returned.

    Raises
    ------
    InfeasibleBudgetError
        If no start admits a policy with expected cycle time ``h``.
    """
    gamma = check_gamma(gamma)
    require_interior_ratio(mp)
    h = _check_h(h)
    if n_starts < 8:
        raise InvalidParameterError("n_starts >= 8 required")

    k = _exponent(mp)
    starts = default_starts(mp, gamma, h, n_starts) + [tuple(s) for s in extra_starts]
    scale = 0.15 * max(mp.sigma * math.sqrt(h), 0.02)
    jobs = [
        (np.asarray(logit(np.clip(s, BOX_EPS, 1 - BOX_EPS)), dtype=float), scale, k, mp.sigma, gamma, h, xatol, fatol, maxiter)
        for s in starts
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_start, jobs))
    else:
        results = [_run_start(j) for j in jobs]

    feasible = [r for r in results if r is not None]
    if not feasible:
        raise InfeasibleBudgetError(
            f"no boundary policy reaches expected cycle time h={h} "
            f"(merton_ratio={mp.merton_ratio:.6g})"
        )
    feasible.sort(key=lambda r: (-r[0], r[1]))

    def accepted(r):
        policy = BoundaryPolicy(*r[1])
        t = expected_cycle_time(policy, mp)
        return r[2] and abs(t - h) <= FREQ_TOL * h

    best = feasible[0]
    converged = any(accepted(r) and r[0] >= best[0] - 1e-12 for r in feasible)
    policy = BoundaryPolicy(*best[1])
    summary = policy_growth_rate(policy, mp, gamma)

    lam = c = None
    if mp.is_symmetric and gamma == 0.0:
        lam = _symmetric_lambda(policy.b, mp.sigma)
        c = -_relative_value(policy.b, lam, mp.sigma)
    return RelaxedSolution(
        policy=policy,
        h=h,
        growth_rate=summary.growth_rate,
        summary=summary,
        converged=converged,
        residual_frequency=abs(summary.expected_cycle_time - h),
        lam=lam,
        c=c,
    )
