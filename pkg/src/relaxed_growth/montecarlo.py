"""Monte Carlo simulation of the impulse-controlled risky fraction.

Between trades the log-odds ``Y = log(pi / (1 - pi))`` of the risky fraction
is an arithmetic Brownian motion with drift ``mu - sigma^2/2`` and
volatility ``sigma``, so it is stepped exactly. Only barrier detection is
discretized: a step exits when its endpoint lies beyond a trigger or, with
the bridge correction, when a uniform draw falls below the Brownian-bridge
probability of having touched a trigger during the step. An exit places the
fraction at the trigger and is dated at the end of the step.

Log-wealth follows the growth representation: ``g(pi) dt + pi sigma dW`` on
ordinary steps, the exact bond-constant identity
``log((1 - pi_i)/(1 - boundary))`` on the exit step, and the trade cost at
each impulse.

Every path draws from its own Philox stream keyed by ``(seed, path index)``,
so results do not depend on chunking or worker count. Per step a path draws
one standard normal, followed by one uniform when the bridge is on; a policy
path draws one uniform before its first step to pick its restart level.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .errors import InvalidParameterError
from .market import MarketParams, check_gamma
from .renewal import BoundaryPolicy, invariant_distribution

# Fraction of paths allowed to hit the horizon before an exit result is flagged.
EXHAUSTION_LIMIT = 0.01


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    horizon: float = 100.0
    paths: int = 1000
    seed: int = 0
    bridge_correction: bool = True
    workers: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidParameterError(f"dt > 0 required, got dt={self.dt}")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise InvalidParameterError(f"horizon > 0 required, got horizon={self.horizon}")
        if self.paths < 1:
            raise InvalidParameterError(f"paths >= 1 required, got paths={self.paths}")
        if not (0 <= self.seed < 2**64):
            raise InvalidParameterError("seed must be a 64-bit unsigned integer")
        if self.workers < 1:
            raise InvalidParameterError("workers >= 1 required")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.dt))


@dataclass(frozen=True)
class SimResult:
    paths_used: int
    growth_rate_mean: Optional[float] = None
    growth_rate_se: Optional[float] = None
    trade_frequency_mean: Optional[float] = None
    trade_frequency_se: Optional[float] = None
    exit_time_mean: Optional[float] = None
    exit_time_se: Optional[float] = None
    upper_exit_fraction: Optional[float] = None
    upper_exit_se: Optional[float] = None
    exhausted_paths: int = 0
    flagged: bool = False


def path_generator(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for path ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _logistic(y):
    return 1.0 / (1.0 + np.exp(-y))


def step_fraction(pi, dt: float, normal_draw, mp: MarketParams):
    """Advance the uncontrolled fraction by ``dt`` given a standard normal draw."""
    pi = np.asarray(pi, dtype=float)
    y = np.log(pi) - np.log1p(-pi)
    y = y + (mp.mu - 0.5 * mp.sigma**2) * dt + mp.sigma * math.sqrt(dt) * np.asarray(normal_draw)
    out = _logistic(y)
    return float(out) if out.ndim == 0 else out


@numba.njit(cache=True)
def _exit_kernel(rng, y0, ya, yb, drift, vol, dt, max_steps, bridge):
    """Return (exit time, +1 upper / -1 lower / 0 none)."""
    if y0 <= ya:
        return 0.0, -1
    if y0 >= yb:
        return 0.0, 1
    sq = math.sqrt(dt)
    two_over_var = 2.0 / (vol * vol * dt)
    y = y0
    for i in range(max_steps):
        y_new = y + drift * dt + vol * sq * rng.standard_normal()
        side = 0
        if y_new >= yb:
            side = 1
        elif y_new <= ya:
            side = -1
        if bridge:
            u = rng.random()
            if side == 0:
                p_up = math.exp(-two_over_var * (yb - y) * (yb - y_new))
                p_dn = math.exp(-two_over_var * (y - ya) * (y_new - ya))
                if u < p_up:
                    side = 1
                elif u < p_up + p_dn:
                    side = -1
        if side != 0:
            return (i + 1) * dt, side
        y = y_new
    return max_steps * dt, 0


@numba.njit(cache=True)
def _policy_kernel(rng, ya, yal, ybe, yb, a, alpha, beta, b, nu_alpha, mu, sigma, gamma, dt, n_steps, bridge):
    """Return (log-wealth, trades, time of the last trade)."""
    if rng.random() < nu_alpha:
        y = yal
    else:
        y = ybe
    drift = mu - 0.5 * sigma * sigma
    sq = math.sqrt(dt)
    two_over_var = 2.0 / (sigma * sigma * dt)
    log_wealth = 0.0
    trades = 0
    last = 0
    for i in range(n_steps):
        z = rng.standard_normal()
        y_new = y + drift * dt + sigma * sq * z
        side = 0
        if y_new >= yb:
            side = 1
        elif y_new <= ya:
            side = -1
        if bridge:
            u = rng.random()
            if side == 0:
                p_up = math.exp(-two_over_var * (yb - y) * (yb - y_new))
                p_dn = math.exp(-two_over_var * (y - ya) * (y_new - ya))
                if u < p_up:
                    side = 1
                elif u < p_up + p_dn:
                    side = -1
        pi = 1.0 / (1.0 + math.exp(-y))
        if side == 0:
            log_wealth += pi * (mu - 0.5 * sigma * sigma * pi) * dt + pi * sigma * sq * z
            y = y_new
            continue
        if side == 1:
            edge, target, y = b, beta, ybe
            cost = math.log1p(-gamma * edge) - math.log1p(-gamma * target)
        else:
            edge, target, y = a, alpha, yal
            cost = math.log1p(gamma * edge) - math.log1p(gamma * target)
        log_wealth += math.log1p(-pi) - math.log1p(-edge) + cost
        trades += 1
        last = i + 1
    return log_wealth, trades, last * dt


def _logit(x: float) -> float:
    return math.log(x) - math.log1p(-x)


def _exit_chunk(args):
    seed, start, stop, y0, ya, yb, drift, vol, dt, max_steps, bridge = args
    times = np.empty(stop - start)
    sides = np.empty(stop - start, dtype=np.int64)
    for j, i in enumerate(range(start, stop)):
        times[j], sides[j] = _exit_kernel(path_generator(seed, i), y0, ya, yb, drift, vol, dt, max_steps, bridge)
    return times, sides


def _policy_chunk(args):
    seed, start, stop, params = args
    out = np.empty((stop - start, 3))
    for j, i in enumerate(range(start, stop)):
        out[j] = _policy_kernel(path_generator(seed, i), *params)
    return out


def _chunks(n: int, workers: int) -> list[tuple[int, int]]:
    size = max(1, -(-n // (4 * workers)))
    return [(s, min(s + size, n)) for s in range(0, n, size)]


def _map(fn, jobs, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size < 2:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def simulate_exit_paths(pi0: float, a: float, b: float, mp: MarketParams, cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-path exit times and sides (+1 upper, -1 lower, 0 horizon reached)."""
    if not (0.0 < a < b < 1.0):
        raise InvalidParameterError(f"0 < a < b < 1 required, got a={a}, b={b}")
    if not (a <= pi0 <= b):
        raise InvalidParameterError(f"pi0 must lie in [a, b], got {pi0}")
    drift = mp.mu - 0.5 * mp.sigma**2
    y0 = _logit(pi0)
    ya, yb = _logit(a), _logit(b)
    # keep exact boundary starts on the boundary despite rounding in logit
    if pi0 == a:
        y0 = ya
    elif pi0 == b:
        y0 = yb
    jobs = [
        (cfg.seed, s, e, y0, ya, yb, drift, mp.sigma, cfg.dt, cfg.n_steps, cfg.bridge_correction)
        for s, e in _chunks(cfg.paths, cfg.workers)
    ]
    parts = _map(_exit_chunk, jobs, cfg.workers)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def simulate_exit(pi0: float, a: float, b: float, mp: MarketParams, cfg: SimConfig) -> SimResult:
    """Estimate the mean exit time of ``(a, b)`` and the upper-exit probability from ``pi0``."""
    times, sides = simulate_exit_paths(pi0, a, b, mp, cfg)
    exhausted = int(np.count_nonzero(sides == 0))
    t_mean, t_se = _mean_se(times)
    up_mean, up_se = _mean_se((sides == 1).astype(float))
    return SimResult(
        paths_used=cfg.paths,
        exit_time_mean=t_mean,
        exit_time_se=t_se,
        upper_exit_fraction=up_mean,
        upper_exit_se=up_se,
        exhausted_paths=exhausted,
        flagged=exhausted > EXHAUSTION_LIMIT * cfg.paths,
    )


def simulate_policy_paths(policy: BoundaryPolicy, mp: MarketParams, gamma, cfg: SimConfig) -> np.ndarray:
    """Per-path ``[log_wealth, trades, last_trade_time]`` rows.

    Paths start at a restart level, so ``last_trade_time / trades`` averages
    complete cycles only.
    """
    gamma = check_gamma(gamma)
    a, alpha, beta, b = policy.as_tuple()
    nu = invariant_distribution(policy, mp)
    params = (
        _logit(a), _logit(alpha), _logit(beta), _logit(b),
        a, alpha, beta, b, nu, mp.mu, mp.sigma, gamma,
        cfg.dt, cfg.n_steps, cfg.bridge_correction,
    )
    jobs = [(cfg.seed, s, e, params) for s, e in _chunks(cfg.paths, cfg.workers)]
    return np.vstack(_map(_policy_chunk, jobs, cfg.workers))


def simulate_policy(policy: BoundaryPolicy, mp: MarketParams, gamma, cfg: SimConfig) -> SimResult:
    """Estimate growth rate, trade frequency and mean cycle length of a policy."""
    rows = simulate_policy_paths(policy, mp, gamma, cfg)
    horizon = cfg.n_steps * cfg.dt
    g_mean, g_se = _mean_se(rows[:, 0] / horizon)
    f_mean, f_se = _mean_se(rows[:, 1] / horizon)
    has_cycle = rows[:, 1] > 0
    if np.any(has_cycle):
        t_mean, t_se = _mean_se(rows[has_cycle, 2] / rows[has_cycle, 1])
    else:
        t_mean, t_se = None, None
    return SimResult(
        paths_used=cfg.paths,
        growth_rate_mean=g_mean,
        growth_rate_se=g_se,
        trade_frequency_mean=f_mean,
        trade_frequency_se=f_se,
        exit_time_mean=t_mean,
        exit_time_se=t_se,
    )
