"""Command-line front end.

Subcommands: ``merton``, ``solve``, ``curve``, ``simulate``, ``baselines``.
``--config FILE`` supplies defaults as ``key = value`` lines or one JSON
object (so ``solve`` output can be fed to ``simulate``); flags override it.

Exit codes: 0 success, 2 invalid input, 3 solver did not converge,
4 simulation horizon exhausted on too many paths.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from .baselines import h_investor_growth, lambda_investor_growth
from .errors import InfeasibleBudgetError, InvalidParameterError, NoRootError, SingularCaseError
from .market import MarketParams, check_gamma, merton_fraction, merton_growth, merton_with_costs
from .montecarlo import SimConfig, simulate_exit, simulate_policy
from .optimizer import efficiency, solve_relaxed
from .renewal import BoundaryPolicy, exit_probability_upper, expected_exit_time, policy_growth_rate
from .reports import DEFAULT_H_MAX, DEFAULT_H_MIN, DEFAULT_POINTS, efficiency_curve, h_grid, rows_to_csv, rows_to_svg

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_EXHAUSTED = 0, 2, 3, 4

# Output-only keys tolerated in config files (e.g. a saved ``solve`` report).
REPORT_KEYS = frozenset({
    "growth_rate", "expected_cycle_time", "trade_frequency", "converged",
    "merton_ratio", "merton_growth", "residual_frequency",
})


class UsageError(Exception):
    pass


def load_config(path: str) -> dict[str, str]:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise UsageError("JSON config must be an object")
        return {str(k): v for k, v in data.items()}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def _parse_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {value!r}")


def _apply_config(sub: argparse.ArgumentParser, config: dict) -> None:
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in config.items():
        dest = key.replace("-", "_")
        if dest in REPORT_KEYS:
            continue
        action = actions.get(dest)
        if action is None or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for this command")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = _parse_bool(value)
        elif value is None:
            defaults[dest] = None
        else:
            defaults[dest] = action.type(value) if action.type else value
    sub.set_defaults(**defaults)


def _add_market(p: argparse.ArgumentParser, gamma_default: Optional[float] = 0.0) -> None:
    p.add_argument("--mu", type=float, help="stock drift per time unit")
    p.add_argument("--sigma", type=float, help="stock volatility per sqrt time unit")
    p.add_argument("--gamma", type=float, default=gamma_default, help="proportional cost fraction")
    p.add_argument("--config", help="key = value file (or JSON object) of defaults")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="relaxed-growth",
        description="Growth-optimal constant boundary strategies with a trade-frequency budget.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    table = {}

    p = subs.add_parser("merton", help="frictionless and cost-Merton benchmarks")
    _add_market(p, gamma_default=None)
    p.add_argument("--format", choices=("json", "table"), default="json")
    table["merton"] = p

    p = subs.add_parser("solve", help="optimal policy for a budget h")
    _add_market(p)
    p.add_argument("--h", type=float, help="average time between trades")
    p.add_argument("--starts", type=int, default=8, help="Nelder-Mead starts (>= 8)")
    p.add_argument("--format", choices=("json", "table"), default="json")
    table["solve"] = p

    p = subs.add_parser("curve", help="efficiency curve as CSV")
    _add_market(p)
    p.add_argument("--h-min", type=float, default=DEFAULT_H_MIN)
    p.add_argument("--h-max", type=float, default=DEFAULT_H_MAX)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--output", help="CSV path (default stdout)")
    p.add_argument("--svg", help="also write an SVG plot to this path")
    table["curve"] = p

    p = subs.add_parser("simulate", help="Monte Carlo check against analytic values")
    _add_market(p)
    p.add_argument("--mode", choices=("policy", "exit"), default="policy")
    p.add_argument("--h", type=float, help="solve for the optimal policy at this budget")
    for name in ("a", "alpha", "beta", "b"):
        p.add_argument(f"--{name}", type=float, help=f"policy level {name}")
    p.add_argument("--pi0", type=float, help="start fraction in exit mode (default midpoint)")
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-bridge", dest="no_bridge", action="store_true", help="disable bridge correction")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("json", "table"), default="json")
    table["simulate"] = p

    p = subs.add_parser("baselines", help="h- and lambda-investor growth rates")
    _add_market(p)
    p.add_argument("--h", type=float, help="rebalancing interval (lambda = 1/h)")
    p.add_argument("--format", choices=("json", "table"), default="json")
    table["baselines"] = p
    return parser, table


def _require(args, *names) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required parameter(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _market(args) -> MarketParams:
    _require(args, "mu", "sigma")
    return MarketParams(args.mu, args.sigma)


def _positive_h(args) -> float:
    _require(args, "h")
    if not (math.isfinite(args.h) and args.h > 0):
        raise InvalidParameterError(f"h > 0 required, got h={args.h}")
    return args.h


def _emit(report: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2))
        return
    width = max(len(k) for k in report)
    for key, value in report.items():
        print(f"{key:<{width}}  {value}")


def cmd_merton(args) -> int:
    mp = _market(args)
    report = {
        "mu": mp.mu,
        "sigma": mp.sigma,
        "merton_ratio": merton_fraction(mp),
        "merton_growth": merton_growth(mp),
    }
    if args.gamma is not None:
        sol = merton_with_costs(mp, args.gamma)
        report.update(gamma=args.gamma, a=sol.a, b=sol.b, cost_growth_rate=sol.growth_rate)
    _emit(report, args.format)
    return EXIT_OK


def _solution_report(mp: MarketParams, gamma: float, sol) -> dict:
    p = sol.policy
    return {
        "mu": mp.mu,
        "sigma": mp.sigma,
        "gamma": gamma,
        "h": sol.h,
        "a": p.a,
        "alpha": p.alpha,
        "beta": p.beta,
        "b": p.b,
        "growth_rate": sol.growth_rate,
        "expected_cycle_time": sol.summary.expected_cycle_time,
        "trade_frequency": sol.summary.trade_frequency,
        "converged": sol.converged,
    }


def cmd_solve(args) -> int:
    mp = _market(args)
    gamma = check_gamma(args.gamma)
    h = _positive_h(args)
    sol = solve_relaxed(mp, gamma, h, n_starts=args.starts)
    _emit(_solution_report(mp, gamma, sol), args.format)
    return EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def cmd_curve(args) -> int:
    mp = _market(args)
    gamma = check_gamma(args.gamma)
    hs = h_grid(args.h_min, args.h_max, args.points)
    rows = efficiency_curve(mp, gamma, hs)
    text = rows_to_csv(rows)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(rows_to_svg(rows), encoding="utf-8")
    return EXIT_OK


def _z(estimate: float, se: float, target: float) -> Optional[float]:
    return (estimate - target) / se if se > 0 else None


def _policy_from_args(args, mp: MarketParams, gamma: float) -> BoundaryPolicy:
    levels = [getattr(args, n) for n in ("a", "alpha", "beta", "b")]
    if all(v is not None for v in levels):
        return BoundaryPolicy(*levels)
    if args.h is None:
        raise UsageError("simulate needs either --a --alpha --beta --b or --h")
    return solve_relaxed(mp, gamma, _positive_h(args)).policy


def cmd_simulate(args) -> int:
    mp = _market(args)
    gamma = check_gamma(args.gamma)
    cfg = SimConfig(
        dt=args.dt, horizon=args.horizon, paths=args.paths, seed=args.seed,
        bridge_correction=not args.no_bridge, workers=args.workers,
    )
    report = {"mode": args.mode, "mu": mp.mu, "sigma": mp.sigma, "gamma": gamma,
              "paths": cfg.paths, "dt": cfg.dt, "horizon": cfg.horizon, "seed": cfg.seed,
              "bridge_correction": cfg.bridge_correction}
    if args.mode == "exit":
        if args.a is not None and args.b is not None:
            a, b = args.a, args.b
        else:
            policy = _policy_from_args(args, mp, gamma)
            a, b = policy.a, policy.b
        pi0 = args.pi0 if args.pi0 is not None else 0.5 * (a + b)
        res = simulate_exit(pi0, a, b, mp, cfg)
        t_exact = expected_exit_time(pi0, a, b, mp)
        p_exact = exit_probability_upper(pi0, a, b, mp)
        report.update(
            a=a, b=b, pi0=pi0,
            exit_time_mean=res.exit_time_mean, exit_time_se=res.exit_time_se,
            exit_time_analytic=t_exact, exit_time_z=_z(res.exit_time_mean, res.exit_time_se, t_exact),
            upper_exit_fraction=res.upper_exit_fraction, upper_exit_se=res.upper_exit_se,
            upper_exit_analytic=p_exact, upper_exit_z=_z(res.upper_exit_fraction, res.upper_exit_se, p_exact),
            exhausted_paths=res.exhausted_paths, flagged=res.flagged,
        )
        _emit(report, args.format)
        return EXIT_EXHAUSTED if res.flagged else EXIT_OK

    policy = _policy_from_args(args, mp, gamma)
    res = simulate_policy(policy, mp, gamma, cfg)
    exact = policy_growth_rate(policy, mp, gamma)
    report.update(
        a=policy.a, alpha=policy.alpha, beta=policy.beta, b=policy.b,
        growth_rate_mean=res.growth_rate_mean, growth_rate_se=res.growth_rate_se,
        growth_rate_analytic=exact.growth_rate,
        growth_rate_z=_z(res.growth_rate_mean, res.growth_rate_se, exact.growth_rate),
        trade_frequency_mean=res.trade_frequency_mean, trade_frequency_se=res.trade_frequency_se,
        trade_frequency_analytic=exact.trade_frequency,
        trade_frequency_z=_z(res.trade_frequency_mean, res.trade_frequency_se, exact.trade_frequency),
        cycle_time_mean=res.exit_time_mean, cycle_time_se=res.exit_time_se,
        cycle_time_analytic=exact.expected_cycle_time,
    )
    _emit(report, args.format)
    return EXIT_OK


def cmd_baselines(args) -> int:
    mp = _market(args)
    h = _positive_h(args)
    v_m = merton_growth(mp)
    hb = h_investor_growth(mp, h)
    lb = lambda_investor_growth(mp, 1.0 / h)
    report = {
        "mu": mp.mu,
        "sigma": mp.sigma,
        "h": h,
        "merton_growth": v_m,
        "h_investor_growth": hb.growth_rate,
        "h_investor_fraction": hb.optimal_fraction,
        "lambda": 1.0 / h,
        "lambda_investor_growth": lb.growth_rate,
        "lambda_method": "asymptotic approximation",
        "E_h": efficiency(hb.growth_rate, v_m),
        "E_lambda": efficiency(lb.growth_rate, v_m),
    }
    _emit(report, args.format)
    return EXIT_OK


COMMANDS = {
    "merton": cmd_merton,
    "solve": cmd_solve,
    "curve": cmd_curve,
    "simulate": cmd_simulate,
    "baselines": cmd_baselines,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser, subparsers = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    try:
        if args.config:
            _apply_config(subparsers[args.command], load_config(args.config))
            args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except InfeasibleBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, InvalidParameterError, SingularCaseError, NoRootError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
