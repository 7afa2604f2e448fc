"""Efficiency curves and their CSV / SVG renderings."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .baselines import h_investor_growth, lambda_investor_growth
from .errors import InvalidParameterError
from .market import MarketParams, check_gamma, merton_growth, merton_with_costs
from .optimizer import efficiency, solve_relaxed

DEFAULT_H_MIN = 0.02
DEFAULT_H_MAX = 2.0
DEFAULT_POINTS = 40


@dataclass(frozen=True)
class EfficiencyRow:
    h: float
    v_o: float
    v_h: float
    v_lambda: float
    e_o: float
    e_h: float
    e_lambda: float

    header = ("h", "V_o", "V_h", "V_lambda", "E_o", "E_h", "E_lambda")


@dataclass(frozen=True)
class CostEfficiencyRow:
    h: float
    v_o: float
    e_o_c: float
    a: float
    alpha: float
    beta: float
    b: float

    header = ("h", "V_o", "E_o_c", "a", "alpha", "beta", "b")


Row = Union[EfficiencyRow, CostEfficiencyRow]


def h_grid(h_min: float = DEFAULT_H_MIN, h_max: float = DEFAULT_H_MAX, points: int = DEFAULT_POINTS) -> np.ndarray:
    """Log-spaced budget grid; a degenerate range gives a single point."""
    if points < 1:
        raise InvalidParameterError(f"points >= 1 required, got {points}")
    if not (0 < h_min <= h_max and math.isfinite(h_max)):
        raise InvalidParameterError(f"0 < h_min <= h_max required, got ({h_min}, {h_max})")
    if h_min == h_max or points == 1:
        return np.array([float(h_min)])
    return np.geomspace(h_min, h_max, points)


def efficiency_curve(mp: MarketParams, gamma, hs: Iterable[float]) -> list[Row]:
    """Rates and efficiencies on a grid of budgets.

    Without costs the o-investor is compared with the h- and lambda-investors
    against the frictionless Merton rate (lambda = 1/h). With costs only the
    o-investor is reported, against the cost-Merton rate, together with its
    optimal boundaries. Each solve is warm-started from the previous optimum.
    """
    gamma = check_gamma(gamma)
    rows: list[Row] = []
    previous: list[tuple[float, float, float]] = []
    v_ref = merton_growth(mp) if gamma == 0 else merton_with_costs(mp, gamma).growth_rate
    for h in hs:
        h = float(h)
        sol = solve_relaxed(mp, gamma, h, extra_starts=previous)
        p = sol.policy
        previous = [(p.a, p.alpha, p.beta)]
        if gamma > 0:
            rows.append(CostEfficiencyRow(h, sol.growth_rate, efficiency(sol.growth_rate, v_ref), *p.as_tuple()))
            continue
        v_h = h_investor_growth(mp, h).growth_rate
        v_lam = lambda_investor_growth(mp, 1.0 / h).growth_rate
        rows.append(EfficiencyRow(
            h, sol.growth_rate, v_h, v_lam,
            efficiency(sol.growth_rate, v_ref), efficiency(v_h, v_ref), efficiency(v_lam, v_ref),
        ))
    return rows


def format_number(x: float) -> str:
    return f"{x:.10g}"


def rows_to_csv(rows: Sequence[Row]) -> str:
    if not rows:
        raise InvalidParameterError("no rows to write")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(type(rows[0]).header)
    for row in rows:
        writer.writerow([format_number(v) for v in astuple(row)])
    return buf.getvalue()


_COLORS = ("#1f77b4", "#d62728", "#2ca02c")


def rows_to_svg(rows: Sequence[Row], width: int = 640, height: int = 400) -> str:
    """Standalone SVG of efficiency against h (log axis)."""
    if not rows:
        raise InvalidParameterError("no rows to plot")
    if isinstance(rows[0], EfficiencyRow):
        series = {"E_o": [r.e_o for r in rows], "E_h": [r.e_h for r in rows], "E_lambda": [r.e_lambda for r in rows]}
    else:
        series = {"E_o_c": [r.e_o_c for r in rows]}
    hs = [r.h for r in rows]
    pad = 50
    lx = [math.log10(h) for h in hs]
    x0, x1 = min(lx), max(lx)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    ys = [y for v in series.values() for y in v]
    y0, y1 = min(ys), max(max(ys), 1.0)
    if y1 == y0:
        y0 -= 1e-3

    def sx(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(v):
        return height - pad - (v - y0) / (y1 - y0) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle" font-size="12">h (log scale)</text>',
        f'<text x="{pad}" y="{pad - 10}" font-size="12">efficiency [{y0:.4g}, {y1:.4g}]</text>',
    ]
    for i, (name, values) in enumerate(series.items()):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(lx, values))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        parts.append(f'<text x="{width - pad - 60}" y="{pad + 15 * (i + 1)}" fill="{color}" font-size="12">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
