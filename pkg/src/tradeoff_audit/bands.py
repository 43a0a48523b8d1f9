"""Simultaneous confidence bands for the trade-off curve.

The test inverts into a band: for each error budget ``alpha`` the upper
envelope takes the best (smallest) margin-widened type-II error over
witness sets whose widened type-I error fits under ``alpha``, and the
lower envelope does the same with the shrinking map.  Both reduce to the
class frontier F(m); the lower envelope is a step function whose
greatest convex minorant is the final, convexity-respecting lower band.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .curves import PiecewiseLinear, gcm
from .margins import MarginParams, h_minus, h_plus, make_margins
from .witness import IntervalUnion, SampleData, WitnessClass, erm_hull, frontier

__all__ = ["BandResult", "compute_band", "write_band_csv"]


@dataclass(frozen=True)
class BandResult:
    alphas: np.ndarray
    upper: np.ndarray
    lower_raw: np.ndarray
    lower_gcm: np.ndarray
    margins: MarginParams
    lower_gcm_curve: PiecewiseLinear


def default_grid(step: float = 0.005) -> np.ndarray:
    return np.round(np.arange(0.0, 1.0 + step / 2, step), 10)


def compute_band(
    data: SampleData,
    witness_class: WitnessClass,
    delta: float,
    alphas=None,
    frontier_mode: Literal["exact", "hull"] = "exact",
) -> BandResult:
    """Upper/lower envelopes and the convexified lower band on a grid.

    ``frontier_mode="hull"`` replaces the exact frontier of an interval
    class with the step function through the achievable cloud's hull
    vertices: much cheaper, still a valid (possibly looser) upper band,
    and the convexified lower band is unchanged.
    """
    if alphas is None:
        alphas = default_grid()
    alphas = np.asarray(alphas, dtype=float)
    n = data.n
    margins = make_margins(n, delta, witness_class.vc_dim())
    tau = margins.tau

    if frontier_mode == "hull" and isinstance(witness_class, IntervalUnion):
        verts = erm_hull(witness_class, data)
        f_vals = np.full(n + 1, 1.0)
        va, vb = verts[:, 0], verts[:, 1] / n
        pos = np.searchsorted(va, np.arange(n + 1), side="right") - 1
        ok = pos >= 0
        f_vals[ok] = np.minimum.accumulate(vb)[pos[ok]]
    else:
        f_vals = frontier(witness_class, data)

    m_grid = np.arange(n + 1) / n
    hp_m = h_plus(m_grid, tau)  # non-decreasing (clamped map)
    hm_m = h_minus(m_grid, tau)
    hp_f = h_plus(f_vals, tau)
    hm_f = h_minus(f_vals, tau)

    # upper: constraint h_plus(m/n) <= alpha is a prefix of m; the frontier
    # is non-increasing, so the infimum sits at the largest feasible m
    idx = np.searchsorted(hp_m, alphas, side="right") - 1
    upper = np.where(idx >= 0, hp_f[np.maximum(idx, 0)], np.inf)
    upper = np.minimum(upper, 1.0 - alphas)

    # lower: h_minus(0) = -tau <= alpha always, so never empty; h_minus is
    # not monotone near 0, so sort the feasibility thresholds and take
    # prefix minima of the objective in that order.  Any inexactness from
    # taking frontier values only occurs where both candidates are
    # negative, which the final clamp sends to 0 anyway.
    order = np.argsort(hm_m, kind="stable")
    thr_sorted = hm_m[order]
    obj_prefix_min = np.minimum.accumulate(hm_f[order])

    def lower_at(avals: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(thr_sorted, avals, side="right") - 1
        out = np.where(pos >= 0, obj_prefix_min[np.maximum(pos, 0)], np.inf)
        return np.maximum(out, 0.0)

    lower_raw = lower_at(alphas)

    # convexify the lower step function through its corner vertices
    thresholds = np.clip(thr_sorted, 0.0, 1.0)
    step_vals = np.maximum(obj_prefix_min, 0.0)
    vertex_pts = np.column_stack([thresholds, step_vals])
    vertex_pts = np.vstack([vertex_pts, [[0.0, float(lower_at(np.zeros(1))[0])], [1.0, 0.0]]])
    curve = gcm(vertex_pts)
    lower_gcm = np.minimum(curve.evaluate(alphas), lower_raw)

    return BandResult(
        alphas=alphas,
        upper=upper,
        lower_raw=lower_raw,
        lower_gcm=lower_gcm,
        margins=margins,
        lower_gcm_curve=curve,
    )


def write_band_csv(result: BandResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha", "lower_gcm", "lower_raw", "upper"])
        for a, lg, lr, u in zip(
            result.alphas, result.lower_gcm, result.lower_raw, result.upper
        ):
            writer.writerow([f"{a:.10g}", f"{lg:.10g}", f"{lr:.10g}", f"{u:.10g}"])
