"""Finite-sample confidence margins and the surrogate benchmark.

Two margin schedules are used throughout:

* the CDF-scan margin ``eta = sqrt(log(4/delta) / (2n))``, and
* the uniform witness-class margin
  ``tau = 4 (d log(2n) + log(32/delta)) / n`` for a class of VC dimension
  ``d``, valid only when ``tau <= 1/2``.

The normalized confidence maps ``h_plus`` / ``h_minus`` widen or shrink
an empirical probability ``t`` by ``sqrt(tau V(t)) + tau`` where
``V(t) = min(t, (1-t)_+)``; ``h_plus_inv`` is the explicit three-branch
generalized inverse of ``h_plus``.  Composing them around a benchmark
curve absorbs all margins into a single convex surrogate
``f~0 = h_plus_inv . f0 . h_plus`` whose values on the grid {k/n} define
the slopes and intercepts of the n cost-sensitive subproblems.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .curves import TradeoffCurve

__all__ = [
    "MarginError",
    "MarginParams",
    "make_margins",
    "dkw_margins",
    "variance_proxy",
    "h_plus",
    "h_minus",
    "h_plus_inv",
    "surrogate_eval",
    "GridPieces",
    "grid_pieces",
]

GUARD = 1e-12


class MarginError(ValueError):
    """Margins not constructible (typically: n too small, tau > 1/2)."""


@dataclass(frozen=True)
class MarginParams:
    """Derived margins for a sample size, failure budget, and class size.

    ``tau`` is ``None`` for the CDF-scan schedule, which never uses it.
    """

    n: int
    delta: float
    vc_dim: int
    eta: float
    tau: Optional[float]


def make_margins(
    n: int, delta: float, vc_dim: int, tau: float | None = None
) -> MarginParams:
    """Margins with the uniform class margin ``tau`` (override allowed).

    Raises :class:`MarginError` when tau exceeds 1/2 — at that point the
    confidence maps degenerate and the test can never reject validly, so
    the caller must increase n or shrink the class.
    """
    if n < 1 or not isinstance(n, (int, np.integer)):
        raise MarginError("n must be a positive integer")
    if not (0.0 < delta < 1.0):
        raise MarginError("delta must lie in (0, 1)")
    if vc_dim < 1:
        raise MarginError("vc_dim must be a positive integer")
    eta = math.sqrt(math.log(4.0 / delta) / (2.0 * n))
    if tau is None:
        tau = 4.0 * (vc_dim * math.log(2.0 * n) + math.log(32.0 / delta)) / n
    if not (0.0 < tau <= 0.5):
        raise MarginError(
            f"tau = {tau:.4g} > 1/2: n = {n} is too small for a class of "
            f"VC dimension {vc_dim} at delta = {delta}"
        )
    return MarginParams(n=int(n), delta=delta, vc_dim=int(vc_dim), eta=eta, tau=tau)


def dkw_margins(n: int, delta: float) -> MarginParams:
    """Margins for the CDF-scan test: only ``eta`` is needed."""
    if n < 1:
        raise MarginError("n must be a positive integer")
    if not (0.0 < delta < 1.0):
        raise MarginError("delta must lie in (0, 1)")
    eta = math.sqrt(math.log(4.0 / delta) / (2.0 * n))
    return MarginParams(n=int(n), delta=delta, vc_dim=2, eta=eta, tau=None)


def variance_proxy(t):
    """V(t) = min(t, (1-t)_+), the binomial variance scale at level t."""
    t = np.asarray(t, dtype=float)
    out = np.minimum(t, np.maximum(1.0 - t, 0.0))
    return float(out) if out.ndim == 0 else out


def h_plus(t, tau: float):
    """Upper confidence map min(t + sqrt(tau V(t)) + tau, 1); non-decreasing."""
    t = np.asarray(t, dtype=float)
    out = np.minimum(t + np.sqrt(tau * variance_proxy(t)) + tau, 1.0)
    return float(out) if out.ndim == 0 else out


def h_minus(t, tau: float):
    """Lower confidence map t - sqrt(tau V(t)) - tau, deliberately unclamped.

    Band construction applies the final "or 0" only after its infimum, so
    negative values must survive here.
    """
    t = np.asarray(t, dtype=float)
    out = t - np.sqrt(tau * variance_proxy(t)) - tau
    return float(out) if out.ndim == 0 else out


def h_plus_inv(t, tau: float):
    """Generalized inverse inf{s : h_plus(s) >= t}, in closed form.

    Three branches meet at ``tau`` and ``min(1, 1/2 + sqrt(tau/2) + tau)``;
    boundaries are evaluated from the lower branch (the function is
    continuous, so adjacent branches agree there — asserted in tests).
    Satisfies the exact equivalence  h_plus(s) < t  iff  s < h_plus_inv(t).
    """
    t = np.asarray(t, dtype=float)
    b2 = min(1.0, 0.5 + math.sqrt(tau / 2.0) + tau)
    with np.errstate(invalid="ignore"):
        mid = t - (tau + np.sqrt(tau * np.maximum(4.0 * t - 3.0 * tau, 0.0))) / 2.0
        top = t - (
            3.0 * tau + np.sqrt(tau * np.maximum(4.0 + 5.0 * tau - 4.0 * t, 0.0))
        ) / 2.0
    out = np.where(t <= tau, 0.0, np.where(t <= b2, mid, top))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def surrogate_eval(f0: TradeoffCurve, tau: float, t):
    """Surrogate benchmark h_plus_inv(f0(h_plus(t))), clamped to [0, 1].

    Convex and non-increasing in t; comparing raw empirical pairs against
    it is equivalent to comparing margin-corrected pairs against f0.
    """
    val = h_plus_inv(f0.evaluate(h_plus(t, tau)), tau)
    out = np.clip(val, 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GridPieces:
    """Slopes and intercepts of the surrogate's chords on the grid {k/n}.

    ``lambdas[k-1]`` and ``intercepts[k-1]`` describe the affine extension
    of the segment over [(k-1)/n, k/n]; ``surrogate_values[k]`` is the
    surrogate at k/n.  Slopes are <= 0 and non-decreasing by convexity.
    """

    lambdas: np.ndarray
    intercepts: np.ndarray
    surrogate_values: np.ndarray

    @property
    def n(self) -> int:
        return self.lambdas.size


def grid_pieces(
    f0: TradeoffCurve,
    margins: MarginParams,
    margin_kind: Literal["normalized", "dkw"] = "normalized",
) -> GridPieces:
    """Evaluate the surrogate on {k/n} and extract chord slopes/intercepts.

    ``margin_kind="dkw"`` uses the shift surrogate f0(t + eta) - eta
    (clamped below at 0, which preserves convexity and the rejection
    rule); the default composes the normalized confidence maps.
    """
    n = margins.n
    grid = np.arange(n + 1) / n
    if margin_kind == "normalized":
        if margins.tau is None:
            raise MarginError("normalized margins require tau")
        vals = surrogate_eval(f0, margins.tau, grid)
    elif margin_kind == "dkw":
        vals = np.maximum(f0.evaluate(grid + margins.eta) - margins.eta, 0.0)
    else:
        raise ValueError(f"unknown margin_kind: {margin_kind!r}")
    # enforce exact monotone non-increase against last-ulp rounding wobble,
    # so every chord slope is a valid (nonpositive) subproblem multiplier
    vals = np.minimum.accumulate(vals)
    diffs = n * np.diff(vals)  # lambda_k for k = 1..n
    ks = np.arange(n)  # k - 1
    intercepts = vals[:-1] - ks * np.diff(vals)
    return GridPieces(
        lambdas=diffs, intercepts=intercepts, surrogate_values=np.asarray(vals)
    )
