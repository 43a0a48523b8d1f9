"""Trade-off curves between a pair of distributions.

A trade-off curve maps a type-I error budget ``alpha`` to the smallest
type-II error any test can achieve when distinguishing the pair.  Every
curve here is convex, continuous, non-increasing on [0, 1], bounded by
``1 - alpha``, and extended by 0 for arguments beyond 1.

The module provides the analytic benchmark families, piecewise-linear
curves, the exact curve of a finite-support pair (which doubles as the
brute-force oracle for everything analytic), greatest convex minorants,
and a grid-based validator.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import laplace as _laplace
from scipy.stats import norm as _norm

__all__ = [
    "CurveError",
    "TradeoffCurve",
    "EpsDelta",
    "TvTolerant",
    "GaussianShift",
    "LaplaceShift",
    "CurvedRho",
    "PiecewiseLinear",
    "CurveReport",
    "validate_curve",
    "gcm",
    "np_curve_discrete",
]

#: tolerance for convexity checks (double-precision curvature of the
#: analytic families near the boundary can dip slightly negative)
CONVEXITY_TOL = 1e-9
#: tolerance for monotonicity / range / normalization checks
EPS = 1e-12

# number of atoms and tail half-width used to discretize the Laplace pair
_LAPLACE_ATOMS = 100_000
_LAPLACE_TAIL = 12.0


class CurveError(ValueError):
    """Invalid curve parameters or malformed curve input."""


class TradeoffCurve:
    """Base class: a convex, non-increasing function of the error budget.

    Subclasses implement ``_eval_unit`` on [0, 1]; ``evaluate`` adds the
    extension by 0 beyond 1 and accepts scalars or arrays.
    """

    def _eval_unit(self, a: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, alpha):
        a = np.asarray(alpha, dtype=float)
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise CurveError("alpha must be finite and nonnegative")
        inside = np.minimum(a, 1.0)
        out = np.where(a > 1.0, 0.0, self._eval_unit(inside))
        if np.ndim(alpha) == 0:
            return float(out)
        return out

    __call__ = evaluate

    def label(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class EpsDelta(TradeoffCurve):
    """max{0, 1 - delta - e^eps * a, e^-eps * (1 - delta - a)}."""

    epsilon: float
    delta: float

    def __post_init__(self):
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise CurveError("epsilon must be nonnegative")
        if not (0.0 <= self.delta <= 1.0):
            raise CurveError("delta must lie in [0, 1]")

    def _eval_unit(self, a):
        e = self.epsilon
        one = 1.0 - self.delta
        return np.maximum(
            0.0, np.maximum(one - math.exp(e) * a, math.exp(-e) * (one - a))
        )

    def label(self):
        return f"epsdelta:{self.epsilon:g},{self.delta:g}"


@dataclass(frozen=True)
class TvTolerant(TradeoffCurve):
    """Hinge curve (1 - eps - a)_+ used for tolerant total-variation tests."""

    epsilon: float

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= 1.0):
            raise CurveError("epsilon must lie in [0, 1]")

    def _eval_unit(self, a):
        return np.maximum(0.0, 1.0 - self.epsilon - a)

    def label(self):
        return f"tv:{self.epsilon:g}"


@dataclass(frozen=True)
class GaussianShift(TradeoffCurve):
    """Curve of (N(0,1), N(mu,1)):  Phi(Phi^{-1}(1 - a) - mu)."""

    mu: float

    def __post_init__(self):
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise CurveError("mu must be nonnegative")

    def _eval_unit(self, a):
        with np.errstate(divide="ignore"):
            z = _norm.isf(a)  # Phi^{-1}(1 - a), +inf at a=0
        return _norm.cdf(z - self.mu)

    def label(self):
        return f"gdp:{self.mu:g}"


@functools.lru_cache(maxsize=16)
def _laplace_pl(mu: float) -> "PiecewiseLinear":
    """Discretized curve of (Lap(0,1), Lap(mu,1)), cached per mu.

    There is no convenient closed form; a 1e5-atom discretization on
    [-tail, mu + tail] through the exact finite-support construction is
    accurate to well below 1e-4 (checked against the oracle in tests).
    """
    edges = np.linspace(-_LAPLACE_TAIL, mu + _LAPLACE_TAIL, _LAPLACE_ATOMS + 1)
    p = np.diff(_laplace.cdf(edges, loc=0.0))
    q = np.diff(_laplace.cdf(edges, loc=mu))
    # fold the (negligible) tail mass into the end cells so both sum to 1
    p[0] += _laplace.cdf(edges[0], loc=0.0)
    p[-1] += _laplace.sf(edges[-1], loc=0.0)
    q[0] += _laplace.cdf(edges[0], loc=mu)
    q[-1] += _laplace.sf(edges[-1], loc=mu)
    return np_curve_discrete(p, q)


@dataclass(frozen=True)
class LaplaceShift(TradeoffCurve):
    """Curve of (Lap(0,1), Lap(mu,1)), via a cached fine discretization."""

    mu: float

    def __post_init__(self):
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise CurveError("mu must be nonnegative")

    def _eval_unit(self, a):
        return _laplace_pl(self.mu)._eval_unit(a)

    def label(self):
        return f"laplace:{self.mu:g}"


@dataclass(frozen=True)
class CurvedRho(TradeoffCurve):
    """(1 - a^{1/rho})^rho for rho >= 1; rho=1 is the line 1 - a."""

    rho: float

    def __post_init__(self):
        if not (self.rho >= 1.0 and math.isfinite(self.rho)):
            raise CurveError("rho must be >= 1")

    def _eval_unit(self, a):
        return (1.0 - a ** (1.0 / self.rho)) ** self.rho

    def label(self):
        return f"curved:{self.rho:g}"


@dataclass(frozen=True)
class PiecewiseLinear(TradeoffCurve):
    """Linear interpolation through breakpoints spanning alpha in [0, 1]."""

    alphas: np.ndarray = field(repr=False)
    betas: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.alphas, dtype=float)
        b = np.asarray(self.betas, dtype=float)
        if a.ndim != 1 or a.shape != b.shape or a.size < 2:
            raise CurveError("need matching 1-d breakpoint arrays, length >= 2")
        if np.any(np.diff(a) <= 0):
            raise CurveError("breakpoint alphas must be strictly increasing")
        if abs(a[0]) > EPS or abs(a[-1] - 1.0) > EPS:
            raise CurveError("breakpoints must include alpha=0 and alpha=1")
        if np.any(b < -EPS) or np.any(b > 1.0 + EPS):
            raise CurveError("breakpoint values must lie in [0, 1]")
        a = a.copy()
        a[0], a[-1] = 0.0, 1.0
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", np.clip(b, 0.0, 1.0))
        self.alphas.setflags(write=False)
        self.betas.setflags(write=False)

    def _eval_unit(self, a):
        return np.interp(a, self.alphas, self.betas)

    def label(self):
        return f"pl:<{self.alphas.size} breakpoints>"


@dataclass(frozen=True)
class CurveReport:
    """Grid-validation outcome; ``violations`` holds (check, alpha, value)."""

    passed: bool
    violations: tuple[tuple[str, float, float], ...]


def validate_curve(curve: TradeoffCurve, grid_size: int = 1001) -> CurveReport:
    """Check curve axioms on a uniform grid.

    Verifies values in [0, 1], monotone non-increase, nonnegative second
    differences up to ``CONVEXITY_TOL``, and the ``f(a) <= 1 - a`` cap.
    Each failed check contributes its first violating grid point.
    """
    if grid_size < 3:
        raise CurveError("grid_size must be >= 3")
    a = np.linspace(0.0, 1.0, grid_size)
    f = np.asarray(curve.evaluate(a))
    bad: list[tuple[str, float, float]] = []

    rng = (f < -EPS) | (f > 1.0 + EPS)
    if rng.any():
        i = int(np.argmax(rng))
        bad.append(("range", float(a[i]), float(f[i])))
    inc = np.diff(f) > EPS
    if inc.any():
        i = int(np.argmax(inc)) + 1
        bad.append(("monotone", float(a[i]), float(f[i])))
    d2 = f[2:] - 2.0 * f[1:-1] + f[:-2]
    cvx = d2 < -CONVEXITY_TOL
    if cvx.any():
        i = int(np.argmax(cvx)) + 1
        bad.append(("convex", float(a[i]), float(d2[i - 1])))
    cap = f > 1.0 - a + EPS
    if cap.any():
        i = int(np.argmax(cap))
        bad.append(("cap", float(a[i]), float(f[i])))
    return CurveReport(passed=not bad, violations=tuple(bad))


def _lower_hull(pts: np.ndarray) -> np.ndarray:
    """Lower convex hull of points sorted by (x, y); collinear points dropped."""
    hull: list[np.ndarray] = []
    for p in pts:
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
            if cross <= 0.0:
                hull.pop()
            else:
                break
        if hull and p[0] == hull[-1][0]:
            # vertical stack: keep only the lower point
            if p[1] < hull[-1][1]:
                hull.pop()
            else:
                continue
        hull.append(p)
    return np.asarray(hull)


def gcm(points) -> PiecewiseLinear:
    """Greatest convex minorant of a point cloud, as a piecewise-linear curve.

    If the cloud does not reach alpha=0 (alpha=1) the trivial bounds (0, 1)
    and (1, 0), satisfied by every trade-off curve, are appended so the
    result is defined on all of [0, 1].
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise CurveError("gcm needs at least one point")
    if pts.shape[1] != 2:
        raise CurveError("points must be (alpha, beta) pairs")
    if np.any(pts[:, 0] < -EPS) or np.any(pts[:, 0] > 1.0 + EPS):
        raise CurveError("point alphas must lie in [0, 1]")
    pts = pts.copy()
    pts[:, 0] = np.clip(pts[:, 0], 0.0, 1.0)
    extra = []
    if pts[:, 0].min() > EPS:
        extra.append((0.0, 1.0))
    if pts[:, 0].max() < 1.0 - EPS:
        extra.append((1.0, 0.0))
    if extra:
        pts = np.vstack([pts, extra])
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    hull = _lower_hull(pts[order])
    if hull.shape[0] == 1:
        # single distinct alpha can only happen with degenerate input at 0 or 1
        hull = np.vstack([[0.0, hull[0, 1]], [1.0, hull[0, 1]]])
    return PiecewiseLinear(hull[:, 0], hull[:, 1])


def np_curve_discrete(p_weights, q_weights) -> PiecewiseLinear:
    """Exact trade-off curve of a finite-support pair.

    Atoms are taken in decreasing likelihood-ratio order (q/p, with
    p=0, q>0 atoms first); partial sums trace the optimal-test vertices
    (sum p, 1 - sum q) and the lower convex hull convexifies ties and
    randomized tests.  This is the oracle every analytic family is
    checked against.
    """
    p = np.asarray(p_weights, dtype=float)
    q = np.asarray(q_weights, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise CurveError("weight vectors must be 1-d and the same length")
    if np.any(p < 0) or np.any(q < 0):
        raise CurveError("weights must be nonnegative")
    if abs(p.sum() - 1.0) > 1e-12 or abs(q.sum() - 1.0) > 1e-12:
        raise CurveError("weights must each sum to 1 within 1e-12")
    keep = (p > 0) | (q > 0)
    p, q = p[keep], q[keep]
    with np.errstate(divide="ignore"):
        ratio = np.where(p > 0, q / np.maximum(p, 1e-300), np.inf)
    order = np.argsort(-ratio, kind="stable")
    cp = np.concatenate([[0.0], np.cumsum(p[order])])
    cq = np.concatenate([[0.0], np.cumsum(q[order])])
    pts = np.column_stack([np.clip(cp, 0.0, 1.0), np.clip(1.0 - cq, 0.0, 1.0)])
    pts[-1] = (1.0, 0.0)
    order2 = np.lexsort((pts[:, 1], pts[:, 0]))
    hull = _lower_hull(pts[order2])
    if abs(hull[0, 0]) <= EPS:
        hull[0, 0] = 0.0
    return PiecewiseLinear(hull[:, 0], hull[:, 1])
