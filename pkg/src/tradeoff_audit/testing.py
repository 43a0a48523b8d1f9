"""Hypothesis tests for trade-off curve domination, plus diagnostics.

The null hypothesis is that the unknown pair's trade-off curve dominates
a benchmark ``f0``; the tests search a witness class for a set whose
empirical error pair certifies a violation beyond the finite-sample
margin.  Three procedures are provided:

* :func:`mlr_test` — scans half-lines with the CDF (DKW) margin ``eta``.
* :func:`general_test` — any witness class, with the normalized margin
  maps absorbed into a convex surrogate benchmark; the decision is the
  classical reduction to n cost-sensitive ERM subproblems, evaluated
  here from the lower convex hull of the achievable cloud.
* :func:`adaptive_test` — a Bonferroni cascade over nested interval
  classes k = 1..k_max with per-level budgets 6*delta/(pi^2 k^2).

Diagnostics: separation checks for the three power conditions, the local
modulus of a benchmark, and a sufficient gap check with a default
constant of 8.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .curves import TradeoffCurve
from .margins import (
    GUARD,
    MarginError,
    MarginParams,
    dkw_margins,
    grid_pieces,
    h_plus,
    h_plus_inv,
    make_margins,
    variance_proxy,
)
from .witness import (
    HalfLines,
    IntervalUnion,
    SampleData,
    WitnessClass,
    WitnessSet,
    enumerate_sets,
    erm,
    erm_hull,
)

__all__ = [
    "TestConfig",
    "TestOutcome",
    "SeparationSpec",
    "SeparationReport",
    "mlr_test",
    "general_test",
    "adaptive_test",
    "direct_scan_test",
    "check_separation",
    "local_modulus",
    "sufficient_gap_check",
]


@dataclass(frozen=True)
class TestConfig:
    f0: TradeoffCurve
    witness_class: WitnessClass
    delta: float
    margin_kind: Literal["normalized", "dkw"] = "normalized"
    #: explicit tau (must be <= 1/2); None uses the standard formula
    tau_override: Optional[float] = None


@dataclass(frozen=True)
class TestOutcome:
    """Decision with certificate.

    ``piece_index`` is the first grid segment k in [1, n] whose
    subproblem rejects; ``slack`` is c_k minus the ERM value there (or
    the maximal slack over k, nonpositive, when not rejecting).
    """

    reject: bool
    witness: Optional[WitnessSet]
    piece_index: Optional[int]
    slack: float
    margins: MarginParams
    selected_level: Optional[int] = None


def _hull_lagrangian_minima(
    verts: np.ndarray, lambdas: np.ndarray, n: int
) -> np.ndarray:
    """E(lambda_k) = min over hull vertices of (b - lambda*a)/n, all k."""
    a = verts[:, 0].astype(float)
    b = verts[:, 1].astype(float)
    # vertices are few (hull of integer points); broadcast is cheap
    vals = b[None, :] - lambdas[:, None] * a[None, :]
    return vals.min(axis=1) / n


def general_test(data: SampleData, config: TestConfig) -> TestOutcome:
    """Benchmark-domination test over an arbitrary witness class.

    Builds the surrogate benchmark's grid pieces (lambda_k, c_k), then
    rejects iff some subproblem's exact ERM value falls below c_k by more
    than the guard band.  All n Lagrangian minima are read off the lower
    convex hull of the achievable cloud, which every minimizer lies on;
    the witness is reconstructed by one scalar ERM at the rejecting
    lambda_k.
    """
    n = data.n
    if config.margin_kind == "dkw":
        margins = dkw_margins(n, config.delta)
    else:
        margins = make_margins(
            n,
            config.delta,
            config.witness_class.vc_dim(),
            tau=config.tau_override,
        )
    pieces = grid_pieces(config.f0, margins, config.margin_kind)
    verts = erm_hull(config.witness_class, data)
    minima = _hull_lagrangian_minima(verts, pieces.lambdas, n)
    slack = pieces.intercepts - minima
    rejecting = slack > GUARD
    if not rejecting.any():
        return TestOutcome(
            reject=False,
            witness=None,
            piece_index=None,
            slack=float(slack.max()),
            margins=margins,
        )
    k_idx = int(np.argmax(rejecting))  # first rejecting k (0-based)
    res = erm(config.witness_class, data, float(pieces.lambdas[k_idx]))
    return TestOutcome(
        reject=True,
        witness=res.set,
        piece_index=k_idx + 1,
        slack=float(pieces.intercepts[k_idx] - res.value),
        margins=margins,
    )


def mlr_test(data: SampleData, f0: TradeoffCurve, delta: float) -> TestOutcome:
    """Half-line scan with the CDF margin: reject iff some half-line S has
    Qn(S^c) + eta < f0(Pn(S) + eta).  Implemented through the same grid
    reduction with the shift surrogate f0(t + eta) - eta."""
    if data.kind != "real":
        raise ValueError("mlr_test needs real-line samples")
    config = TestConfig(
        f0=f0, witness_class=HalfLines(), delta=delta, margin_kind="dkw"
    )
    return general_test(data, config)


def adaptive_test(
    data: SampleData, f0: TradeoffCurve, delta: float, k_max: int
) -> TestOutcome:
    """Bonferroni cascade over interval classes k = 1..k_max.

    Level k runs :func:`general_test` with ``IntervalUnion(k)`` at budget
    delta_k = 6*delta/(pi^2 k^2); the first rejecting level supplies the
    certificate.  Levels whose margin is not constructible are skipped
    with a warning — they could never reject validly.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    best_slack = -math.inf
    last_margins = None
    for k in range(1, k_max + 1):
        delta_k = 6.0 * delta / (math.pi**2 * k**2)
        config = TestConfig(
            f0=f0, witness_class=IntervalUnion(k), delta=delta_k
        )
        try:
            outcome = general_test(data, config)
        except MarginError:
            warnings.warn(
                f"adaptive level k={k} skipped: margin not constructible "
                f"at n={data.n}, delta_k={delta_k:.3g}",
                stacklevel=2,
            )
            continue
        last_margins = outcome.margins
        if outcome.reject:
            return TestOutcome(
                reject=True,
                witness=outcome.witness,
                piece_index=outcome.piece_index,
                slack=outcome.slack,
                margins=outcome.margins,
                selected_level=k,
            )
        best_slack = max(best_slack, outcome.slack)
    if last_margins is None:
        raise MarginError(
            f"no adaptive level is constructible at n={data.n}, delta={delta}"
        )
    return TestOutcome(
        reject=False,
        witness=None,
        piece_index=None,
        slack=best_slack,
        margins=last_margins,
    )


def direct_scan_test(data: SampleData, config: TestConfig) -> bool:
    """Definition-level decision by exhaustive scan over realizable sets.

    Small instances only.  Uses the same guard-band convention as the
    reduction so the two decisions are comparable bit-for-bit.
    """
    n = data.n
    pairs = np.array(
        [(a, b) for a, b, _ in enumerate_sets(config.witness_class, data)],
        dtype=float,
    )
    pn = pairs[:, 0] / n
    qn_c = pairs[:, 1] / n
    if config.margin_kind == "dkw":
        eta = dkw_margins(n, config.delta).eta
        lhs = qn_c + eta
        rhs = config.f0.evaluate(pn + eta)
    else:
        margins = make_margins(
            n, config.delta, config.witness_class.vc_dim(), tau=config.tau_override
        )
        lhs = h_plus(qn_c, margins.tau)
        rhs = config.f0.evaluate(h_plus(pn, margins.tau))
    return bool(np.any(rhs - lhs > GUARD))


# ---------------------------------------------------------------------------
# separation diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationSpec:
    f0: TradeoffCurve
    f1: TradeoffCurve
    n: int
    delta: float
    vc_dim: int = 2
    eta1: float = 0.0
    eta2: float = 0.0


@dataclass(frozen=True)
class SeparationReport:
    holds: bool
    worst_alpha: float
    worst_margin: float


def check_separation(
    spec: SeparationSpec,
    mode: Literal["mlr", "general", "misspecified"],
    grid: int = 1001,
) -> SeparationReport:
    """Does the alternative benchmark clear the mode's power condition?

    Evaluates the condition's right-hand side on a grid and reports the
    most violated point.  Grid checks are necessarily sampled; no
    interval arithmetic is attempted.
    """
    if grid < 101:
        raise ValueError("grid must be >= 101")
    alphas = np.linspace(0.0, 1.0, grid)
    f0, f1 = spec.f0, spec.f1
    if mode == "mlr":
        eta = dkw_margins(spec.n, spec.delta).eta
        rhs = np.maximum(f0.evaluate(alphas + 2.0 * eta) - 2.0 * eta, 0.0)
    elif mode == "general":
        tau = make_margins(spec.n, spec.delta, spec.vc_dim).tau
        inner = f0.evaluate(h_plus(h_plus(alphas, tau), tau))
        rhs = h_plus_inv(h_plus_inv(inner, tau), tau)
    elif mode == "misspecified":
        tau = make_margins(spec.n, spec.delta, spec.vc_dim).tau
        inner = f0.evaluate(h_plus(h_plus(alphas + 2.0 * spec.eta1, tau), tau))
        rhs = np.maximum(
            h_plus_inv(h_plus_inv(inner, tau), tau) - 2.0 * spec.eta2, 0.0
        )
    else:
        raise ValueError(f"unknown mode: {mode!r}")
    margin = rhs - f1.evaluate(alphas)
    worst = int(np.argmin(margin))
    return SeparationReport(
        holds=bool(margin.min() >= -GUARD),
        worst_alpha=float(alphas[worst]),
        worst_margin=float(margin[worst]),
    )


def local_modulus(f: TradeoffCurve, alpha: float, r: float) -> float:
    """Local sensitivity of the benchmark to input/output uncertainty r:
    f(a) - f(a + r + sqrt(r V(a))) + min(sqrt(r V(f(a))), f(a))."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    fa = f.evaluate(alpha)
    shift = alpha + r + math.sqrt(r * variance_proxy(alpha))
    return (
        fa
        - f.evaluate(shift)
        + min(math.sqrt(r * variance_proxy(fa)), fa)
    )


def sufficient_gap_check(
    f0: TradeoffCurve,
    f1: TradeoffCurve,
    n: int,
    delta: float,
    vc_dim: int,
    C: float = 8.0,
    grid: int = 1001,
) -> SeparationReport:
    """Check f0 - f1 >= C * (local modulus of f0 at scale tau) on a grid.

    A sufficient (not necessary) condition for the general separation
    requirement; C defaults to the constant derived for the hinge-curve
    case.
    """
    if C <= 0:
        raise ValueError("C must be positive")
    tau = make_margins(n, delta, vc_dim).tau
    alphas = np.linspace(0.0, 1.0, grid)
    gap = f0.evaluate(alphas) - f1.evaluate(alphas)
    mod = np.array([local_modulus(f0, float(a), tau) for a in alphas])
    margin = gap - C * mod
    worst = int(np.argmin(margin))
    return SeparationReport(
        holds=bool(margin.min() >= -GUARD),
        worst_alpha=float(alphas[worst]),
        worst_margin=float(margin[worst]),
    )
