"""Data generators, the oracle one-witness baseline, and experiment harness.

Generators produce equal-size sample pairs with known analytic trade-off
curves where available: Gaussian and Laplace location shifts, the
piecewise-constant "bump" pair on [0, 1], an arbitrary finite-support
pair, and the base-pair construction that realizes any valid benchmark
curve exactly as the trade-off of (Unif[0, 1], R).

Reproducibility: every replication draws from a counter-based stream
keyed by (master seed, cell id, replication index), so results are
independent of execution order and parallelism.
"""
from __future__ import annotations

import math
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import laplace as _laplace
from scipy.stats import norm as _norm

from .bands import compute_band
from .curves import (
    GaussianShift,
    LaplaceShift,
    TradeoffCurve,
    TvTolerant,
    np_curve_discrete,
)
from .margins import GUARD, MarginError, MarginParams
from .testing import TestOutcome, adaptive_test, general_test, mlr_test, TestConfig
from .witness import HalfLines, IntervalUnion, SampleData, WitnessSet

__all__ = [
    "GeneratorSpec",
    "GaussianShiftPair",
    "LaplaceShiftPair",
    "BumpPair",
    "BasePair",
    "DiscretePair",
    "sample_pair",
    "base_pair_inverse_cdf",
    "oracle_witness_test",
    "SimReport",
    "ExperimentConfig",
    "run_experiment",
    "replication_rng",
]


class GeneratorSpec:
    """A distribution pair with a deterministic sampling recipe."""

    def label(self) -> str:
        raise NotImplementedError

    def draw(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def truth_curve(self) -> Optional[TradeoffCurve]:
        """Analytic trade-off of the pair, when known."""
        return None

    def cdfs(self) -> Optional[tuple[Callable, Callable]]:
        """(F_P, F_Q) when available in closed form."""
        return None


@dataclass(frozen=True)
class GaussianShiftPair(GeneratorSpec):
    mu_prime: float

    def label(self):
        return f"gaussian:{self.mu_prime:g}"

    def draw(self, n, rng):
        return rng.standard_normal(n), rng.standard_normal(n) + self.mu_prime

    def truth_curve(self):
        return GaussianShift(abs(self.mu_prime))

    def cdfs(self):
        mu = self.mu_prime
        return (lambda x: _norm.cdf(x), lambda x: _norm.cdf(x - mu))


@dataclass(frozen=True)
class LaplaceShiftPair(GeneratorSpec):
    mu_prime: float

    def label(self):
        return f"laplace:{self.mu_prime:g}"

    def draw(self, n, rng):
        x = rng.standard_exponential(n) - rng.standard_exponential(n)
        y = rng.standard_exponential(n) - rng.standard_exponential(n)
        return x, y + self.mu_prime

    def truth_curve(self):
        return LaplaceShift(abs(self.mu_prime))

    def cdfs(self):
        mu = self.mu_prime
        return (lambda x: _laplace.cdf(x), lambda x: _laplace.cdf(x - mu))


def _bump_edges_cdf(k_star: int, delta_q: float):
    edges = np.arange(2 * k_star + 1) / (2 * k_star)
    dens = np.where(np.arange(2 * k_star) % 2 == 0, 1.0 + delta_q, 1.0 - delta_q)
    cdf = np.concatenate([[0.0], np.cumsum(dens / (2 * k_star))])
    cdf[-1] = 1.0
    return edges, cdf


@dataclass(frozen=True)
class BumpPair(GeneratorSpec):
    """X ~ Unif[0,1]; Y has density 1 +/- delta_q alternating on 2k* bins."""

    k_star: int
    delta_q: float

    def __post_init__(self):
        if self.k_star < 1 or not (0.0 <= self.delta_q < 1.0):
            raise ValueError("need k_star >= 1 and delta_q in [0, 1)")

    def label(self):
        return f"bump:{self.k_star},{self.delta_q:g}"

    def draw(self, n, rng):
        x = rng.random(n)
        u = rng.random(n)
        edges, cdf = _bump_edges_cdf(self.k_star, self.delta_q)
        return x, np.interp(u, cdf, edges)

    def truth_curve(self):
        # discretize on the bin structure: within-bin likelihood ratio is
        # constant, so 4k* cells per bin are already exact; use the atoms
        edges, cdf = _bump_edges_cdf(self.k_star, self.delta_q)
        p = np.diff(edges)
        q = np.diff(cdf)
        return np_curve_discrete(p, q)

    def cdfs(self):
        edges, cdf = _bump_edges_cdf(self.k_star, self.delta_q)
        return (
            lambda x: np.clip(x, 0.0, 1.0),
            lambda x: np.interp(np.clip(x, 0.0, 1.0), edges, cdf),
        )


def base_pair_inverse_cdf(f0: TradeoffCurve, u):
    """Quantile function of the distribution R whose survival on [0, 1]
    equals f0, with uniform mass 1 - f0(0) on [f0(0) - 1, 0).

    Vectorized; flat stretches of f0 resolve to the leftmost solution
    (generalized-inverse convention).  Bisection to 1e-12.
    """
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise ValueError("u must lie in (0, 1)")
    f00 = f0.evaluate(0.0)
    out = np.empty_like(u_arr)
    low_part = u_arr < 1.0 - f00
    out[low_part] = f00 - 1.0 + u_arr[low_part]
    solve = ~low_part
    if solve.any():
        target = 1.0 - u_arr[solve]  # want leftmost x with f0(x) <= target
        lo = np.zeros(target.size)
        hi = np.ones(target.size)
        for _ in range(200):
            mid = (lo + hi) / 2.0
            le = f0.evaluate(mid) <= target
            hi = np.where(le, mid, hi)
            lo = np.where(le, lo, mid)
            if np.max(hi - lo) < 1e-12:
                break
        out[solve] = hi
    if np.ndim(u) == 0:
        return float(out[0])
    return out


@dataclass(frozen=True)
class BasePair(GeneratorSpec):
    """(Unif[0,1], R) whose trade-off curve is exactly f0."""

    f0: TradeoffCurve

    def label(self):
        return f"basepair:{self.f0.label()}"

    def draw(self, n, rng):
        return rng.random(n), base_pair_inverse_cdf(self.f0, rng.random(n))

    def truth_curve(self):
        return self.f0


@dataclass(frozen=True)
class DiscretePair(GeneratorSpec):
    """Categorical pair; draws are encoded as the atom indices."""

    p_weights: tuple
    q_weights: tuple

    def label(self):
        return f"discrete:{len(self.p_weights)}"

    def draw(self, n, rng):
        k = len(self.p_weights)
        x = rng.choice(k, size=n, p=np.asarray(self.p_weights))
        y = rng.choice(k, size=n, p=np.asarray(self.q_weights))
        return x.astype(float), y.astype(float)

    def truth_curve(self):
        return np_curve_discrete(self.p_weights, self.q_weights)


def replication_rng(master_seed: int, cell_id: str, rep: int) -> np.random.Generator:
    """Counter-based stream: identical regardless of execution order."""
    cell_key = zlib.crc32(cell_id.encode())
    return np.random.default_rng(
        np.random.SeedSequence([master_seed, cell_key, rep])
    )


def sample_pair(spec: GeneratorSpec, n: int, seed: int) -> SampleData:
    """Deterministic sample pair for (spec, n, seed)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    x, y = spec.draw(n, rng)
    return SampleData.from_samples(x, y)


# ---------------------------------------------------------------------------
# oracle one-witness baseline
# ---------------------------------------------------------------------------


def oracle_witness_test(
    data: SampleData, f0: TradeoffCurve, truth: GeneratorSpec, delta: float
) -> TestOutcome:
    """One-witness baseline: pick the most-violating half-line using the
    TRUE distributions, then test it on the data with the single-set
    margin eta1 = sqrt(log(2/delta) / (2n)).

    The search runs a 1024-point coarse scan over both half-line
    orientations followed by golden-section refinement to 1e-10.
    """
    pair = truth.cdfs()
    if pair is None:
        raise ValueError(f"{truth.label()} has no analytic CDFs")
    fp, fq = pair
    n = data.n
    lo = min(data.x_sorted[0], data.y_sorted[0]) - 1.0
    hi = max(data.x_sorted[-1], data.y_sorted[-1]) + 1.0

    def violation(a, left: bool):
        if left:  # S = (-inf, a)
            return f0.evaluate(np.minimum(fp(a), 1.0)) - (1.0 - fq(a))
        return f0.evaluate(np.minimum(1.0 - fp(a), 1.0)) - fq(a)

    grid = np.linspace(lo, hi, 1024)
    best = None
    for left in (True, False):
        vals = np.asarray(violation(grid, left))
        i = int(np.argmax(vals))
        bracket = (grid[max(i - 1, 0)], grid[min(i + 1, 1023)])
        res = minimize_scalar(
            lambda a: -float(violation(a, left)),
            bounds=bracket,
            method="bounded",
            options={"xatol": 1e-10},
        )
        cand = (-res.fun, float(res.x), left)
        if best is None or cand[0] > best[0]:
            best = cand
    _, a_star, left = best

    eta1 = math.sqrt(math.log(2.0 / delta) / (2.0 * n))
    if left:
        pn = np.searchsorted(data.x_sorted, a_star, side="right") / n
        qn_c = 1.0 - np.searchsorted(data.y_sorted, a_star, side="right") / n
    else:
        pn = 1.0 - np.searchsorted(data.x_sorted, a_star, side="left") / n
        qn_c = np.searchsorted(data.y_sorted, a_star, side="left") / n
    slack = f0.evaluate(pn + eta1) - (qn_c + eta1)
    reject = bool(slack > GUARD)
    witness = None
    if reject:
        i = int(np.searchsorted(data.cells, a_star))
        if left:
            witness = WitnessSet(cell_ranges=(((0, i),) if i > 0 else ()))
        else:
            witness = WitnessSet(
                cell_ranges=(((i, data.ncells),) if i < data.ncells else ())
            )
    margins = MarginParams(n=n, delta=delta, vc_dim=1, eta=eta1, tau=None)
    return TestOutcome(
        reject=reject,
        witness=witness,
        piece_index=None,
        slack=float(slack),
        margins=margins,
    )


# ---------------------------------------------------------------------------
# experiment harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Grids for the three experiment kinds; defaults mirror the study design."""

    families: tuple[str, ...] = ("gaussian", "laplace")
    mu0: float = 1.0
    mu_grid: tuple[float, ...] = (0.0, 0.5, 0.8, 1.0, 1.2, 1.5, 2.0)
    n_grid: tuple[int, ...] = (100, 200, 500, 1000, 2000, 5000)
    delta: float = 0.05
    # coverage
    coverage_n_grid: tuple[int, ...] = (5000, 10000, 20000)
    band_grid_step: float = 0.005
    # adaptive
    k_star: int = 2
    delta_q_grid: tuple[float, ...] = (0.85, 0.95)
    adaptive_n_grid: tuple[int, ...] = (1000, 2000, 4000, 8000)
    k_grid: tuple[int, ...] = (1, 2, 3, 4)
    k_max: int = 4
    tv_eps: float = 0.05


@dataclass(frozen=True)
class SimReport:
    kind: str
    rows: tuple[dict, ...]

    def aggregates(self) -> dict[tuple, float]:
        """Mean value per (cell_id, class) cell."""
        sums: dict[tuple, list] = {}
        for r in self.rows:
            key = (r["cell_id"], r["class"])
            sums.setdefault(key, []).append(r["value"])
        return {k: float(np.mean(v)) for k, v in sums.items()}

    def to_csv(self, path) -> None:
        import csv

        cols = [
            "kind",
            "cell_id",
            "generator",
            "n",
            "delta",
            "class",
            "param",
            "rep",
            "seed",
            "value",
            "runtime_ms",
        ]
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=cols)
            writer.writeheader()
            for r in self.rows:
                writer.writerow({c: r[c] for c in cols})

    def aggregates_to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["cell_id", "class", "rate"])
            for (cell, cls), rate in sorted(self.aggregates().items()):
                writer.writerow([cell, cls, f"{rate:.6g}"])


def _family_spec(family: str, mu: float) -> GeneratorSpec:
    if family == "gaussian":
        return GaussianShiftPair(mu)
    if family == "laplace":
        return LaplaceShiftPair(mu)
    raise ValueError(f"unknown family: {family!r}")


def _family_benchmark(family: str, mu0: float) -> TradeoffCurve:
    return GaussianShift(mu0) if family == "gaussian" else LaplaceShift(mu0)


def _power_cell(args):
    config, family, mu, n, rep, master_seed = args
    cell_id = f"power/{family}/mu={mu:g}/n={n}"
    rng = replication_rng(master_seed, cell_id, rep)
    spec = _family_spec(family, mu)
    x, y = spec.draw(n, rng)
    data = SampleData.from_samples(x, y)
    f0 = _family_benchmark(family, config.mu0)
    rows = []
    t0 = time.perf_counter()
    out = mlr_test(data, f0, config.delta)
    t1 = time.perf_counter()
    oracle = oracle_witness_test(data, f0, spec, config.delta)
    t2 = time.perf_counter()
    base = dict(
        kind="power",
        cell_id=cell_id,
        generator=spec.label(),
        n=n,
        delta=config.delta,
        param=f"mu={mu:g}",
        rep=rep,
        seed=master_seed,
    )
    rows.append(
        dict(
            base,
            **{
                "class": "mlr",
                "value": int(out.reject),
                "runtime_ms": round(1e3 * (t1 - t0), 3),
            },
        )
    )
    rows.append(
        dict(
            base,
            **{
                "class": "oracle",
                "value": int(oracle.reject),
                "runtime_ms": round(1e3 * (t2 - t1), 3),
            },
        )
    )
    return rows


def _coverage_cell(args):
    config, family, n, rep, master_seed = args
    cell_id = f"coverage/{family}/n={n}"
    rng = replication_rng(master_seed, cell_id, rep)
    spec = _family_spec(family, config.mu0)
    x, y = spec.draw(n, rng)
    data = SampleData.from_samples(x, y)
    truth = spec.truth_curve()
    t0 = time.perf_counter()
    band = compute_band(
        data,
        HalfLines(),
        config.delta,
        alphas=np.round(
            np.arange(0.0, 1.0 + config.band_grid_step / 2, config.band_grid_step), 10
        ),
    )
    t1 = time.perf_counter()
    tv = np.asarray(truth.evaluate(band.alphas))
    covered = bool(
        np.all(band.lower_gcm <= tv + 1e-9) and np.all(tv <= band.upper + 1e-9)
    )
    return [
        dict(
            kind="coverage",
            cell_id=cell_id,
            generator=spec.label(),
            n=n,
            delta=config.delta,
            param=f"mu={config.mu0:g}",
            rep=rep,
            seed=master_seed,
            **{
                "class": "halflines",
                "value": int(covered),
                "runtime_ms": round(1e3 * (t1 - t0), 3),
            },
        )
    ]


def _adaptive_cell(args):
    config, delta_q, n, rep, master_seed = args
    cell_id = f"adaptive/dq={delta_q:g}/n={n}"
    rng = replication_rng(master_seed, cell_id, rep)
    spec = BumpPair(config.k_star, delta_q)
    x, y = spec.draw(n, rng)
    data = SampleData.from_samples(x, y)
    f0 = TvTolerant(config.tv_eps)
    base = dict(
        kind="adaptive",
        cell_id=cell_id,
        generator=spec.label(),
        n=n,
        delta=config.delta,
        param=f"dq={delta_q:g}",
        rep=rep,
        seed=master_seed,
    )
    rows = []
    for k in config.k_grid:
        t0 = time.perf_counter()
        try:
            out = general_test(
                data, TestConfig(f0=f0, witness_class=IntervalUnion(k), delta=config.delta)
            )
            val = int(out.reject)
        except MarginError:
            val = 0
        rows.append(
            dict(
                base,
                **{
                    "class": f"fixed:{k}",
                    "value": val,
                    "runtime_ms": round(1e3 * (time.perf_counter() - t0), 3),
                },
            )
        )
    t0 = time.perf_counter()
    with np.errstate(all="ignore"):
        import warnings as _w

        with _w.catch_warnings():
            _w.simplefilter("ignore")
            out = adaptive_test(data, f0, config.delta, config.k_max)
    rows.append(
        dict(
            base,
            **{
                "class": f"adaptive:{config.k_max}",
                "value": int(out.reject),
                "runtime_ms": round(1e3 * (time.perf_counter() - t0), 3),
            },
        )
    )
    return rows


def run_experiment(
    kind: str,
    config: ExperimentConfig | None = None,
    reps: int = 100,
    parallelism: int = 1,
    master_seed: int = 0,
) -> SimReport:
    """Monte Carlo sweep over the configured grid; deterministic for a
    given (kind, config, reps, master_seed) at any parallelism level."""
    config = config or ExperimentConfig()
    if kind == "power":
        tasks = [
            (config, family, mu, n, rep, master_seed)
            for family in config.families
            for mu in config.mu_grid
            for n in config.n_grid
            for rep in range(reps)
        ]
        worker = _power_cell
    elif kind == "coverage":
        tasks = [
            (config, family, n, rep, master_seed)
            for family in config.families
            for n in config.coverage_n_grid
            for rep in range(reps)
        ]
        worker = _coverage_cell
    elif kind == "adaptive":
        tasks = [
            (config, dq, n, rep, master_seed)
            for dq in config.delta_q_grid
            for n in config.adaptive_n_grid
            for rep in range(reps)
        ]
        worker = _adaptive_cell
    else:
        raise ValueError(f"unknown experiment kind: {kind!r}")

    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            chunks = list(pool.map(worker, tasks, chunksize=8))
    else:
        chunks = [worker(t) for t in tasks]
    rows = tuple(row for chunk in chunks for row in chunk)
    return SimReport(kind=kind, rows=rows)
