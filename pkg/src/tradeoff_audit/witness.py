"""Sample data, witness-set classes, and exact weighted ERM.

The tests repeatedly minimize  Qn(S^c) - lambda * Pn(S)  over a class of
candidate witness sets S.  On the real line, empirical probabilities only
change at sample points, so every class is searched over a finite cut
grid: midpoints between consecutive distinct pooled values, with -inf and
+inf sentinels.  All objectives are computed in integer counts (one unit
= 1/n) so that ties are exact.

Three classes are supported:

* ``HalfLines`` — all (-inf, a) and (a, +inf), plus the empty set and the
  whole line; a linear sweep solves the ERM.
* ``IntervalUnion(k)`` — unions of at most k intervals; a dynamic program
  over (cell, intervals used, inside/outside) solves the ERM in O(nk).
* ``FiniteAlphabet(k)`` — all subsets of a k-symbol alphabet; per-symbol
  inclusion solves the ERM in O(k).

Beyond single-lambda ERM, the module exposes the lower convex hull of the
achievable cloud {(Pn(S), Qn(S^c))} — every Lagrangian minimum is
attained at a hull vertex, so the n subproblems of a test can all be
evaluated from a handful of vertices — and the constrained frontier
F(m) = min{Qn(S^c) : Pn(S) <= m/n} needed by confidence bands.
"""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from numba import njit

__all__ = [
    "DataError",
    "ErmError",
    "InstanceTooLarge",
    "SampleData",
    "WitnessClass",
    "HalfLines",
    "IntervalUnion",
    "FiniteAlphabet",
    "WitnessSet",
    "ErmResult",
    "erm",
    "erm_hull",
    "frontier",
    "brute_force_erm",
    "enumerate_sets",
    "load_samples_csv",
    "load_sample_files",
    "load_alphabet_csv",
]

#: a lambda this far above zero is rejected (benchmark slopes are <= 0)
LAMBDA_TOL = 1e-12
#: pooled-size cap for exhaustive interval enumeration
BRUTE_FORCE_MAX_POOLED = 24
BRUTE_FORCE_MAX_SYMBOLS = 20


class DataError(ValueError):
    """Malformed sample input."""


class ErmError(ValueError):
    """Invalid ERM request (e.g. positive lambda, class/data mismatch)."""


class InstanceTooLarge(ValueError):
    """Brute-force oracle refused: instance exceeds enumeration caps."""


@dataclass(frozen=True)
class SampleData:
    """Equal-size samples from P and Q reduced to per-cell counts.

    ``cells`` are the distinct pooled values in increasing order; ``cx``
    and ``cy`` count the P- and Q-sample points in each cell; ``cuts``
    (length ncells+1) are the candidate boundaries: -inf, midpoints
    between consecutive distinct pooled values, +inf.  Alphabet data uses
    symbol indices 0..k-1 as cells with unit-width "cuts".
    """

    n: int
    kind: str  # "real" | "alphabet"
    cells: np.ndarray
    cx: np.ndarray
    cy: np.ndarray
    cuts: np.ndarray
    x_sorted: Optional[np.ndarray] = None
    y_sorted: Optional[np.ndarray] = None

    @property
    def ncells(self) -> int:
        return self.cells.size

    @staticmethod
    def from_samples(x, y) -> "SampleData":
        x = np.sort(np.asarray(x, dtype=float))
        y = np.sort(np.asarray(y, dtype=float))
        if x.ndim != 1 or y.ndim != 1 or x.size == 0:
            raise DataError("need two non-empty 1-d samples")
        if x.size != y.size:
            raise DataError(
                f"equal sample sizes required, got {x.size} and {y.size}"
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("samples must be finite")
        cells = np.unique(np.concatenate([x, y]))
        cx = np.searchsorted(x, cells, side="right") - np.searchsorted(
            x, cells, side="left"
        )
        cy = np.searchsorted(y, cells, side="right") - np.searchsorted(
            y, cells, side="left"
        )
        mids = (cells[:-1] + cells[1:]) / 2.0
        cuts = np.concatenate([[-np.inf], mids, [np.inf]])
        return SampleData(
            n=x.size,
            kind="real",
            cells=cells,
            cx=cx.astype(np.int64),
            cy=cy.astype(np.int64),
            cuts=cuts,
            x_sorted=x,
            y_sorted=y,
        )

    @staticmethod
    def from_counts(p_counts, q_counts) -> "SampleData":
        cp = np.asarray(p_counts, dtype=np.int64)
        cq = np.asarray(q_counts, dtype=np.int64)
        if cp.shape != cq.shape or cp.ndim != 1 or cp.size == 0:
            raise DataError("count vectors must be 1-d, non-empty, same length")
        if np.any(cp < 0) or np.any(cq < 0):
            raise DataError("counts must be nonnegative")
        if cp.sum() != cq.sum() or cp.sum() == 0:
            raise DataError("count vectors must have equal positive totals")
        k = cp.size
        return SampleData(
            n=int(cp.sum()),
            kind="alphabet",
            cells=np.arange(k, dtype=float),
            cx=cp,
            cy=cq,
            cuts=np.arange(k + 1, dtype=float) - 0.5,
        )


class WitnessClass:
    """A searchable family of candidate witness sets."""

    def vc_dim(self) -> int:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class HalfLines(WitnessClass):
    def vc_dim(self) -> int:
        return 2

    def label(self) -> str:
        return "halflines"


@dataclass(frozen=True)
class IntervalUnion(WitnessClass):
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ErmError("IntervalUnion needs k >= 1")

    def vc_dim(self) -> int:
        return 2 * self.k

    def label(self) -> str:
        return f"intervals:{self.k}"


@dataclass(frozen=True)
class FiniteAlphabet(WitnessClass):
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ErmError("FiniteAlphabet needs k >= 1")

    def vc_dim(self) -> int:
        return self.k

    def label(self) -> str:
        return f"alphabet:{self.k}"


@dataclass(frozen=True)
class WitnessSet:
    """A concrete set: disjoint half-open cell-index ranges [i, j).

    For alphabet data the ranges simply enumerate the included symbols.
    ``intervals(data)`` maps ranges to real coordinates via the cut grid.
    """

    cell_ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        last = -1
        for i, j in self.cell_ranges:
            if not (0 <= i < j):
                raise ErmError(f"bad cell range ({i}, {j})")
            if i <= last:
                raise ErmError("cell ranges must be sorted and disjoint")
            last = j

    def intervals(self, data: SampleData) -> list[tuple[float, float]]:
        return [(float(data.cuts[i]), float(data.cuts[j])) for i, j in self.cell_ranges]

    def member_mask(self, ncells: int) -> np.ndarray:
        mask = np.zeros(ncells, dtype=bool)
        for i, j in self.cell_ranges:
            mask[i:j] = True
        return mask


@dataclass(frozen=True)
class ErmResult:
    value: float
    set: WitnessSet
    pn: float
    qn_c: float


def _mask_to_ranges(mask: np.ndarray) -> tuple[tuple[int, int], ...]:
    ranges = []
    i = 0
    m = mask.astype(np.int8)
    while i < m.size:
        if m[i]:
            j = i
            while j < m.size and m[j]:
                j += 1
            ranges.append((i, j))
            i = j
        else:
            i += 1
    return tuple(ranges)


# ---------------------------------------------------------------------------
# interval-union dynamic program (numba-compiled)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _interval_dp(w, pts, kmax):  # pragma: no cover - exercised via wrapper
    """Max-weight union of <= kmax cell blocks; ties broken to fewer points.

    Returns (best value, best tie-break point count, coverage mask).
    Weights are float64 but exact for the integer-valued inputs used by
    the hull search (products stay far below 2**53).
    """
    ncells = w.shape[0]
    NEG = -1e30
    in_v = np.full(kmax + 1, NEG)
    in_p = np.zeros(kmax + 1, dtype=np.int64)
    out_v = np.full(kmax + 1, NEG)
    out_p = np.zeros(kmax + 1, dtype=np.int64)
    out_v[0] = 0.0
    choice_in = np.zeros((ncells, kmax + 1), dtype=np.uint8)
    choice_out = np.zeros((ncells, kmax + 1), dtype=np.uint8)
    for j in range(ncells):
        for s in range(kmax, 0, -1):
            v1, p1 = in_v[s], in_p[s]  # extend the open block
            v2, p2 = out_v[s - 1], out_p[s - 1]  # open a new block here
            if v2 > v1 or (v2 == v1 and p2 < p1):
                in_v[s] = v2 + w[j]
                in_p[s] = p2 + pts[j]
                choice_in[j, s] = 1
            else:
                in_v[s] = v1 + w[j]
                in_p[s] = p1 + pts[j]
            if in_v[s] > out_v[s] or (in_v[s] == out_v[s] and in_p[s] < out_p[s]):
                out_v[s] = in_v[s]
                out_p[s] = in_p[s]
                choice_out[j, s] = 1
    best_s = 0
    best_v = out_v[0]
    best_p = out_p[0]
    for s in range(1, kmax + 1):
        if out_v[s] > best_v or (out_v[s] == best_v and out_p[s] < best_p):
            best_s = s
            best_v = out_v[s]
            best_p = out_p[s]
    # backward reconstruction
    mask = np.zeros(ncells, dtype=np.uint8)
    s = best_s
    j = ncells - 1
    phase_out = True
    while j >= 0 and s > 0:
        if phase_out:
            if choice_out[j, s] == 1:
                phase_out = False
            else:
                j -= 1
        else:
            mask[j] = 1
            if choice_in[j, s] == 1:
                s -= 1
                phase_out = True
            j -= 1
    return best_v, best_p, mask


@njit(cache=True)
def _interval_frontier_dp(cx, cy, kmax, n):  # pragma: no cover
    """best_y[x] = max Q-points coverable by <= kmax blocks using <= x X-points."""
    ncells = cx.shape[0]
    NEG = np.int64(-(10**15))
    dp_out = np.full((kmax + 1, n + 1), NEG, dtype=np.int64)
    dp_in = np.full((kmax + 1, n + 1), NEG, dtype=np.int64)
    for s in range(kmax + 1):
        dp_out[s, 0] = 0
    for j in range(ncells):
        a = cx[j]
        b = cy[j]
        for s in range(kmax, 0, -1):
            for x in range(n, a - 1, -1):
                prev = dp_in[s, x - a]
                alt = dp_out[s - 1, x - a]
                if alt > prev:
                    prev = alt
                if prev > NEG:
                    v = prev + b
                    dp_in[s, x] = v
                    if v > dp_out[s, x]:
                        dp_out[s, x] = v
                else:
                    dp_in[s, x] = NEG
            for x in range(min(a, n + 1) - 1, -1, -1):
                dp_in[s, x] = NEG
    best = np.zeros(n + 1, dtype=np.int64)
    for x in range(n + 1):
        m = np.int64(0)
        for s in range(kmax + 1):
            if dp_out[s, x] > m:
                m = dp_out[s, x]
        best[x] = m
    # enforce "at most x" by a running maximum
    for x in range(1, n + 1):
        if best[x - 1] > best[x]:
            best[x] = best[x - 1]
    return best


# ---------------------------------------------------------------------------
# per-class candidate clouds and single-lambda ERM
# ---------------------------------------------------------------------------


def _halfline_candidates(data: SampleData):
    """Integer (a, b, pts, tag, idx): Pn*n, Qn(S^c)*n and tie-break info.

    Prefixes (-inf, cut_i) come first, then suffixes (cut_i, +inf);
    i = 0 gives the empty set, i = ncells the whole line.
    """
    cumx = np.concatenate([[0], np.cumsum(data.cx)])
    cumy = np.concatenate([[0], np.cumsum(data.cy)])
    n = data.n
    a = np.concatenate([cumx, n - cumx])
    b = np.concatenate([n - cumy, cumy])
    pts = np.concatenate([cumx + cumy, (n - cumx) + (n - cumy)])
    tag = np.concatenate(
        [np.zeros(cumx.size, dtype=np.int64), np.ones(cumx.size, dtype=np.int64)]
    )
    idx = np.concatenate([np.arange(cumx.size), np.arange(cumx.size)])
    return a, b, pts, tag, idx


def _halfline_witness(data: SampleData, tag: int, i: int) -> WitnessSet:
    if tag == 0:
        return WitnessSet(cell_ranges=(((0, i),) if i > 0 else ()))
    return WitnessSet(
        cell_ranges=(((i, data.ncells),) if i < data.ncells else ())
    )


def _check_request(wclass: WitnessClass, data: SampleData, lam: float) -> None:
    if lam > LAMBDA_TOL:
        raise ErmError(f"lambda must be <= 0, got {lam}")
    if isinstance(wclass, FiniteAlphabet):
        if data.kind != "alphabet":
            raise ErmError("FiniteAlphabet requires alphabet-count data")
        if data.ncells != wclass.k:
            raise ErmError("alphabet size does not match the data")
    elif data.kind != "real":
        raise ErmError(f"{wclass.label()} requires real-line data")


def erm(wclass: WitnessClass, data: SampleData, lam: float) -> ErmResult:
    """Exact minimizer of Qn(S^c) - lambda * Pn(S) over the class.

    Tie-breaking: fewer sample points in S, then the deterministic scan
    order of the underlying sweep/DP.
    """
    _check_request(wclass, data, lam)
    lam = min(lam, 0.0)
    n = data.n
    if isinstance(wclass, HalfLines):
        a, b, pts, tag, idx = _halfline_candidates(data)
        obj = b - lam * a  # n * objective, exact for integer counts
        order = np.lexsort((idx, tag, pts, obj))
        j = order[0]
        return ErmResult(
            value=float(obj[j]) / n,
            set=_halfline_witness(data, int(tag[j]), int(idx[j])),
            pn=float(a[j]) / n,
            qn_c=float(b[j]) / n,
        )
    if isinstance(wclass, FiniteAlphabet):
        include = data.cy + lam * data.cx > 0
        mask = np.asarray(include, dtype=bool)
        a = int(data.cx[mask].sum())
        b = n - int(data.cy[mask].sum())
        return ErmResult(
            value=(b - lam * a) / n,
            set=WitnessSet(cell_ranges=_mask_to_ranges(mask)),
            pn=a / n,
            qn_c=b / n,
        )
    # interval union: maximize sum of (cy + lam*cx) over <= k blocks
    w = data.cy + lam * data.cx
    pts = data.cx + data.cy
    _, _, mask8 = _interval_dp(
        w.astype(np.float64), pts.astype(np.int64), wclass.k
    )
    mask = mask8.astype(bool)
    a = int(data.cx[mask].sum())
    b = n - int(data.cy[mask].sum())
    return ErmResult(
        value=(b - lam * a) / n,
        set=WitnessSet(cell_ranges=_mask_to_ranges(mask)),
        pn=a / n,
        qn_c=b / n,
    )


# ---------------------------------------------------------------------------
# lower convex hull of the achievable cloud
# ---------------------------------------------------------------------------


def _chain_hull(points: np.ndarray) -> np.ndarray:
    """Lower-left hull of integer (a, b) points, sorted by a then b."""
    pts = points[np.lexsort((points[:, 1], points[:, 0]))]
    hull: list[np.ndarray] = []
    for p in pts:
        if hull and p[0] == hull[-1][0]:
            continue  # same a: the sort already placed the lower b first
        while len(hull) >= 2:
            o, q = hull[-2], hull[-1]
            cross = (q[0] - o[0]) * (p[1] - o[1]) - (q[1] - o[1]) * (p[0] - o[0])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return np.asarray(hull, dtype=np.int64)


def _interval_hull(data: SampleData, kmax: int) -> np.ndarray:
    """Exact hull via Lagrangian bisection with integer slope probes.

    Each probe minimizes den*b - num*a (integers) with one O(n*kmax) DP;
    a probe strictly below the current chord is a new vertex.  The number
    of probes is O(#vertices).
    """
    n = data.n
    cx = data.cx
    cy = data.cy
    pts = (cx + cy).astype(np.int64)

    def probe(num: int, den: int) -> tuple[int, int]:
        w = (den * cy + num * cx).astype(np.float64)
        _, _, mask8 = _interval_dp(w, pts, kmax)
        mask = mask8.astype(bool)
        return int(cx[mask].sum()), int(n - cy[mask].sum())

    # extremes: lambda -> -inf (empty-ish: no X affordable) and lambda = 0
    big = 2 * n + 1
    left = probe(-big, 1)
    right = probe(0, 1)
    verts = {left, right}
    stack = [(left, right)]
    while stack:
        (a1, b1), (a2, b2) = stack.pop()
        if a2 - a1 <= 0:
            continue
        num = b2 - b1
        den = a2 - a1
        a, b = probe(num, den)
        # strictly below the chord through the two endpoints?
        if den * b - num * a < den * b1 - num * a1 and (a, b) not in verts:
            verts.add((a, b))
            stack.append(((a1, b1), (a, b)))
            stack.append(((a, b), (a2, b2)))
    arr = np.array(sorted(verts), dtype=np.int64)
    return _chain_hull(arr)


def erm_hull(wclass: WitnessClass, data: SampleData) -> np.ndarray:
    """Vertices (integer counts n*Pn, n*Qn(S^c)) of the achievable cloud's
    lower convex hull.  Every Lagrangian ERM minimum is attained here."""
    _check_request(wclass, data, 0.0)
    if isinstance(wclass, HalfLines):
        a, b, _, _, _ = _halfline_candidates(data)
        return _chain_hull(np.column_stack([a, b]).astype(np.int64))
    if isinstance(wclass, FiniteAlphabet):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(
                data.cx > 0, data.cy / np.maximum(data.cx, 1), np.inf
            )
        ratio = np.where((data.cx == 0) & (data.cy == 0), -1.0, ratio)
        order = np.argsort(-ratio, kind="stable")
        cp = np.concatenate([[0], np.cumsum(data.cx[order])])
        cq = np.concatenate([[0], np.cumsum(data.cy[order])])
        pts = np.column_stack([cp, data.n - cq]).astype(np.int64)
        return _chain_hull(pts)
    return _interval_hull(data, wclass.k)


# ---------------------------------------------------------------------------
# constrained frontier
# ---------------------------------------------------------------------------


def frontier(wclass: WitnessClass, data: SampleData) -> np.ndarray:
    """F(m) = min{Qn(S^c) : S in class, Pn(S) <= m/n}, for m = 0..n.

    Non-increasing, with F(n) = 0 since the whole space is in each class.
    """
    _check_request(wclass, data, 0.0)
    n = data.n
    if isinstance(wclass, HalfLines):
        a, b, _, _, _ = _halfline_candidates(data)
        order = np.argsort(a, kind="stable")
        amin = a[order]
        bmin = np.minimum.accumulate(b[order])
        pos = np.searchsorted(amin, np.arange(n + 1), side="right") - 1
        return bmin[pos] / n
    if isinstance(wclass, FiniteAlphabet):
        NEG = -(10**15)
        dp = np.full(n + 1, NEG, dtype=np.int64)
        dp[0] = 0
        for cp, cq in zip(data.cx.tolist(), data.cy.tolist()):
            if cp == 0:
                dp[dp > NEG] += cq
                continue
            shifted = np.full(n + 1, NEG, dtype=np.int64)
            shifted[cp:] = dp[: n + 1 - cp] + cq
            dp = np.maximum(dp, shifted)
        best = np.maximum.accumulate(np.maximum(dp, 0))
        return (n - best) / n
    best = _interval_frontier_dp(
        data.cx.astype(np.int64), data.cy.astype(np.int64), wclass.k, n
    )
    return (n - best) / n


# ---------------------------------------------------------------------------
# exhaustive oracle
# ---------------------------------------------------------------------------


def enumerate_sets(
    wclass: WitnessClass, data: SampleData
) -> Iterator[tuple[int, int, WitnessSet]]:
    """Yield (n*Pn(S), n*Qn(S^c), S) for every realizable set in the class."""
    n = data.n
    ncells = data.ncells
    if isinstance(wclass, HalfLines):
        a, b, _, tag, idx = _halfline_candidates(data)
        for j in range(a.size):
            yield int(a[j]), int(b[j]), _halfline_witness(
                data, int(tag[j]), int(idx[j])
            )
        return
    if isinstance(wclass, FiniteAlphabet):
        if wclass.k > BRUTE_FORCE_MAX_SYMBOLS:
            raise InstanceTooLarge(f"alphabet size {wclass.k} > 20")
        for bits in itertools.product((0, 1), repeat=wclass.k):
            mask = np.array(bits, dtype=bool)
            yield int(data.cx[mask].sum()), int(
                n - data.cy[mask].sum()
            ), WitnessSet(cell_ranges=_mask_to_ranges(mask))
        return
    if 2 * n > BRUTE_FORCE_MAX_POOLED:
        raise InstanceTooLarge(f"pooled size {2 * n} > {BRUTE_FORCE_MAX_POOLED}")
    cumx = np.concatenate([[0], np.cumsum(data.cx)])
    cumy = np.concatenate([[0], np.cumsum(data.cy)])
    for r in range(wclass.k + 1):
        for bounds in itertools.combinations(range(ncells + 1), 2 * r):
            ranges = tuple(
                (bounds[2 * t], bounds[2 * t + 1]) for t in range(r)
            )
            a = sum(int(cumx[j] - cumx[i]) for i, j in ranges)
            b = n - sum(int(cumy[j] - cumy[i]) for i, j in ranges)
            yield a, b, WitnessSet(cell_ranges=ranges)


def brute_force_erm(wclass: WitnessClass, data: SampleData, lam: float) -> ErmResult:
    """Exhaustive-enumeration ERM; the ground truth for small instances."""
    _check_request(wclass, data, lam)
    lam = min(lam, 0.0)
    n = data.n
    best = None
    for a, b, ws in enumerate_sets(wclass, data):
        key = (b - lam * a, sum(j - i for i, j in ws.cell_ranges))
        if best is None or key < best[0]:
            best = (key, a, b, ws)
    assert best is not None
    (_, _), a, b, ws = best[0], best[1], best[2], best[3]
    return ErmResult(value=(b - lam * a) / n, set=ws, pn=a / n, qn_c=b / n)


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def load_samples_csv(path) -> SampleData:
    """Two-column CSV ``value,source`` with source in {P, Q}."""
    xs: list[float] = []
    ys: list[float] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != [
            "value",
            "source",
        ]:
            raise DataError(f"{path}: expected header 'value,source'")
        for row in reader:
            if not row:
                continue
            try:
                v = float(row[0])
            except ValueError as exc:
                raise DataError(f"{path}: bad value {row[0]!r}") from exc
            src = row[1].strip().upper()
            if src == "P":
                xs.append(v)
            elif src == "Q":
                ys.append(v)
            else:
                raise DataError(f"{path}: bad source {row[1]!r}")
    return SampleData.from_samples(xs, ys)


def load_sample_files(x_path, y_path) -> SampleData:
    """Two newline-delimited numeric files, one per distribution."""

    def read(path):
        try:
            return np.loadtxt(path, dtype=float, ndmin=1)
        except ValueError as exc:
            raise DataError(f"{path}: not a numeric file") from exc

    return SampleData.from_samples(read(x_path), read(y_path))


def load_alphabet_csv(path) -> SampleData:
    """CSV ``symbol,count_p,count_q``; symbols are kept in file order."""
    cps: list[int] = []
    cqs: list[int] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:3]] != [
            "symbol",
            "count_p",
            "count_q",
        ]:
            raise DataError(f"{path}: expected header 'symbol,count_p,count_q'")
        for row in reader:
            if not row:
                continue
            try:
                cps.append(int(row[1]))
                cqs.append(int(row[2]))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}: bad count row {row!r}") from exc
    return SampleData.from_counts(cps, cqs)
