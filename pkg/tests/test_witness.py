"""Sample handling, exact ERM, hull, frontier, and the exhaustive oracle."""
import numpy as np
import pytest

from tradeoff_audit import (
    FiniteAlphabet,
    HalfLines,
    IntervalUnion,
    SampleData,
    WitnessSet,
    brute_force_erm,
    erm,
    erm_hull,
    frontier,
)
from tradeoff_audit.witness import (
    DataError,
    ErmError,
    InstanceTooLarge,
    enumerate_sets,
    load_alphabet_csv,
    load_sample_files,
    load_samples_csv,
)

from _util import random_alphabet_data, random_real_data


# ---------------------------------------------------------------------------
# sample data
# ---------------------------------------------------------------------------


def test_from_samples_counts_and_cuts():
    data = SampleData.from_samples([1.0, 2.0, 2.0], [3.0, 3.0, 4.0])
    assert data.n == 3 and data.kind == "real"
    np.testing.assert_allclose(data.cells, [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(data.cx, [1, 2, 0, 0])
    np.testing.assert_array_equal(data.cy, [0, 0, 2, 1])
    np.testing.assert_allclose(data.cuts[1:-1], [1.5, 2.5, 3.5])
    assert data.cuts[0] == -np.inf and data.cuts[-1] == np.inf


def test_from_samples_validation():
    with pytest.raises(DataError):
        SampleData.from_samples([1.0, 2.0], [1.0])
    with pytest.raises(DataError):
        SampleData.from_samples([], [])
    with pytest.raises(DataError):
        SampleData.from_samples([1.0, np.inf], [0.0, 1.0])


def test_from_counts_validation():
    data = SampleData.from_counts([2, 1], [0, 3])
    assert data.n == 3 and data.kind == "alphabet"
    with pytest.raises(DataError):
        SampleData.from_counts([1, 2], [2, 2])
    with pytest.raises(DataError):
        SampleData.from_counts([0, 0], [0, 0])
    with pytest.raises(DataError):
        SampleData.from_counts([-1, 4], [2, 1])


def test_witness_set_validation_and_geometry():
    data = SampleData.from_samples([1.0, 2.0, 2.0], [3.0, 3.0, 4.0])
    ws = WitnessSet(cell_ranges=((0, 2), (3, 4)))
    assert ws.intervals(data) == [(-np.inf, 2.5), (3.5, np.inf)]
    np.testing.assert_array_equal(
        ws.member_mask(4), [True, True, False, True]
    )
    with pytest.raises(ErmError):
        WitnessSet(cell_ranges=((2, 2),))
    with pytest.raises(ErmError):
        WitnessSet(cell_ranges=((0, 2), (1, 3)))


# ---------------------------------------------------------------------------
# ERM: hand cases and the brute-force oracle
# ---------------------------------------------------------------------------


def test_erm_extreme_lambda_prefers_empty_set():
    # Y is bracketed by X, so no half-line can hold Y without an X point;
    # at a very negative lambda the minimizer is the empty set, value 1
    data = SampleData.from_samples([0.0, 10.0], [3.0, 4.0])
    res = erm(HalfLines(), data, -1e6)
    assert res.value == 1.0
    assert res.set.cell_ranges == ()
    assert res.pn == 0.0 and res.qn_c == 1.0


def test_erm_lambda_zero_minimizes_type_two():
    data = SampleData.from_samples([0.0, 10.0], [3.0, 4.0])
    res = erm(HalfLines(), data, 0.0)
    assert res.value == 0.0 and res.qn_c == 0.0
    # tie-break: fewest sample points, so the prefix covering Y wins
    assert res.set.cell_ranges == ((0, 3),)


def test_erm_request_validation():
    data = SampleData.from_samples([0.0, 1.0], [2.0, 3.0])
    counts = SampleData.from_counts([1, 1], [1, 1])
    with pytest.raises(ErmError):
        erm(HalfLines(), data, 0.5)
    with pytest.raises(ErmError):
        erm(FiniteAlphabet(2), data, -1.0)
    with pytest.raises(ErmError):
        erm(HalfLines(), counts, -1.0)
    with pytest.raises(ErmError):
        erm(FiniteAlphabet(3), counts, -1.0)
    with pytest.raises(ErmError):
        IntervalUnion(0)


def _witness_value(data, ws, lam):
    mask = ws.member_mask(data.ncells)
    a = int(data.cx[mask].sum())
    b = data.n - int(data.cy[mask].sum())
    return (b - lam * a) / data.n


@pytest.mark.parametrize(
    "wclass",
    [HalfLines(), IntervalUnion(1), IntervalUnion(2), IntervalUnion(3)],
    ids=lambda c: c.label(),
)
def test_erm_matches_brute_force_real(wclass):
    rng = np.random.default_rng(2024)
    for _ in range(40):
        data = random_real_data(rng, 9)
        for lam in (0.0, -0.25, -1.0, -4.0, float(-rng.uniform(0.0, 8.0))):
            fast = erm(wclass, data, lam)
            slow = brute_force_erm(wclass, data, lam)
            assert fast.value == slow.value
            # the returned witness must itself achieve the value
            assert _witness_value(data, fast.set, lam) == fast.value
            if isinstance(wclass, IntervalUnion):
                assert len(fast.set.cell_ranges) <= wclass.k


def test_erm_matches_brute_force_alphabet():
    rng = np.random.default_rng(5)
    for _ in range(30):
        k = int(rng.integers(2, 8))
        data = random_alphabet_data(rng, k, int(rng.integers(4, 30)))
        for lam in (0.0, -0.5, -2.0):
            fast = erm(FiniteAlphabet(k), data, lam)
            slow = brute_force_erm(FiniteAlphabet(k), data, lam)
            assert fast.value == slow.value
            assert _witness_value(data, fast.set, lam) == fast.value


# ---------------------------------------------------------------------------
# hull and frontier
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "wclass",
    [HalfLines(), IntervalUnion(1), IntervalUnion(2), IntervalUnion(3)],
    ids=lambda c: c.label(),
)
def test_hull_supports_all_lagrangian_minima(wclass):
    rng = np.random.default_rng(17)
    for _ in range(25):
        data = random_real_data(rng, 10)
        verts = erm_hull(wclass, data)
        a, b = verts[:, 0], verts[:, 1]
        assert np.all(np.diff(a) > 0)
        # a trailing horizontal edge is possible when several vertex sets
        # share the minimal type-II count
        assert np.all(np.diff(b) <= 0) or verts.shape[0] == 1
        for lam in np.linspace(-6.0, 0.0, 13):
            hull_min = float(np.min(b - lam * a)) / data.n
            assert hull_min == pytest.approx(
                brute_force_erm(wclass, data, float(lam)).value, abs=1e-12
            )


def test_hull_alphabet():
    rng = np.random.default_rng(23)
    for _ in range(15):
        k = int(rng.integers(2, 7))
        data = random_alphabet_data(rng, k, int(rng.integers(4, 24)))
        verts = erm_hull(FiniteAlphabet(k), data)
        a, b = verts[:, 0], verts[:, 1]
        for lam in np.linspace(-5.0, 0.0, 11):
            hull_min = float(np.min(b - lam * a)) / data.n
            assert hull_min == pytest.approx(
                brute_force_erm(FiniteAlphabet(k), data, float(lam)).value,
                abs=1e-12,
            )


def _brute_frontier(wclass, data):
    n = data.n
    best = np.full(n + 1, n, dtype=np.int64)
    for a, b, _ in enumerate_sets(wclass, data):
        for m in range(a, n + 1):
            best[m] = min(best[m], b)
    return best / n


@pytest.mark.parametrize(
    "wclass",
    [HalfLines(), IntervalUnion(1), IntervalUnion(2), FiniteAlphabet(5)],
    ids=lambda c: c.label(),
)
def test_frontier_matches_enumeration(wclass):
    rng = np.random.default_rng(31)
    for _ in range(15):
        if isinstance(wclass, FiniteAlphabet):
            data = random_alphabet_data(rng, wclass.k, int(rng.integers(4, 20)))
        else:
            data = random_real_data(rng, 9)
        f = frontier(wclass, data)
        np.testing.assert_allclose(f, _brute_frontier(wclass, data), atol=1e-12)
        assert np.all(np.diff(f) <= 0.0)
        assert f[-1] == 0.0


def test_frontier_class_nesting():
    rng = np.random.default_rng(41)
    for _ in range(10):
        data = random_real_data(rng, 10)
        f_half = frontier(HalfLines(), data)
        f1 = frontier(IntervalUnion(1), data)
        f2 = frontier(IntervalUnion(2), data)
        # half-lines are single intervals; richer classes only improve
        assert np.all(f1 <= f_half + 1e-12)
        assert np.all(f2 <= f1 + 1e-12)


def test_enumeration_caps():
    x = np.arange(13, dtype=float)
    y = np.arange(13, dtype=float) + 0.5
    data = SampleData.from_samples(x, y)
    with pytest.raises(InstanceTooLarge):
        list(enumerate_sets(IntervalUnion(2), data))
    counts = SampleData.from_counts([1] * 21, [1] * 21)
    with pytest.raises(InstanceTooLarge):
        list(enumerate_sets(FiniteAlphabet(21), counts))


# ---------------------------------------------------------------------------
# loaders
# ---------------------------------------------------------------------------


def test_load_samples_csv_round_trip(tmp_path):
    path = tmp_path / "samples.csv"
    path.write_text("value,source\n1.0,P\n2.5,Q\n2.0,P\n0.5,Q\n")
    data = load_samples_csv(path)
    assert data.n == 2
    np.testing.assert_allclose(data.x_sorted, [1.0, 2.0])
    np.testing.assert_allclose(data.y_sorted, [0.5, 2.5])


def test_load_samples_csv_errors(tmp_path):
    bad_header = tmp_path / "a.csv"
    bad_header.write_text("val,src\n1.0,P\n")
    with pytest.raises(DataError):
        load_samples_csv(bad_header)
    bad_value = tmp_path / "b.csv"
    bad_value.write_text("value,source\nxyz,P\n")
    with pytest.raises(DataError):
        load_samples_csv(bad_value)
    bad_source = tmp_path / "c.csv"
    bad_source.write_text("value,source\n1.0,Z\n")
    with pytest.raises(DataError):
        load_samples_csv(bad_source)


def test_load_sample_files(tmp_path):
    xp = tmp_path / "x.txt"
    yp = tmp_path / "y.txt"
    np.savetxt(xp, [0.0, 1.0, 2.0])
    np.savetxt(yp, [0.5, 1.5, 2.5])
    data = load_sample_files(xp, yp)
    assert data.n == 3
    bad = tmp_path / "bad.txt"
    bad.write_text("not a number\n")
    with pytest.raises(DataError):
        load_sample_files(xp, bad)


def test_load_alphabet_csv(tmp_path):
    path = tmp_path / "counts.csv"
    path.write_text("symbol,count_p,count_q\na,3,1\nb,1,3\n")
    data = load_alphabet_csv(path)
    assert data.kind == "alphabet" and data.n == 4
    np.testing.assert_array_equal(data.cx, [3, 1])
    bad = tmp_path / "bad.csv"
    bad.write_text("symbol,count_p,count_q\na,3\n")
    with pytest.raises(DataError):
        load_alphabet_csv(bad)
