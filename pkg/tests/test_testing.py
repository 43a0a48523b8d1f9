"""Domination tests: reduction integrity, adaptivity, and diagnostics."""
import numpy as np
import pytest

from tradeoff_audit import (
    GaussianShift,
    HalfLines,
    IntervalUnion,
    MarginError,
    SampleData,
    SeparationSpec,
    TestConfig,
    TvTolerant,
    adaptive_test,
    check_separation,
    general_test,
    grid_pieces,
    local_modulus,
    make_margins,
    mlr_test,
    sufficient_gap_check,
)
from tradeoff_audit.margins import GUARD
from tradeoff_audit.testing import direct_scan_test

from _util import random_benchmark, random_real_data


def _seeded_pair(n, mu, seed):
    rng = np.random.default_rng(seed)
    return SampleData.from_samples(
        rng.standard_normal(n), rng.standard_normal(n) + mu
    )


# ---------------------------------------------------------------------------
# reduction integrity
# ---------------------------------------------------------------------------


def test_general_matches_direct_scan_quick():
    # small version of the full equivalence sweep in the acceptance suite
    rng = np.random.default_rng(99)
    classes = [HalfLines(), IntervalUnion(1), IntervalUnion(2)]
    for i in range(60):
        data = random_real_data(rng, 8)
        config = TestConfig(
            f0=random_benchmark(rng),
            witness_class=classes[i % len(classes)],
            delta=float(rng.uniform(0.01, 0.2)),
            margin_kind="dkw" if i % 4 == 0 else "normalized",
            tau_override=float(rng.uniform(0.01, 0.5)),
        )
        assert general_test(data, config).reject == direct_scan_test(data, config)


def test_rejection_certificate_is_self_consistent():
    # a pair far below the hinge benchmark must reject, and the returned
    # witness must reproduce the reported slack at the rejecting piece
    data = SampleData.from_counts([1000, 1000, 0, 0], [0, 0, 1000, 1000])
    from tradeoff_audit import FiniteAlphabet

    config = TestConfig(
        f0=TvTolerant(0.05), witness_class=FiniteAlphabet(4), delta=0.05
    )
    out = general_test(data, config)
    assert out.reject and out.witness is not None
    pieces = grid_pieces(config.f0, out.margins)
    k = out.piece_index
    assert 1 <= k <= data.n
    mask = out.witness.member_mask(data.ncells)
    a = int(data.cx[mask].sum())
    b = data.n - int(data.cy[mask].sum())
    lam = float(pieces.lambdas[k - 1])
    value = (b - lam * a) / data.n
    assert out.slack == pytest.approx(
        float(pieces.intercepts[k - 1]) - value, abs=1e-12
    )
    assert out.slack > GUARD


def test_no_rejection_on_matching_null():
    data = _seeded_pair(1000, 1.0, seed=0)
    out = mlr_test(data, GaussianShift(1.0), 0.05)
    assert not out.reject
    assert out.witness is None and out.piece_index is None
    assert out.slack <= GUARD


def test_mlr_equals_general_with_dkw_margins():
    for seed in range(4):
        data = _seeded_pair(400, 2.2, seed=seed)
        f0 = GaussianShift(1.0)
        a = mlr_test(data, f0, 0.05)
        b = general_test(
            data,
            TestConfig(
                f0=f0, witness_class=HalfLines(), delta=0.05, margin_kind="dkw"
            ),
        )
        assert a.reject == b.reject
        assert a.slack == pytest.approx(b.slack, abs=1e-12)


def test_mlr_rejects_strong_alternative():
    data = _seeded_pair(2000, 3.0, seed=1)
    out = mlr_test(data, GaussianShift(1.0), 0.05)
    assert out.reject and out.witness is not None


def test_mlr_requires_real_data():
    counts = SampleData.from_counts([2, 1], [1, 2])
    with pytest.raises(ValueError):
        mlr_test(counts, GaussianShift(1.0), 0.05)


# ---------------------------------------------------------------------------
# adaptive cascade
# ---------------------------------------------------------------------------


def test_adaptive_selects_a_level_on_easy_instance():
    rng = np.random.default_rng(3)
    data = SampleData.from_samples(
        rng.standard_normal(500), rng.standard_normal(500) + 6.0
    )
    out = adaptive_test(data, TvTolerant(0.05), 0.05, k_max=3)
    assert out.reject
    assert out.selected_level == 1  # a single interval already witnesses it


def test_adaptive_skips_unconstructible_levels():
    data = _seeded_pair(200, 0.0, seed=5)
    with pytest.warns(UserWarning, match="skipped"):
        out = adaptive_test(data, GaussianShift(1.0), 0.05, k_max=4)
    assert not out.reject


def test_adaptive_all_levels_unconstructible():
    data = _seeded_pair(20, 0.0, seed=5)
    with pytest.raises(MarginError):
        with pytest.warns(UserWarning):
            adaptive_test(data, GaussianShift(1.0), 0.05, k_max=2)


def test_adaptive_validates_k_max():
    data = _seeded_pair(100, 0.0, seed=0)
    with pytest.raises(ValueError):
        adaptive_test(data, GaussianShift(1.0), 0.05, k_max=0)


# ---------------------------------------------------------------------------
# separation diagnostics
# ---------------------------------------------------------------------------


def test_separation_mlr_holds_for_wide_gap():
    # the condition is pointwise, so f1 must start below 1 at alpha = 0;
    # a hinge alternative far under the Gaussian benchmark qualifies
    spec = SeparationSpec(
        f0=GaussianShift(1.0), f1=TvTolerant(0.5), n=100_000, delta=0.05
    )
    report = check_separation(spec, "mlr")
    assert report.holds


def test_separation_fails_for_identical_curves():
    spec = SeparationSpec(
        f0=GaussianShift(1.0), f1=GaussianShift(1.0), n=100_000, delta=0.05
    )
    report = check_separation(spec, "mlr")
    assert not report.holds
    assert report.worst_margin < 0.0


def test_separation_modes_and_validation():
    # hinge vs. hinge with a gap far above 8*sqrt(tau) clears the
    # composed-map condition
    spec = SeparationSpec(
        f0=TvTolerant(0.1),
        f1=TvTolerant(0.5),
        n=200_000,
        delta=0.05,
        eta1=0.0005,
        eta2=0.0005,
    )
    assert check_separation(spec, "general").holds
    assert check_separation(spec, "misspecified").holds
    with pytest.raises(ValueError):
        check_separation(spec, "bogus")
    with pytest.raises(ValueError):
        check_separation(spec, "mlr", grid=50)


def test_separation_holds_for_zero_alternative():
    # the right-hand side of every mode is nonnegative, so the zero curve
    # is always separated
    zero = TvTolerant(1.0)
    spec = SeparationSpec(f0=GaussianShift(1.0), f1=zero, n=2000, delta=0.05)
    for mode in ("mlr", "general", "misspecified"):
        assert check_separation(spec, mode).holds


def test_local_modulus_values():
    f = GaussianShift(1.0)
    assert local_modulus(f, 0.3, 0.0) == 0.0
    with pytest.raises(ValueError):
        local_modulus(f, 0.3, -0.1)
    # identity benchmark 1 - a at a = 0.5, r = 0.01:
    # (0.01 + sqrt(0.005)) + min(sqrt(0.005), 0.5) = 0.1514214
    from tradeoff_audit import EpsDelta

    assert local_modulus(EpsDelta(0.0, 0.0), 0.5, 0.01) == pytest.approx(
        0.01 + 2.0 * np.sqrt(0.005), abs=1e-12
    )


def test_sufficient_gap_check():
    # against the zero alternative a hinge benchmark clears a small C;
    # near its zero crossing the modulus dominates any pointwise gap, so
    # the default C = 8 can only fail there
    zero = TvTolerant(1.0)
    assert sufficient_gap_check(
        TvTolerant(0.1), zero, n=100_000, delta=0.05, vc_dim=2, C=0.2
    ).holds
    assert not sufficient_gap_check(
        TvTolerant(0.1), zero, n=100_000, delta=0.05, vc_dim=2, C=8.0
    ).holds
    same = sufficient_gap_check(
        GaussianShift(1.0), GaussianShift(1.0), n=500_000, delta=0.05, vc_dim=2
    )
    assert not same.holds
    with pytest.raises(ValueError):
        sufficient_gap_check(
            GaussianShift(1.0), GaussianShift(3.0), 1000, 0.05, 2, C=0.0
        )


def test_gap_check_implies_general_separation():
    # one-directional implication: whenever the local-modulus gap check
    # holds, the composed-map separation condition must hold as well
    rng = np.random.default_rng(13)
    zero = TvTolerant(1.0)
    seen_holds = 0
    for _ in range(50):
        f0 = random_benchmark(rng)
        f1 = zero if rng.random() < 0.7 else random_benchmark(rng)
        n = int(rng.choice([10_000, 100_000]))
        C = float(rng.choice([0.2, 2.0, 8.0]))
        report = sufficient_gap_check(f0, f1, n=n, delta=0.05, vc_dim=2, C=C)
        if report.holds:
            seen_holds += 1
            spec = SeparationSpec(f0=f0, f1=f1, n=n, delta=0.05)
            assert check_separation(spec, "general").holds
    assert seen_holds > 0  # the implication must not be vacuously true


# ---------------------------------------------------------------------------
# monotonicity invariants
# ---------------------------------------------------------------------------


def test_larger_class_rejects_at_fixed_tau():
    # at the SAME tau a richer interval class can only find more
    # violations; checked against the definition-level scan
    rng = np.random.default_rng(77)
    found = 0
    for _ in range(80):
        data = random_real_data(rng, 8)
        tau = float(rng.uniform(0.01, 0.5))
        f0 = random_benchmark(rng)
        for k in (1, 2):
            small = TestConfig(
                f0=f0, witness_class=IntervalUnion(k), delta=0.05, tau_override=tau
            )
            if general_test(data, small).reject:
                found += 1
                big = TestConfig(
                    f0=f0,
                    witness_class=IntervalUnion(k + 1),
                    delta=0.05,
                    tau_override=tau,
                )
                assert direct_scan_test(data, big)
    assert found > 0


def test_delta_monotone_rejection():
    # margins shrink as the failure budget grows, so a rejection at a
    # small delta persists at any larger delta
    rng = np.random.default_rng(42)
    found = 0
    for _ in range(25):
        mu = float(rng.uniform(0.0, 4.0))
        data = _seeded_pair(400, mu, seed=int(rng.integers(1 << 30)))
        f0 = GaussianShift(1.0)
        strict = general_test(
            data, TestConfig(f0=f0, witness_class=HalfLines(), delta=0.01)
        )
        if strict.reject:
            found += 1
            loose = general_test(
                data, TestConfig(f0=f0, witness_class=HalfLines(), delta=0.2)
            )
            assert loose.reject
    assert found > 0


def test_tau_override_flows_through_config():
    data = _seeded_pair(30, 0.0, seed=2)
    config = TestConfig(
        f0=GaussianShift(1.0),
        witness_class=HalfLines(),
        delta=0.05,
        tau_override=0.4,
    )
    out = general_test(data, config)
    assert out.margins.tau == 0.4
    with pytest.raises(MarginError):
        general_test(
            data,
            TestConfig(
                f0=GaussianShift(1.0), witness_class=HalfLines(), delta=0.05
            ),
        )
