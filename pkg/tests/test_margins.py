"""Margin schedules, confidence maps, and the surrogate grid pieces."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tradeoff_audit import (
    GaussianShift,
    MarginError,
    TvTolerant,
    dkw_margins,
    grid_pieces,
    h_minus,
    h_plus,
    h_plus_inv,
    make_margins,
    surrogate_eval,
    variance_proxy,
)
from tradeoff_audit.witness import LAMBDA_TOL

from _util import random_benchmark


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------


def test_eta_frozen_value():
    m = make_margins(100, 0.05, 2, tau=0.1)
    assert m.eta == pytest.approx(0.14802071873007983, abs=1e-15)
    assert dkw_margins(100, 0.05).eta == pytest.approx(m.eta, abs=1e-15)


def test_tau_frozen_value():
    m = make_margins(1000, 0.05, 2)
    assert m.tau == pytest.approx(0.08665309238175152, abs=1e-15)


def test_dkw_margins_have_no_tau():
    m = dkw_margins(500, 0.1)
    assert m.tau is None
    assert m.vc_dim == 2


def test_tau_override_respected():
    m = make_margins(50, 0.05, 8, tau=0.3)
    assert m.tau == 0.3
    # the standard schedule would not be constructible here
    with pytest.raises(MarginError):
        make_margins(50, 0.05, 8)


def test_margin_validation():
    with pytest.raises(MarginError):
        make_margins(0, 0.05, 2)
    with pytest.raises(MarginError):
        make_margins(100, 0.0, 2)
    with pytest.raises(MarginError):
        make_margins(100, 1.0, 2)
    with pytest.raises(MarginError):
        make_margins(100, 0.05, 0)
    with pytest.raises(MarginError):
        make_margins(100, 0.05, 2, tau=0.6)
    with pytest.raises(MarginError):
        dkw_margins(0, 0.05)


# ---------------------------------------------------------------------------
# confidence maps
# ---------------------------------------------------------------------------


def test_variance_proxy_values():
    assert variance_proxy(0.0) == 0.0
    assert variance_proxy(0.25) == 0.25
    assert variance_proxy(0.75) == 0.25
    assert variance_proxy(1.0) == 0.0
    np.testing.assert_allclose(variance_proxy(np.array([0.1, 0.9])), [0.1, 0.1])


def test_h_maps_hand_values():
    # V(0.25) = 0.25, sqrt(0.04 * 0.25) = 0.1
    assert h_plus(0.25, 0.04) == pytest.approx(0.39, abs=1e-15)
    assert h_minus(0.25, 0.04) == pytest.approx(0.11, abs=1e-15)
    assert h_plus(0.0, 0.04) == 0.04
    assert h_plus(1.0, 0.04) == 1.0
    # deliberately unclamped below zero
    assert h_minus(0.0, 0.04) == -0.04


def test_h_plus_inv_hand_values():
    assert h_plus_inv(0.02, 0.04) == 0.0  # t <= tau
    assert h_plus_inv(0.04, 0.04) == 0.0
    assert h_plus_inv(0.39, 0.04) == pytest.approx(0.25, abs=1e-12)
    # at t = 1 the inverse is where the upper map first saturates, not 1
    s1 = h_plus_inv(1.0, 0.04)
    assert s1 < 1.0
    assert h_plus(s1, 0.04) == pytest.approx(1.0, abs=1e-12)


_tau = st.floats(0.001, 0.5, allow_nan=False)
_unit = st.floats(0.0, 1.0, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(_unit, _unit, _tau)
def test_h_plus_inv_exact_equivalence(s, t, tau):
    # the defining property of the generalized inverse, bit-for-bit
    assert (h_plus(s, tau) < t) == (s < h_plus_inv(t, tau))


@settings(max_examples=100, deadline=None)
@given(_unit, _tau)
def test_h_plus_inv_round_trips(t, tau):
    inv = h_plus_inv(t, tau)
    assert h_plus_inv(h_plus(t, tau), tau) <= t + 1e-9
    if inv > 0.0:
        assert h_plus(inv, tau) >= t - 1e-9


@pytest.mark.parametrize("tau", [0.001, 0.04, 0.25, 0.5])
def test_maps_monotone(tau):
    t = np.linspace(0.0, 1.0, 2001)
    assert np.all(np.diff(h_plus(t, tau)) >= 0.0)
    assert np.all(np.diff(h_plus_inv(t, tau)) >= 0.0)
    inv = h_plus_inv(t, tau)
    assert np.all(inv >= 0.0) and np.all(inv <= 1.0)


# ---------------------------------------------------------------------------
# surrogate benchmark and grid pieces
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("tau", [0.01, 0.08, 0.3])
def test_surrogate_convex_nonincreasing(tau):
    rng = np.random.default_rng(7)
    t = np.linspace(0.0, 1.0, 501)
    for _ in range(10):
        f0 = random_benchmark(rng)
        vals = surrogate_eval(f0, tau, t)
        assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
        assert np.all(np.diff(vals) <= 1e-12)
        d2 = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
        assert np.min(d2) > -1e-9


def test_grid_pieces_identity_and_slopes():
    rng = np.random.default_rng(11)
    for n in (13, 100, 997):
        f0 = random_benchmark(rng)
        margins = make_margins(n, 0.05, 2, tau=0.12)
        pieces = grid_pieces(f0, margins)
        assert pieces.n == n
        k = np.arange(1, n + 1)
        # intercept + slope * k/n reproduces the surrogate at k/n
        recon = pieces.intercepts + pieces.lambdas * (k / n)
        np.testing.assert_allclose(
            recon, pieces.surrogate_values[1:], atol=1e-12, rtol=0.0
        )
        assert np.all(pieces.lambdas <= LAMBDA_TOL)
        assert np.all(np.diff(pieces.lambdas) >= -1e-9)
        assert np.all(np.diff(pieces.surrogate_values) <= 0.0)


def test_grid_pieces_dkw_formula():
    f0 = GaussianShift(1.0)
    margins = dkw_margins(200, 0.05)
    pieces = grid_pieces(f0, margins, margin_kind="dkw")
    grid = np.arange(201) / 200
    expected = np.maximum(f0.evaluate(grid + margins.eta) - margins.eta, 0.0)
    expected = np.minimum.accumulate(expected)
    np.testing.assert_allclose(pieces.surrogate_values, expected, atol=1e-15)


def test_grid_pieces_bad_requests():
    with pytest.raises(MarginError):
        grid_pieces(TvTolerant(0.1), dkw_margins(100, 0.05), "normalized")
    with pytest.raises(ValueError):
        grid_pieces(TvTolerant(0.1), make_margins(100, 0.05, 2), "bogus")
