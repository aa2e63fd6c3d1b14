"""Tests for channel sampling and spectral statistics."""

import math

import numpy as np
import pytest
from scipy import special

from fbmimo.channel import (
    ks_distance,
    lambda_max_tail_approx,
    row_norm_sq_cdf,
    sample_snapshot,
)
from fbmimo.errors import DomainError, EmptyInputError, InvalidDimensionsError


def test_snapshot_shapes_and_caches():
    snap = sample_snapshot(7, 5, 3, 2)
    assert snap.entries.shape == (5, 2, 3)
    assert snap.dims == (5, 3, 2)
    assert snap.lambda_max.shape == (5,)
    assert snap.v_max.shape == (5, 3)
    assert snap.u_max.shape == (5, 2)
    assert np.all(np.isfinite(snap.entries))


def test_snapshot_determinism():
    a = sample_snapshot(123, 8, 4, 2)
    b = sample_snapshot(123, 8, 4, 2)
    assert np.array_equal(a.entries, b.entries)
    assert np.array_equal(a.v_max, b.v_max)
    assert np.array_equal(a.u_max, b.u_max)


def test_snapshot_user_streams_are_prefix_stable():
    # The first users of a larger snapshot match a smaller one exactly.
    small = sample_snapshot(9, 3, 2, 1)
    big = sample_snapshot(9, 10, 2, 1)
    assert np.array_equal(small.entries, big.entries[:3])


def test_spectral_cache_matches_eigendecomposition():
    snap = sample_snapshot(42, 20, 4, 3)
    for u in snap.users():
        H = u.entries
        w = np.linalg.eigvalsh(H @ H.conj().T)
        assert u.lambda_max == pytest.approx(w[-1], rel=1e-9)
        # v_max is a unit right singular vector achieving lambda_max
        assert abs(np.linalg.norm(u.v_max) - 1.0) < 1e-10
        assert abs(np.linalg.norm(u.u_max) - 1.0) < 1e-10
        assert np.linalg.norm(H @ u.v_max) ** 2 == pytest.approx(u.lambda_max, rel=1e-9)
        # H v = sqrt(lambda) u
        hv = H @ u.v_max
        assert np.allclose(hv, math.sqrt(u.lambda_max) * u.u_max, atol=1e-9)


def test_phase_convention():
    snap = sample_snapshot(5, 30, 3, 2)
    for i in range(snap.num_users):
        v = snap.v_max[i]
        idx = np.flatnonzero(np.abs(v) > 1e-12)[0]
        assert abs(v[idx].imag) < 1e-12
        assert v[idx].real >= 0


def test_lambda_max_dominates_mean_eigenvalue():
    snap = sample_snapshot(11, 4, 2, 2)
    for u in snap.users():
        assert u.lambda_max >= np.sum(np.abs(u.entries) ** 2) / 2 - 1e-12


def test_entry_variance():
    snap = sample_snapshot(7, 100_000, 2, 1)
    mean_sq = float(np.mean(np.abs(snap.entries) ** 2))
    assert abs(mean_sq - 1.0) < 0.02


def test_sample_snapshot_rejects_bad_dims():
    with pytest.raises(InvalidDimensionsError):
        sample_snapshot(0, 0, 2, 1)
    with pytest.raises(InvalidDimensionsError):
        sample_snapshot(0, 1, 2, 3)
    with pytest.raises(InvalidDimensionsError):
        sample_snapshot(0, 1, 0, 0)


def test_row_norm_sq_cdf_values():
    assert row_norm_sq_cdf(0.0, 3) == 0.0
    assert row_norm_sq_cdf(1e9, 2) == pytest.approx(1.0)
    assert row_norm_sq_cdf(2.0, 2) == pytest.approx(1.0 - 3.0 * math.exp(-2.0), rel=1e-12)
    # monotone
    ts = np.linspace(0, 10, 50)
    vals = [row_norm_sq_cdf(t, 4) for t in ts]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        row_norm_sq_cdf(-1.0, 2)


def test_row_norm_sq_cdf_matches_series():
    # 1 - sum_{m<M} t^m e^-t / m!
    t, M = 3.5, 4
    series = 1.0 - sum(t ** m * math.exp(-t) / math.factorial(m) for m in range(M))
    assert row_norm_sq_cdf(t, M) == pytest.approx(series, rel=1e-12)


def test_lambda_max_tail_approx_value():
    t, M, K = 10.0, 2, 2
    expect = t ** (M + K - 2) * math.exp(-t) / (math.gamma(M) * math.gamma(K))
    assert lambda_max_tail_approx(t, M, K) == pytest.approx(expect, rel=1e-12)
    with pytest.raises(DomainError):
        lambda_max_tail_approx(0.0, 2, 2)


def test_ks_distance_exact_uniform():
    # For samples at (i-0.5)/n against U(0,1) the KS distance is 1/(2n).
    n = 10
    x = (np.arange(n) + 0.5) / n
    d = ks_distance(x, lambda v: np.clip(v, 0.0, 1.0))
    assert d == pytest.approx(0.5 / n, abs=1e-12)


def test_ks_distance_scalar_cdf_fallback():
    x = np.random.default_rng(0).uniform(size=500)
    d_vec = ks_distance(x, lambda v: np.clip(v, 0, 1))
    d_scalar = ks_distance(x, lambda v: float(min(max(v, 0.0), 1.0)))
    assert d_vec == pytest.approx(d_scalar, abs=1e-15)


def test_ks_distance_empty():
    with pytest.raises(EmptyInputError):
        ks_distance([], lambda v: v)


def test_row_norms_follow_gamma_law():
    M, K = 3, 2
    snap = sample_snapshot(1, 20_000, M, K)
    norms = np.sum(np.abs(snap.entries) ** 2, axis=2).reshape(-1)
    d = ks_distance(norms, lambda t: special.gammainc(M, np.maximum(t, 0.0)))
    assert d < 1.63 / math.sqrt(norms.size) * 1.2
