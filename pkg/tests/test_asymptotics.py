"""Tests for leading-order scaling predictions."""

import math

import pytest

from fbmimo.asymptotics import (
    alignment_capture_q,
    feedback_bits_lower_bound,
    low_snr_ropt_proxy,
    predicted_empty_prob,
    rbf_highsnr_threshold,
    ropt_asymptote,
)
from fbmimo.errors import DomainError, RegimeError


def test_ropt_asymptote():
    assert ropt_asymptote(2, 10.0, 100) == pytest.approx(
        2 * math.log1p(5.0 * math.log(100)), rel=1e-12
    )
    # increasing in N and P
    assert ropt_asymptote(2, 10.0, 1000) > ropt_asymptote(2, 10.0, 100)
    assert ropt_asymptote(2, 20.0, 100) > ropt_asymptote(2, 10.0, 100)
    with pytest.raises(DomainError):
        ropt_asymptote(1, 10.0, 100)
    with pytest.raises(DomainError):
        ropt_asymptote(2, 10.0, 2)


def test_low_snr_proxy_and_regime_guard():
    assert low_snr_ropt_proxy(0.001, 100) == pytest.approx(0.001 * math.log(100))
    with pytest.raises(RegimeError):
        low_snr_ropt_proxy(1.0, 100)


def test_low_snr_proxy_against_best_user_oracle():
    # The proxy P ln N keeps only the leading term of the best user's
    # largest eigenvalue; at N=4096, M=K=2 the ln ln N correction is still
    # ~50%, so the Monte Carlo best-single-user rate sits well above the
    # proxy (calibrated ratio ~1.7, asserted in [1.2, 2.2]).
    from fbmimo.channel import sample_snapshot

    P, N = 1e-3, 4096
    proxy = low_snr_ropt_proxy(P, N)
    best = []
    for trial in range(50):
        snap = sample_snapshot(80_000 + trial, N, 2, 2)
        best.append(math.log1p(P * float(snap.lambda_max.max())))
    ratio = float(sum(best) / len(best)) / proxy
    assert 1.2 < ratio < 2.2


def test_rbf_highsnr_threshold_piecewise():
    # c < 1 branch
    v = rbf_highsnr_threshold(10.0, 10_000, 2)
    assert v == pytest.approx((10.0 / 2) * (math.log(10_000) - 0.5 * math.log(10.0)))
    # c >= 1 branch
    v = rbf_highsnr_threshold(10_000.0, 100, 2)
    assert v == pytest.approx((10_000.0 / 4) * math.log(100))
    # explicit regime override
    v = rbf_highsnr_threshold(10.0, 10_000, 2, c_regime=2.0)
    assert v == pytest.approx((10.0 / 4) * math.log(10_000))
    with pytest.raises(DomainError):
        rbf_highsnr_threshold(0.5, 100, 2)


def test_feedback_bits_lower_bound():
    # K = M branch
    assert feedback_bits_lower_bound(2, 2, 10.0, 10_000) == pytest.approx(
        math.log(math.log(math.log(10_000)))
    )
    assert feedback_bits_lower_bound(2, 2, 10.0, 4) == 0.0  # clamped at zero
    # K < M branch: log-log term plus hinges
    x = math.log(10.0 * math.log(256))
    expect = math.log(x) + max(0.0, 1 * x - math.log(256))
    assert feedback_bits_lower_bound(2, 1, 10.0, 256) == pytest.approx(expect)
    # more missing antennas never cheapens feedback
    assert feedback_bits_lower_bound(4, 1, 10.0, 256) >= feedback_bits_lower_bound(
        4, 3, 10.0, 256
    )
    with pytest.raises(DomainError):
        feedback_bits_lower_bound(2, 3, 10.0, 256)
    with pytest.raises(DomainError):
        feedback_bits_lower_bound(2, 1, 0.01, 3)


def test_predicted_empty_prob():
    exact, approx = predicted_empty_prob(100, 0.01)
    assert exact == pytest.approx(0.99 ** 100, rel=1e-12)
    assert approx == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert abs(exact - approx) < 0.01
    with pytest.raises(DomainError):
        predicted_empty_prob(100, 1.5)


def test_alignment_capture_q():
    t, eps, M, K = 6.0, 0.1, 2, 2
    expect = t ** 2 * math.exp(-t) * eps
    assert alignment_capture_q(t, eps, M, K) == pytest.approx(expect, rel=1e-12)
    # smaller capture window, smaller probability
    assert alignment_capture_q(6.0, 0.05, 2, 2) < alignment_capture_q(6.0, 0.1, 2, 2)
    with pytest.raises(DomainError):
        alignment_capture_q(-1.0, 0.1, 2, 2)
    with pytest.raises(DomainError):
        alignment_capture_q(6.0, 0.0, 2, 2)
