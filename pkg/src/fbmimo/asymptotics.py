"""Leading-order scaling predictions used as comparison curves and trend oracles.

All slack terms of the underlying scaling laws are dropped; values here are
labeled "leading order" and are meant for trend and ordering checks, never
for pointwise equality assertions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, RegimeError

__all__ = [
    "ScalingPrediction",
    "ropt_asymptote",
    "low_snr_ropt_proxy",
    "rbf_highsnr_threshold",
    "feedback_bits_lower_bound",
    "predicted_empty_prob",
    "alignment_capture_q",
]


@dataclass(frozen=True)
class ScalingPrediction:
    label: str
    value: float
    regime: str  # "fixed-SNR" | "low-SNR" | "high-SNR"


def ropt_asymptote(M: int, P: float, N: int) -> float:
    """Leading-order optimum sum rate M ln(1 + (P/M) ln N)."""
    if M < 2:
        raise DomainError(f"M must be >= 2, got {M}")
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")
    return M * math.log1p((P / M) * math.log(N))


def low_snr_ropt_proxy(P: float, N: int) -> float:
    """Low-SNR optimum proxy P ln N (valid only when P ln N is small)."""
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")
    if P * math.log(N) >= 0.1:
        raise RegimeError(
            f"P ln N = {P * math.log(N):.3g} is outside the low-SNR regime (< 0.1)"
        )
    return P * math.log(N)


def rbf_highsnr_threshold(P: float, N: int, M: int, c_regime: float | None = None) -> float:
    """High-SNR scheduling threshold, piecewise in c = ln P / ln N.

    (P/M)(ln N - ln(P)/2) when c < 1, and (P/(2M)) ln N when c >= 1.
    """
    if P <= 1:
        raise DomainError(f"P must be > 1, got {P}")
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    c = math.log(P) / math.log(N) if c_regime is None else c_regime
    if c < 1.0:
        return (P / M) * (math.log(N) - 0.5 * math.log(P))
    return (P / (2.0 * M)) * math.log(N)


def feedback_bits_lower_bound(M: int, K: int, P: float, N: int) -> float:
    """Leading-order lower bound on the feedback needed to keep full
    multiplexing gain (nats); slack terms dropped.

    K = M: max(0, ln ln ln N).  K < M: ln ln(P ln N) plus the hinge sum
    over the M-K weakest streams.
    """
    if K > M:
        raise DomainError(f"need K <= M, got K={K} M={M}")
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    if P <= 0 or P * math.log(N) <= 1.0:
        raise DomainError(f"need P ln N > 1, got P={P} N={N}")
    if K == M:
        return max(0.0, math.log(math.log(math.log(N))))
    x = math.log(P * math.log(N))
    total = math.log(x)
    for i in range(1, M - K + 1):
        total += max(0.0, (M - i) * x - math.log(N))
    return total


def predicted_empty_prob(N: int, q: float) -> tuple[float, float]:
    """Probability that no user out of N captures an event of probability q.

    Returns both the exact (1-q)^N and its approximation e^(-Nq).
    """
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"q must be in [0,1], got {q}")
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    return (1.0 - q) ** N, math.exp(-N * q)


def alignment_capture_q(t: float, eps: float, M: int, K: int) -> float:
    """Leading-order probability that one user clears the eigenvalue
    threshold t and aligns with a fixed beam within 1-eps:
    e^(-t) t^(M+K-2) / (G(M) G(K)) * eps^(M-1)."""
    if t <= 0:
        raise DomainError(f"t must be > 0, got {t}")
    if not 0 < eps < 1:
        raise DomainError(f"eps must be in (0,1), got {eps}")
    tail = math.exp(
        (M + K - 2) * math.log(t) - t - math.lgamma(M) - math.lgamma(K)
    )
    return tail * eps ** (M - 1)
