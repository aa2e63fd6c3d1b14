"""Random vector quantization of channel directions and its accuracy laws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidDimensionsError

__all__ = [
    "Codebook",
    "QuantizationResult",
    "make_codebook",
    "quantize_vector",
    "batch_alignments",
    "single_word_alignment_cdf",
    "theta_cdf",
    "expected_theta_lower_bound",
    "epsilon_error_prob_lower_bound",
    "projection_density",
    "zf_quantization_gap_bound",
    "min_projected_residual_samples",
]

_CODEBOOK_STREAM = 0x636F6465  # stream tag separating codebook draws from channel draws


@dataclass(frozen=True)
class Codebook:
    """L unit-norm complex M-vectors, regenerable bit-for-bit from the seed."""

    words: np.ndarray  # (L, M) complex, unit rows
    seed: int

    @property
    def size(self) -> int:
        return self.words.shape[0]

    @property
    def dim(self) -> int:
        return self.words.shape[1]


@dataclass(frozen=True)
class QuantizationResult:
    index: int
    alignment: float   # theta = |v^H c|^2
    residual: float    # 1 - theta


def make_codebook(seed: int, L: int, M: int) -> Codebook:
    """Draw L unit vectors uniform on the complex M-sphere."""
    if L < 1 or M < 1:
        raise InvalidDimensionsError(f"need L >= 1 and M >= 1, got L={L} M={M}")
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, _CODEBOOK_STREAM], dtype=np.uint64))
    )
    words = rng.standard_normal((L, M)) + 1j * rng.standard_normal((L, M))
    words /= np.linalg.norm(words, axis=1, keepdims=True)
    return Codebook(words=words, seed=int(seed))


def batch_alignments(vectors: np.ndarray, cb: Codebook) -> np.ndarray:
    """|v^H c_l|^2 for a batch of unit vectors: shape (n, L)."""
    return np.abs(np.asarray(vectors).conj() @ cb.words.T) ** 2


def quantize_vector(v: np.ndarray, cb: Codebook) -> QuantizationResult:
    """Best-aligned codeword for v; ties broken by smallest index."""
    v = np.asarray(v)
    if v.shape != (cb.dim,):
        raise InvalidDimensionsError(f"vector must have shape ({cb.dim},), got {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise DomainError("input vector must be unit norm")
    align = np.abs(cb.words @ v.conj()) ** 2
    idx = int(np.argmax(align))
    theta = float(align[idx])
    return QuantizationResult(index=idx, alignment=theta, residual=1.0 - theta)


def single_word_alignment_cdf(theta: float, M: int) -> float:
    """CDF of |v^H c|^2 for one random word: 1 - (1-theta)^(M-1)."""
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if M < 2:
        raise DomainError(f"M must be >= 2, got {M}")
    return 1.0 - (1.0 - theta) ** (M - 1)


def theta_cdf(theta: float, M: int, L: int) -> float:
    """CDF of the best alignment over an L-word codebook: [1-(1-theta)^(M-1)]^L."""
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must be in [0,1], got {theta}")
    if M < 2:
        raise DomainError(f"M must be >= 2, got {M}")
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    return (1.0 - (1.0 - theta) ** (M - 1)) ** L


def expected_theta_lower_bound(M: int, L: int) -> float:
    """Closed-form lower bound 1 - L^(-1/(M-1)) (1 + e^-1/(M-1)) on E{theta}.

    May be negative for tiny L; it is still a valid bound.
    """
    if M < 2:
        raise DomainError(f"M must be >= 2, got {M}")
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    return 1.0 - L ** (-1.0 / (M - 1)) * (1.0 + math.exp(-1.0) / (M - 1))


def epsilon_error_prob_lower_bound(theta: float, L_i: int, M: int, i: int, N: int) -> float:
    """Lower bound [max(0, 1 - L_i C(M-1, i-1) theta^(M-i))]^N on the
    probability that every user's projected quantization residual exceeds theta."""
    if not 1 <= i <= M - 1:
        raise DomainError(f"need 1 <= i <= M-1, got i={i} M={M}")
    if theta <= 0:
        raise DomainError(f"theta must be > 0, got {theta}")
    inner = 1.0 - L_i * math.comb(M - 1, i - 1) * theta ** (M - i)
    return max(0.0, inner) ** N


def projection_density(y: np.ndarray, M: int, i: int) -> float:
    """Density of the projection of a uniform unit M-vector onto M-i coordinates.

    Value (M-1)!/(pi^(M-i) (i-1)!) (1 - ||y||^2)^(i-1) on the unit ball.
    """
    if not 1 <= i <= M - 1:
        raise DomainError(f"need 1 <= i <= M-1, got i={i} M={M}")
    y = np.atleast_1d(np.asarray(y))
    if y.shape != (M - i,):
        raise DomainError(f"y must have {M - i} components, got shape {y.shape}")
    nrm2 = float(np.sum(np.abs(y) ** 2))
    if nrm2 > 1.0 + 1e-12:
        raise DomainError(f"||y|| must be <= 1, got ||y||^2 = {nrm2}")
    nrm2 = min(nrm2, 1.0)
    const = math.factorial(M - 1) / (math.pi ** (M - i) * math.factorial(i - 1))
    return const * (1.0 - nrm2) ** (i - 1)


def zf_quantization_gap_bound(B: float, P: float, N: int, M: int, gamma: float | None = None) -> float:
    """Rate-gap bound M ln(1 + P gamma (ln N) 2^(-B/(M-1))) for B-bit RVQ feedback.

    gamma defaults to (M-1)/M, its known lower bound; the true constant for
    RVQ is not pinned down, so treat the curve as indicative.
    """
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")
    if B < 0:
        raise DomainError(f"B must be >= 0, got {B}")
    if M < 2:
        raise DomainError(f"M must be >= 2, got {M}")
    if gamma is None:
        gamma = (M - 1) / M
    if gamma <= 0:
        raise DomainError(f"gamma must be > 0, got {gamma}")
    return M * math.log1p(P * gamma * math.log(N) * 2.0 ** (-B / (M - 1)))


def min_projected_residual_samples(
    seed: int, trials: int, N: int, M: int, i: int, L: int
) -> np.ndarray:
    """Monte Carlo samples of min_n ||(v_n - c_n)^H Y||^2 for the bound check.

    Per trial: a random semi-orthogonal M x (M-i) matrix Y, N independent
    uniform unit directions, and a fresh L-word codebook per user.  Each
    user picks its Euclidean-nearest codeword (no phase alignment, so each
    word stays a fixed point of the sphere and the per-word ball-volume
    counting argument applies), and the trial's sample is the smallest
    projected squared residual over the N users.
    """
    if not 1 <= i <= M - 1:
        raise DomainError(f"need 1 <= i <= M-1, got i={i} M={M}")
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, 0x726573], dtype=np.uint64))
    )
    out = np.empty(trials)
    for t in range(trials):
        G = rng.standard_normal((M, M - i)) + 1j * rng.standard_normal((M, M - i))
        Y, _ = np.linalg.qr(G)
        v = rng.standard_normal((N, M)) + 1j * rng.standard_normal((N, M))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        c = rng.standard_normal((N, L, M)) + 1j * rng.standard_normal((N, L, M))
        c /= np.linalg.norm(c, axis=2, keepdims=True)
        diff = v[:, None, :] - c  # (N, L, M)
        nearest = np.argmin(np.sum(np.abs(diff) ** 2, axis=2), axis=1)
        resid = diff[np.arange(N), nearest]  # (N, M)
        mu = np.sum(np.abs(resid.conj() @ Y) ** 2, axis=1)
        out[t] = mu.min()
    return out
