"""Rayleigh-fading channel sampling and spectral statistics.

Entries are unit-variance circularly symmetric complex Gaussians, so a
K x M user matrix H has E{||H||^2} = M*K and its squared row norms are
Gamma(M, 1) distributed (chi-square with 2M degrees of freedom, halved).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError, EmptyInputError, InvalidDimensionsError

__all__ = [
    "ChannelMatrix",
    "Snapshot",
    "sample_snapshot",
    "row_norm_sq_cdf",
    "lambda_max_tail_approx",
    "ks_distance",
]


@dataclass(frozen=True)
class ChannelMatrix:
    """One user's K x M channel with cached spectral data.

    lambda_max is the largest eigenvalue of H H^H (squared largest
    singular value of H); v_max / u_max are the matching right / left
    singular vectors of H, phase-normalized for reproducibility.
    """

    entries: np.ndarray  # (K, M) complex
    lambda_max: float
    v_max: np.ndarray  # (M,) unit norm
    u_max: np.ndarray  # (K,) unit norm

    @property
    def shape(self):
        return self.entries.shape


@dataclass(frozen=True)
class Snapshot:
    """One fading realization of all N users, regenerable from its seed."""

    seed: int
    entries: np.ndarray      # (N, K, M) complex
    lambda_max: np.ndarray   # (N,)
    v_max: np.ndarray        # (N, M)
    u_max: np.ndarray        # (N, K)

    @property
    def dims(self):
        n, k, m = self.entries.shape
        return (n, m, k)

    @property
    def num_users(self):
        return self.entries.shape[0]

    def user(self, k: int) -> ChannelMatrix:
        return ChannelMatrix(
            entries=self.entries[k],
            lambda_max=float(self.lambda_max[k]),
            v_max=self.v_max[k],
            u_max=self.u_max[k],
        )

    def users(self):
        return [self.user(k) for k in range(self.num_users)]


def _user_rng(seed: int, user: int) -> np.random.Generator:
    # Counter-based stream keyed by (snapshot seed, user index): users are
    # independent and the whole snapshot regenerates bit-for-bit.
    return np.random.Generator(
        np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, user], dtype=np.uint64))
    )


def _fix_phases(v: np.ndarray, u: np.ndarray):
    """Rotate (v, u) jointly so v's first non-negligible entry is real >= 0."""
    n = v.shape[0]
    for i in range(n):
        mags = np.abs(v[i])
        idx = np.flatnonzero(mags > 1e-12)
        if idx.size == 0:
            continue
        phase = v[i, idx[0]] / mags[idx[0]]
        v[i] *= np.conj(phase)
        u[i] *= np.conj(phase)
    return v, u


def sample_snapshot(seed: int, N: int, M: int, K: int) -> Snapshot:
    """Draw N independent K x M Rayleigh channels with cached spectra."""
    if N < 1 or M < 1 or K < 1:
        raise InvalidDimensionsError(f"dimensions must be positive, got N={N} M={M} K={K}")
    if K > M:
        raise InvalidDimensionsError(f"need K <= M, got K={K} M={M}")

    entries = np.empty((N, K, M), dtype=np.complex128)
    for k in range(N):
        rng = _user_rng(seed, k)
        re = rng.standard_normal((K, M))
        im = rng.standard_normal((K, M))
        entries[k] = (re + 1j * im) * math.sqrt(0.5)

    # Batched SVD: H = U diag(s) Vh, lambda_max = s_max^2.
    u_full, s, vh = np.linalg.svd(entries)
    lam = s[:, 0] ** 2
    v = vh[:, 0, :].conj()
    u = u_full[:, :, 0]
    v, u = _fix_phases(v, u)
    return Snapshot(seed=int(seed), entries=entries, lambda_max=lam, v_max=v, u_max=u)


def row_norm_sq_cdf(t: float, M: int) -> float:
    """CDF of a squared row norm: 1 - sum_{m<M} t^m e^-t / m!."""
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    return float(special.gammainc(M, t))


def lambda_max_tail_approx(t: float, M: int, K: int) -> float:
    """Leading-order tail approximation t^(M+K-2) e^-t / (G(M) G(K)).

    Asymptotic in t; not an exact CDF complement and can exceed 1 for
    small t.
    """
    if t <= 0:
        raise DomainError(f"t must be > 0, got {t}")
    return float(
        math.exp((M + K - 2) * math.log(t) - t - special.gammaln(M) - special.gammaln(K))
    )


def ks_distance(samples, cdf) -> float:
    """Sup-norm distance between the empirical CDF of samples and cdf."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise EmptyInputError("ks_distance needs at least one sample")
    try:
        f = np.asarray(cdf(x), dtype=float)
        if f.shape != x.shape:
            raise TypeError
    except (TypeError, ValueError):
        f = np.asarray([cdf(v) for v in x], dtype=float)
    hi = np.abs(np.arange(1, n + 1) / n - f)
    lo = np.abs(f - np.arange(0, n) / n)
    return float(max(hi.max(), lo.max()))
