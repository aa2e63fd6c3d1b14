"""Sum-rate machinery: dual-MAC capacity, DPC rates, zero-forcing, and baselines.

The downlink sum capacity equals the sum capacity of the dual uplink under
the same total power, so the optimum benchmark is computed on the uplink
side: maximize ln|I + sum_i H_i^H S_i H_i| over PSD covariances S_i with
sum of traces <= P.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConvergenceError,
    DomainError,
    EmptyInputError,
    InvalidDimensionsError,
    SingularityError,
)

__all__ = [
    "CovarianceSet",
    "DpcOrdering",
    "EffectiveChannel",
    "dual_mac_sum_capacity",
    "dpc_sum_rate",
    "zfbf_rate",
    "tdma_no_csi_rate",
    "covariance_structure_diagnostics",
]


@dataclass(frozen=True)
class CovarianceSet:
    """Per-user Hermitian PSD transmit covariances under a shared power budget."""

    matrices: tuple
    power_budget: float

    @property
    def total_power(self) -> float:
        return float(sum(np.trace(m).real for m in self.matrices))


@dataclass(frozen=True)
class DpcOrdering:
    """Successive encoding order: a permutation of the user indices."""

    order: tuple


@dataclass(frozen=True)
class EffectiveChannel:
    """Stacked effective rows g_i = sqrt(lambda_max_i) * v_max_i^H, one per user."""

    rows: np.ndarray  # (m, M) complex

    @classmethod
    def from_users(cls, users) -> "EffectiveChannel":
        rows = np.stack(
            [math.sqrt(u.lambda_max) * u.v_max.conj() for u in users]
        )
        return cls(rows=rows)


def _logdet_hermitian(A: np.ndarray) -> float:
    sign, val = np.linalg.slogdet(A)
    if sign.real <= 0:
        raise SingularityError("matrix in log-det is not positive definite")
    return float(val)


def _waterfill(gains: np.ndarray, P: float) -> np.ndarray:
    """Allocate total power P over parallel channels with the given gains.

    Returns p with p_j = max(0, mu - 1/gains_j) and sum(p) = P (common
    water level mu); channels with nonpositive gain get nothing.
    """
    p = np.zeros_like(gains)
    pos = gains > 1e-14
    if not np.any(pos):
        return p
    inv = 1.0 / gains[pos]
    order = np.argsort(inv)
    inv_sorted = inv[order]
    csum = np.cumsum(inv_sorted)
    k = np.arange(1, inv_sorted.size + 1)
    mu = (P + csum) / k
    active = np.flatnonzero(mu > inv_sorted)
    n_active = active[-1] + 1
    mu_star = (P + csum[n_active - 1]) / n_active
    alloc = np.zeros_like(inv_sorted)
    alloc[:n_active] = mu_star - inv_sorted[:n_active]
    out = np.zeros_like(inv)
    out[order] = alloc
    p[pos] = out
    return p


def dual_mac_sum_capacity(users, P: float, tol: float = 1e-8, max_iters: int = 10_000):
    """Maximize ln|I + sum_i H_i^H S_i H_i| over PSD S_i with total trace <= P.

    Iterative waterfilling: every sweep, each user waterfills its effective
    channel against the interference of all others under a common water
    level, and the update is damped by the largest step size in
    {1, 1/2, 1/4, ...} that does not decrease the concave objective.
    Terminates when successive objective values differ by less than tol
    (relative) or raises after max_iters sweeps.

    Returns (value in nats, argmax CovarianceSet).
    """
    if len(users) == 0:
        raise EmptyInputError("need at least one user")
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")
    if tol <= 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    shapes = {u.entries.shape for u in users}
    if len(shapes) != 1:
        raise InvalidDimensionsError("all users must share the same (K, M)")

    H = np.stack([u.entries for u in users])  # (N, K, M)
    N, K, M = H.shape
    Hh = H.conj().transpose(0, 2, 1)  # (N, M, K)
    eye_m = np.eye(M, dtype=complex)
    eye_k = np.eye(K, dtype=complex)

    S = np.zeros((N, K, K), dtype=complex)
    A = eye_m.copy()
    f_cur = 0.0
    gamma_min = 0.25 / N

    for _ in range(max_iters):
        # Each user's effective channel with its own contribution removed.
        contrib = Hh @ S @ H  # (N, M, M)
        A_others = A[None, :, :] - contrib
        F = H @ np.linalg.inv(A_others) @ Hh  # (N, K, K)
        F = 0.5 * (F + F.conj().transpose(0, 2, 1))
        gains, V = np.linalg.eigh(F)
        gains = np.clip(gains, 0.0, None)
        p = _waterfill(gains.reshape(-1), P).reshape(N, K)
        S_wf = (V * p[:, None, :]) @ V.conj().transpose(0, 2, 1)
        A_wf = eye_m + np.sum(Hh @ S_wf @ H, axis=0)

        # Damped update: the full simultaneous step can overshoot, but a
        # small enough convex combination is always an ascent step.
        gamma = 1.0
        accepted = False
        while gamma >= gamma_min:
            A_new = (1.0 - gamma) * A + gamma * A_wf
            f_new = _logdet_hermitian(A_new)
            if f_new >= f_cur - 1e-13 * (1.0 + abs(f_cur)):
                accepted = True
                break
            gamma *= 0.5

        if accepted:
            S = (1.0 - gamma) * S + gamma * S_wf
            A = A_new
            delta = f_new - f_cur
            f_cur = max(f_cur, f_new)
        else:
            delta = 0.0

        if abs(delta) < tol * max(1.0, abs(f_cur)):
            mats = tuple(np.ascontiguousarray(S[i]) for i in range(N))
            return f_cur, CovarianceSet(matrices=mats, power_budget=float(P))

    mats = tuple(np.ascontiguousarray(S[i]) for i in range(N))
    raise ConvergenceError(
        f"no convergence after {max_iters} sweeps (objective {f_cur:.12g})",
        last_iterate=CovarianceSet(matrices=mats, power_budget=float(P)),
    )


def dpc_sum_rate(users, Q: CovarianceSet, order: DpcOrdering) -> float:
    """Successive-encoding sum rate for fixed downlink covariances Q_i.

    User encoded at position i sees only the interference of users encoded
    after it; its rate is the log-det increment of signal over that
    residual interference.
    """
    n = len(users)
    perm = list(order.order)
    if sorted(perm) != list(range(n)):
        raise InvalidDimensionsError("order must be a permutation of all user indices")
    if len(Q.matrices) != n:
        raise InvalidDimensionsError("one covariance per user required")
    M = users[0].entries.shape[1]
    for q in Q.matrices:
        if q.shape != (M, M):
            raise InvalidDimensionsError(f"covariances must be {M}x{M}")

    total = 0.0
    for pos, i in enumerate(perm):
        Hi = users[i].entries
        K = Hi.shape[0]
        later = sum((Q.matrices[j] for j in perm[pos + 1:]), np.zeros((M, M), dtype=complex))
        noise = np.eye(K, dtype=complex) + Hi @ later @ Hi.conj().T
        signal = Hi @ Q.matrices[i] @ Hi.conj().T
        total += _logdet_hermitian(noise + signal) - _logdet_hermitian(noise)
    return total


def zfbf_rate(H_eff: EffectiveChannel, P: float) -> float:
    """Equal-power zero-forcing sum rate m * ln(1 + P / Tr{Gram^-1}).

    Gram is the m x m Gram matrix of the stacked effective rows; the
    inverse-trace term is the power cost of inverting the channel.
    """
    rows = np.asarray(H_eff.rows)
    if rows.ndim != 2 or rows.shape[0] == 0:
        raise EmptyInputError("effective channel needs at least one row")
    if rows.shape[0] > rows.shape[1]:
        raise InvalidDimensionsError("more rows than transmit antennas")
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")
    gram = rows @ rows.conj().T
    w = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    if w[0] <= 0 or w[-1] / w[0] > 1e8:
        raise SingularityError(
            f"effective rows nearly dependent (condition {w[-1] / max(w[0], 1e-300):.3g})"
        )
    tr_inv = float(np.sum(1.0 / w))
    m = rows.shape[0]
    return m * math.log1p(P / tr_inv)


def tdma_no_csi_rate(H, P: float) -> float:
    """Single-user rate ln|I + (P/M) H H^H| with isotropic transmit power."""
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")
    entries = H.entries if hasattr(H, "entries") else np.asarray(H)
    K, M = entries.shape
    A = np.eye(K, dtype=complex) + (P / M) * (entries @ entries.conj().T)
    return _logdet_hermitian(A)


def covariance_structure_diagnostics(argmax: CovarianceSet, users) -> dict:
    """Observational report on the structure of a dual-MAC argmax.

    For every user carrying more than 1e-6 of the power budget: fraction of
    its covariance trace in the dominant eigenvalue, its power share, and
    the pairwise alignment of the dominant effective uplink directions
    H_i^H u_i (u_i the dominant eigenvector of S_i).
    """
    P = argmax.power_budget
    active = []
    directions = []
    for i, Si in enumerate(argmax.matrices):
        tr = float(np.trace(Si).real)
        if tr <= 1e-6 * P:
            continue
        w, V = np.linalg.eigh(0.5 * (Si + Si.conj().T))
        u = V[:, -1]
        d = users[i].entries.conj().T @ u
        nrm = np.linalg.norm(d)
        if nrm > 0:
            d = d / nrm
        active.append(
            {
                "user": i,
                "dominant_fraction": float(w[-1] / tr),
                "power_share": tr / P,
            }
        )
        directions.append((i, d))
    pairwise = {}
    for a in range(len(directions)):
        for b in range(a + 1, len(directions)):
            i, di = directions[a]
            j, dj = directions[b]
            pairwise[(i, j)] = float(abs(np.vdot(di, dj)))
    return {"active": active, "pairwise_abs_inner": pairwise}
