"""Feedback/scheduling schemes: random beamforming, eigen-ZFBF with optional
quantized feedback, the two greedy limited-feedback algorithms, and the
low-SNR single-user RVQ scheme.

Every scheme consumes an immutable Snapshot and returns a SchemeOutcome
carrying the achieved rates plus an exact, reproducible feedback trace.
Scheme-side randomness (beam draws, random selections) runs on counter-based
streams keyed by the snapshot seed and a per-scheme tag, so it never
collides with the channel streams and reruns are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .channel import Snapshot
from .errors import (
    ConfigError,
    DomainError,
    InfeasibleTargetError,
    InvalidDimensionsError,
)
from .quantize import make_codebook

__all__ = [
    "BeamSet",
    "FeedbackTrace",
    "SchemeOutcome",
    "haar_beams",
    "rbf_sinr_matrix",
    "run_rbf",
    "rbf_threshold_solve",
    "run_threshold_eigen_zfbf",
    "run_algorithm_a",
    "run_algorithm_b",
    "run_low_snr_rvq",
]

_MASK = 0xFFFFFFFFFFFFFFFF
_TAG_RBF = 0x10001
_TAG_EZF = 0x10002
_TAG_ALG_A = 0x10003
_TAG_ALG_B = 0x10004
_TAG_LOW_SNR = 0x10005


@dataclass(frozen=True)
class BeamSet:
    """Up to M unit-norm transmit directions, one row per beam."""

    beams: np.ndarray  # (m, M) complex


@dataclass(frozen=True)
class FeedbackTrace:
    """Exact uplink signaling record for one trial."""

    users_signaling: int
    total_bits: int
    rounds: tuple  # of (round id, message kind, bits)


@dataclass(frozen=True)
class SchemeOutcome:
    selected: tuple          # user ids, aligned with per_user_rate
    beams: BeamSet | None
    per_user_rate: tuple     # nats
    sum_rate: float          # nats
    feedback: FeedbackTrace
    fallback_used: bool
    diagnostics: dict


def _scheme_rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(key=np.array([seed & _MASK, tag], dtype=np.uint64))
    )


def _trace(rounds, users_signaling: int) -> FeedbackTrace:
    return FeedbackTrace(
        users_signaling=int(users_signaling),
        total_bits=int(sum(r[2] for r in rounds)),
        rounds=tuple(rounds),
    )


def _zero_outcome(rounds, users_signaling, diagnostics) -> SchemeOutcome:
    return SchemeOutcome(
        selected=(),
        beams=None,
        per_user_rate=(),
        sum_rate=0.0,
        feedback=_trace(rounds, users_signaling),
        fallback_used=True,
        diagnostics=diagnostics,
    )


def haar_beams(rng: np.random.Generator, M: int, m: int | None = None) -> np.ndarray:
    """m rows of a Haar-random M x M unitary (all M by default)."""
    G = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    Q, R = np.linalg.qr(G)
    d = np.diagonal(R)
    Q = Q * (d / np.abs(d))
    beams = Q.T  # row j is beam j
    return beams if m is None else beams[:m]


def rbf_sinr_matrix(rows: np.ndarray, beams: np.ndarray, P: float) -> np.ndarray:
    """Per (receive row, beam) SINR under equal per-beam power P/M."""
    M = beams.shape[0]
    G = np.abs(rows @ beams.T) ** 2  # (R, M)
    a = P / M
    tot = G.sum(axis=1, keepdims=True)
    return a * G / (1.0 + a * (tot - G))


def run_rbf(snap: Snapshot, P: float, threshold: float | None = None,
            sinr_bits: int = 16) -> SchemeOutcome:
    """Random beamforming: M random orthonormal beams, best-SINR scheduling.

    Without a threshold every receive antenna reports (best beam index,
    SINR value) and each beam goes to the globally strongest antenna.  With
    a threshold only (antenna, beam) pairs whose SINR exceeds it report the
    beam index, and each beam's winner is drawn uniformly among its
    reporters; a beam with no reporter stays silent.
    """
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")
    N, M, K = snap.dims
    rng = _scheme_rng(snap.seed, _TAG_RBF)
    beams = haar_beams(rng, M)
    rows = snap.entries.reshape(N * K, M)
    sinr = rbf_sinr_matrix(rows, beams, P)
    idx_bits = int(math.ceil(math.log2(M))) if M > 1 else 0

    if threshold is None:
        winners = np.argmax(sinr, axis=0)  # per beam
        won = sinr[winners, np.arange(M)]
        rates = np.log1p(won)
        selected = tuple(int(w) // K for w in winners)
        rounds = [(0, "sinr-report", N * K * (idx_bits + sinr_bits))]
        return SchemeOutcome(
            selected=selected,
            beams=BeamSet(beams=beams),
            per_user_rate=tuple(float(r) for r in rates),
            sum_rate=float(np.sum(rates)),
            feedback=_trace(rounds, N),
            fallback_used=False,
            diagnostics={"scheduled_sinr": tuple(float(s) for s in won)},
        )

    report = sinr > threshold
    n_reports = int(report.sum())
    reporting_rows = np.flatnonzero(report.any(axis=1))
    users_signaling = int(np.unique(reporting_rows // K).size)
    rounds = [(0, "beam-index", n_reports * idx_bits)]
    selected = []
    rates = []
    empty = 0
    for m in range(M):
        cands = np.flatnonzero(report[:, m])
        if cands.size == 0:
            empty += 1
            continue
        w = int(cands[rng.integers(cands.size)])
        selected.append(w // K)
        rates.append(float(math.log1p(sinr[w, m])))
    return SchemeOutcome(
        selected=tuple(selected),
        beams=BeamSet(beams=beams),
        per_user_rate=tuple(rates),
        sum_rate=float(math.fsum(rates)),
        feedback=_trace(rounds, users_signaling),
        fallback_used=empty > 0,
        diagnostics={"empty_beams": empty, "n_reports": n_reports},
    )


def rbf_threshold_solve(N: int, M: int, P: float, target_E_users: float,
                        T: float) -> float:
    """Threshold t with e^(-Mt/P)/(1+t)^(M-1) = target/(M N T).

    The left side is strictly decreasing from 1 at t=0, so the root is
    unique when the right side is below 1.
    """
    if target_E_users <= 0:
        raise DomainError(f"target must be > 0, got {target_E_users}")
    if T <= 0:
        raise DomainError(f"T must be > 0, got {T}")
    rhs = target_E_users / (M * N * T)
    if rhs > 1.0:
        raise InfeasibleTargetError(
            f"expected reporter count {target_E_users} exceeds M*N*T = {M * N * T}"
        )
    if rhs == 1.0:
        return 0.0

    def resid(t):
        return -M * t / P + (M - 1) * (-math.log1p(t)) - math.log(rhs)

    hi = 1.0
    while resid(hi) > 0:
        hi *= 2.0
    return float(optimize.brentq(resid, 0.0, hi, xtol=1e-14, rtol=8.9e-16))


def _zf_rates(rows_true: np.ndarray, rows_fb: np.ndarray, P: float):
    """Equal-symbol-power ZF on the fed-back rows, evaluated on the true rows.

    Returns (per-user rates, indices kept, rows dropped).  Rows are dropped
    one at a time (most dependent first) if the fed-back Gram is too ill
    conditioned to invert.
    """
    keep = list(range(rows_fb.shape[0]))
    dropped = 0
    while True:
        fb = rows_fb[keep]
        gram = fb @ fb.conj().T
        w = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
        if w[0] > 0 and w[-1] / w[0] < 1e8:
            break
        if len(keep) == 1:
            return [0.0], [], dropped + 1
        # drop the row with the least energy outside the span of the others
        resid = []
        for j in range(len(keep)):
            others = fb[[i for i in range(len(keep)) if i != j]]
            Qo, _ = np.linalg.qr(others.conj().T)
            r = fb[j] - (fb[j] @ Qo.conj()) @ Qo.T
            resid.append(np.linalg.norm(r))
        keep.pop(int(np.argmin(resid)))
        dropped += 1
    fb = rows_fb[keep]
    W = np.linalg.pinv(fb)  # (M, m): fb @ W = I
    cost = float(np.sum(np.abs(W) ** 2))  # Tr{(fb fb^H)^-1}
    q = P / cost
    cross = rows_true[keep] @ W  # (m, m)
    sig = q * np.abs(np.diagonal(cross)) ** 2
    interf = q * (np.sum(np.abs(cross) ** 2, axis=1) - np.abs(np.diagonal(cross)) ** 2)
    rates = list(np.log1p(sig / (1.0 + interf)))
    return rates, keep, dropped


def run_threshold_eigen_zfbf(snap: Snapshot, P: float, t: float,
                             B: int | None = None) -> SchemeOutcome:
    """Threshold-eigenvalue selection with zero-forcing on eigen-directions.

    Users with lambda_max above t announce membership (one bit); the BS
    serves min(M, set size) of them, picked uniformly, by zero-forcing on
    their effective rows sqrt(lambda) v^H.  With B set, the directions are
    RVQ-quantized to 2^B words and the ZF beams are built from the
    quantized rows while rates are still measured on the true channel;
    without B the eigenvectors are fed back ideally (flagged, not billed).
    """
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    N, M, K = snap.dims
    rng = _scheme_rng(snap.seed, _TAG_EZF)
    qualifying = np.flatnonzero(snap.lambda_max > t)
    rounds = [(0, "membership", int(qualifying.size))]
    if qualifying.size == 0:
        return _zero_outcome(rounds, 0, {"num_qualifying": 0})
    m = min(M, int(qualifying.size))
    sel = np.sort(rng.choice(qualifying, size=m, replace=False))
    lam = snap.lambda_max[sel]
    v = snap.v_max[sel]
    rows_true = np.sqrt(lam)[:, None] * v.conj()

    if B is None:
        rows_fb = rows_true
        rounds.append((1, "eigenvector-ideal", 0))
        thetas = np.ones(m)
    else:
        cb = make_codebook(snap.seed, 2 ** B, M)
        align = np.abs(v.conj() @ cb.words.T) ** 2
        qidx = align.argmax(axis=1)
        thetas = align[np.arange(m), qidx]
        rows_fb = np.sqrt(lam)[:, None] * cb.words[qidx].conj()
        rounds.append((1, "quantized-eigenvector", m * int(B)))

    rates, keep, dropped = _zf_rates(rows_true, rows_fb, P)
    selected = tuple(int(sel[i]) for i in keep)
    return SchemeOutcome(
        selected=selected,
        beams=None,
        per_user_rate=tuple(float(r) for r in rates[: len(selected)]),
        sum_rate=float(math.fsum(rates)),
        feedback=_trace(rounds, int(qualifying.size)),
        fallback_used=False,
        diagnostics={
            "num_qualifying": int(qualifying.size),
            "zf_rows_dropped": dropped,
            "alignments": tuple(float(x) for x in thetas),
        },
    )


def run_algorithm_a(snap: Snapshot, P: float, t: float, beta: float,
                    eps: float, B: int) -> SchemeOutcome:
    """Greedy semi-orthogonal user selection with fixed-codebook RVQ (K < M).

    Users above the eigenvalue threshold quantize their dominant
    eigenvector on a shared 2^B-word codebook.  Round 1 keeps users whose
    quantization alignment exceeds 1-eps; each later round keeps users
    whose true eigenvector is nearly orthogonal (cross alignment below
    beta) to the previously selected user's quantized vector.  One user is
    drawn uniformly per round; ZF beams are placed in the null space of the
    other selected users' quantized vectors, and rates are measured on the
    true channel through each receiver's dominant left singular vector.
    """
    N, M, K = snap.dims
    if K >= M:
        raise InvalidDimensionsError(f"requires K < M, got K={K} M={M}")
    if not 0 < eps < 1 or not 0 < beta < 1:
        raise DomainError(f"eps and beta must be in (0,1), got eps={eps} beta={beta}")
    if B < 1:
        raise DomainError(f"B must be >= 1, got {B}")
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")

    rng = _scheme_rng(snap.seed, _TAG_ALG_A)
    cb = make_codebook(snap.seed, 2 ** B, M)
    s0 = np.flatnonzero(snap.lambda_max > t)
    diag = {"set_sizes": [int(s0.size)]}
    if s0.size == 0:
        return _zero_outcome([(0, "membership", 0)], 0, diag)

    v = snap.v_max[s0]  # (n0, M)
    align = np.abs(v.conj() @ cb.words.T) ** 2
    qidx = align.argmax(axis=1)
    theta = align[np.arange(s0.size), qidx]
    vhat = cb.words[qidx]

    member = theta > 1.0 - eps  # S_1
    rounds = []
    selected_local: list[int] = []
    users_signaling = int(member.sum())
    for m in range(1, M + 1):
        if m > 1:
            prev = selected_local[-1]
            cross = np.abs(v.conj() @ vhat[prev]) ** 2
            member = member & (cross < beta)
        cand = member.copy()
        cand[selected_local] = False
        cands = np.flatnonzero(cand)
        diag["set_sizes"].append(int(cands.size))
        rounds.append((m, "membership", int(cands.size)))
        if cands.size == 0:
            return _zero_outcome(rounds, users_signaling, diag)
        selected_local.append(int(cands[rng.integers(cands.size)]))

    rounds.append((M + 1, "quantized-eigenvector", M * int(B)))
    sel = np.asarray(selected_local)
    Vhat = vhat[sel]  # (M, M), row j is v_hat of user s_j
    A = Vhat.conj()   # rows v_hat^H
    W = np.linalg.pinv(A)
    beams = (W / np.linalg.norm(W, axis=0, keepdims=True)).T  # (M, M), row m = Phi_m

    lam = snap.lambda_max[s0][sel]
    a = np.abs(v[sel].conj() @ beams.T) ** 2  # (M, M): |v_{s_i}^H Phi_j|^2
    own = np.diagonal(a)
    other = a.sum(axis=1) - own
    scale = (P / M) * lam
    sinr = scale * own / (1.0 + scale * other)
    rates = np.log1p(sinr)

    diag["own_alignment"] = tuple(float(x) for x in own)
    diag["alignment_floor"] = tuple(
        1.0 - (3 * M - 2 * m - 1) * beta - 6 * (M - m) * eps for m in range(1, M + 1)
    )
    diag["theta"] = tuple(float(theta[i]) for i in sel)
    diag["max_zf_leak"] = float(
        np.max(np.abs(A @ W - np.eye(M)))
    )
    return SchemeOutcome(
        selected=tuple(int(s0[i]) for i in sel),
        beams=BeamSet(beams=beams),
        per_user_rate=tuple(float(r) for r in rates),
        sum_rate=float(math.fsum(float(r) for r in rates)),
        feedback=_trace(rounds, users_signaling),
        fallback_used=False,
        diagnostics=diag,
    )


def run_algorithm_b(snap: Snapshot, P: float, t: float, eps: float) -> SchemeOutcome:
    """Sequential random orthonormal beams with alignment capture (K = M).

    Users above the eigenvalue threshold listen to M broadcast beams; the
    set for beam m is everyone whose dominant eigenvector aligns with it
    within 1-eps, and one member is served per beam.  Receivers whiten the
    cross-beam interference.  If any beam's set is empty the BS falls back
    to a single random user with isotropic covariance P/M * I.
    """
    N, M, K = snap.dims
    if K != M:
        raise ConfigError(f"requires K = M, got K={K} M={M}")
    if not 0 < eps < 1:
        raise DomainError(f"eps must be in (0,1), got {eps}")
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")

    rng = _scheme_rng(snap.seed, _TAG_ALG_B)
    beams = haar_beams(rng, M)
    s0 = np.flatnonzero(snap.lambda_max > t)
    align = np.abs(snap.v_max[s0].conj() @ beams.T) ** 2  # (n0, M)
    sets = [np.flatnonzero(align[:, m] > 1.0 - eps) for m in range(M)]
    empty = [s.size == 0 for s in sets]
    rounds = [(m + 1, "membership", int(sets[m].size)) for m in range(M)]
    signaling = np.unique(np.concatenate([s0[s] for s in sets])) if s0.size else np.array([])
    diag = {
        "s0_size": int(s0.size),
        "set_sizes": tuple(int(s.size) for s in sets),
        "empty_beams": tuple(bool(e) for e in empty),
    }

    if any(empty):
        user = int(rng.integers(N))
        H = snap.entries[user]
        A = np.eye(K, dtype=complex) + (P / M) * (H @ H.conj().T)
        rate = float(np.linalg.slogdet(A)[1])
        return SchemeOutcome(
            selected=(user,),
            beams=None,
            per_user_rate=(rate,),
            sum_rate=rate,
            feedback=_trace(rounds, signaling.size),
            fallback_used=True,
            diagnostics=diag,
        )

    chosen: list[int] = []
    for m in range(M):
        cands = [int(s0[i]) for i in sets[m] if int(s0[i]) not in chosen]
        if not cands:
            cands = [int(s0[i]) for i in sets[m]]
        chosen.append(cands[int(rng.integers(len(cands)))])

    rates = []
    for m, user in enumerate(chosen):
        H = snap.entries[user]
        hp = H @ beams.T  # column j is H Phi_j
        A_full = np.eye(K, dtype=complex) + (P / M) * (hp @ hp.conj().T)
        hm = hp[:, m][:, None]
        R = A_full - (P / M) * (hm @ hm.conj().T)
        rates.append(float(np.linalg.slogdet(A_full)[1] - np.linalg.slogdet(R)[1]))

    return SchemeOutcome(
        selected=tuple(chosen),
        beams=BeamSet(beams=beams),
        per_user_rate=tuple(rates),
        sum_rate=float(math.fsum(rates)),
        feedback=_trace(rounds, signaling.size),
        fallback_used=False,
        diagnostics=diag,
    )


def run_low_snr_rvq(snap: Snapshot, P: float, f_target: float) -> SchemeOutcome:
    """Single-user eigen-beamforming on a quantized direction (low SNR).

    The eigenvalue threshold and codebook size are tied to the feedback
    budget f_target: t = max(ln N + (M+K-2) ln ln N - ln(f)/2, ln N) and
    L = 2^(sqrt(f)/2).  Each qualifying user reports its quantization
    index; one of them, picked uniformly, gets the full power on its
    quantized eigenvector.
    """
    if P <= 0:
        raise DomainError(f"P must be > 0, got {P}")
    if f_target <= 1:
        raise DomainError(f"f_target must be > 1, got {f_target}")
    N, M, K = snap.dims
    if N < 3:
        raise DomainError(f"N must be >= 3, got {N}")

    t = max(
        math.log(N) + (M + K - 2) * math.log(math.log(N)) - 0.5 * math.log(f_target),
        math.log(N),
    )
    L = max(1, round(2.0 ** (math.sqrt(f_target) / 2.0)))
    bits_per_user = max(1, int(math.ceil(math.log2(L)))) if L > 1 else 1
    cb = make_codebook(snap.seed, L, M)

    qualifying = np.flatnonzero(snap.lambda_max > t)
    rounds = [(0, "quantization-index", int(qualifying.size) * bits_per_user)]
    diag = {"threshold": t, "L": L, "num_qualifying": int(qualifying.size)}
    if qualifying.size == 0:
        return _zero_outcome(rounds, 0, diag)

    rng = _scheme_rng(snap.seed, _TAG_LOW_SNR)
    user = int(qualifying[rng.integers(qualifying.size)])
    v = snap.v_max[user]
    align = np.abs(cb.words @ v.conj()) ** 2
    idx = int(np.argmax(align))
    theta = float(align[idx])
    rate = math.log1p(P * float(snap.lambda_max[user]) * theta)
    diag.update({"theta": theta, "served_lambda": float(snap.lambda_max[user])})
    return SchemeOutcome(
        selected=(user,),
        beams=BeamSet(beams=cb.words[idx][None, :]),
        per_user_rate=(rate,),
        sum_rate=rate,
        feedback=_trace(rounds, int(qualifying.size)),
        fallback_used=False,
        diagnostics=diag,
    )
