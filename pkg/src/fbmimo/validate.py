"""Distribution and bound checks runnable as a self-contained validation suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import quantize
from .channel import ks_distance, lambda_max_tail_approx, sample_snapshot
from .schemes import haar_beams, rbf_sinr_matrix

__all__ = ["CheckResult", "run_validation_suite", "all_passed", "format_report"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    statistic: float
    threshold: float
    samples: int
    detail: str = ""


def _fresh_codebook_thetas(rng, n: int, M: int, L: int) -> np.ndarray:
    """n best alignments, each against its own freshly drawn L-word codebook."""
    v = rng.standard_normal((n, M)) + 1j * rng.standard_normal((n, M))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    out = np.empty(n)
    chunk = max(1, 2_000_000 // (L * M))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        c = rng.standard_normal((hi - lo, L, M)) + 1j * rng.standard_normal((hi - lo, L, M))
        c /= np.linalg.norm(c, axis=2, keepdims=True)
        a = np.abs(np.einsum("nm,nlm->nl", v[lo:hi].conj(), c)) ** 2
        out[lo:hi] = a.max(axis=1)
    return out


def _check_row_norm(seed, budget, M, K, override):
    n_users = max(1, math.ceil(budget / K))
    snap = sample_snapshot(seed, n_users, M, K)
    norms = np.sum(np.abs(snap.entries) ** 2, axis=2).reshape(-1)[:budget]
    cdf = override or (lambda t: special.gammainc(M, np.maximum(t, 0.0)))
    stat = ks_distance(norms, cdf)
    thr = max(0.01, 1.63 / math.sqrt(norms.size))
    return CheckResult(
        name=f"row-norm-cdf-M{M}K{K}",
        passed=stat < thr,
        statistic=float(stat),
        threshold=thr,
        samples=int(norms.size),
        detail="KS distance, squared row norms vs Gamma(M,1) CDF",
    )


def _check_energy(seed, budget):
    M, K = 3, 2
    snap = sample_snapshot(seed + 1, max(1, budget // 2), M, K)
    mean = float(np.mean(np.sum(np.abs(snap.entries) ** 2, axis=(1, 2))))
    stat = abs(mean / (M * K) - 1.0)
    return CheckResult(
        name="channel-energy",
        passed=stat < 0.01,
        statistic=stat,
        threshold=0.01,
        samples=snap.num_users,
        detail="relative error of mean ||H||^2 vs M*K",
    )


def _check_lambda_tail(seed, budget):
    M = K = 2
    t = 10.0
    n = min(10 * budget, 1_000_000)
    hits = 0
    done = 0
    block = 100_000
    i = 0
    while done < n:
        take = min(block, n - done)
        snap = sample_snapshot(seed + 101 + i, take, M, K)
        hits += int(np.sum(snap.lambda_max > t))
        done += take
        i += 1
    emp = hits / n
    ref = lambda_max_tail_approx(t, M, K)
    stat = abs(emp / ref - 1.0)
    return CheckResult(
        name="lambda-max-tail",
        passed=stat < 0.15,
        statistic=stat,
        threshold=0.15,
        samples=n,
        detail=f"relative error of Pr(lambda_max > {t}) vs the tail formula",
    )


def _check_rbf_sinr(seed, budget, override):
    M, P = 2, 10.0
    snap = sample_snapshot(seed + 2, budget, M, 1)
    rng = np.random.Generator(np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, 0xBEA3], dtype=np.uint64)))
    beams = haar_beams(rng, M)
    sinr = rbf_sinr_matrix(snap.entries.reshape(-1, M), beams, P)[:, 0]
    cdf = override or (lambda x: 1.0 - np.exp(-M * x / P) / (1.0 + x) ** (M - 1))
    stat = ks_distance(sinr, cdf)
    thr = max(0.01, 1.63 / math.sqrt(sinr.size))
    return CheckResult(
        name="rbf-sinr-cdf",
        passed=stat < thr,
        statistic=float(stat),
        threshold=thr,
        samples=int(sinr.size),
        detail="KS distance, per-antenna SINR vs closed-form CDF (M=2, P=10)",
    )


def _check_rvq_theta_cdf(seed, budget, override):
    M, L = 2, 16
    n = max(10_000, budget // 10)
    rng = np.random.Generator(np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, 0x7E7A], dtype=np.uint64)))
    thetas = _fresh_codebook_thetas(rng, n, M, L)
    cdf = override or (lambda x: quantize.theta_cdf(float(min(max(x, 0.0), 1.0)), M, L))
    stat = ks_distance(thetas, cdf)
    thr = max(0.015, 1.63 / math.sqrt(n))
    return CheckResult(
        name="rvq-theta-cdf",
        passed=stat < thr,
        statistic=float(stat),
        threshold=thr,
        samples=n,
        detail=f"KS distance, best codebook alignment vs closed-form CDF (M={M}, L={L})",
    )


def _check_rvq_mean_theta(seed, budget):
    n = max(200, budget // 10)
    rng = np.random.Generator(np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, 0x7E7B], dtype=np.uint64)))
    worst = math.inf
    for M, L in [(2, 64), (3, 16), (4, 4)]:
        emp = float(np.mean(_fresh_codebook_thetas(rng, n, M, L)))
        worst = min(worst, emp - quantize.expected_theta_lower_bound(M, L))
    return CheckResult(
        name="rvq-mean-theta-bound",
        passed=worst >= 0.0,
        statistic=worst,
        threshold=0.0,
        samples=3 * n,
        detail="min over (M,L) of sample E{theta} minus the closed-form lower bound",
    )


def _check_projected_residual_bound(seed, budget):
    M, i, N, L, theta = 3, 1, 8, 4, 0.1
    trials = max(500, budget // 20)
    mu = quantize.min_projected_residual_samples(seed + 3, trials, N, M, i, L)
    emp = float(np.mean(mu > theta))
    se = math.sqrt(max(emp * (1 - emp), 1e-12) / trials)
    bound = quantize.epsilon_error_prob_lower_bound(theta, L, M, i, N)
    stat = emp - (bound - 2 * se)
    return CheckResult(
        name="projected-residual-bound",
        passed=stat >= 0.0,
        statistic=stat,
        threshold=0.0,
        samples=trials,
        detail="empirical exceedance prob minus (lower bound - 2 stderr)",
    )


def run_validation_suite(seed: int = 0, budget: int = 100_000,
                         cdf_override: dict | None = None) -> list[CheckResult]:
    """Run all distribution/bound checks; cdf_override (name -> callable)
    substitutes a reference CDF, which exists to let the harness self-test
    that a wrong law actually fails."""
    ov = cdf_override or {}
    checks = []
    for M, K in [(2, 1), (3, 2), (4, 4)]:
        checks.append(
            _check_row_norm(seed, budget, M, K, ov.get(f"row-norm-cdf-M{M}K{K}"))
        )
    checks.append(_check_energy(seed, budget))
    checks.append(_check_lambda_tail(seed, budget))
    checks.append(_check_rbf_sinr(seed, budget, ov.get("rbf-sinr-cdf")))
    checks.append(_check_rvq_theta_cdf(seed, budget, ov.get("rvq-theta-cdf")))
    checks.append(_check_rvq_mean_theta(seed, budget))
    checks.append(_check_projected_residual_bound(seed, budget))
    return checks


def all_passed(checks) -> bool:
    return all(c.passed for c in checks)


def format_report(checks) -> str:
    lines = []
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        lines.append(
            f"{status} {c.name}: statistic={c.statistic:.6g} "
            f"threshold={c.threshold:.6g} n={c.samples} ({c.detail})"
        )
    return "\n".join(lines)
