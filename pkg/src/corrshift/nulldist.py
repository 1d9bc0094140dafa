"""Closed-form null expectation of the squared-Frobenius distance, with
Monte Carlo oracles validating it.

Under H0 the panel columns are i.i.d. MVN(0, Sigma) and

    E[d(k)] = (1/k + 1/(T-k)) * (tr(Sigma^2) + tr(Sigma)^2).

The Monte Carlo oracles draw raw (non-standardized) normal panels, matching
the hypothesis of the closed form exactly; the detector path standardizes,
so the two differ by a small, documented amount.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadRange, CholeskyFailure
from .metrics import CovMatrix, DistanceMetricKind, _profile_arrays, candidate_ks

# Memory cap for one chunk of Monte Carlo panels.
_MC_BUDGET_BYTES = 128 * 1024 * 1024


def _sigma_values(sigma):
    if isinstance(sigma, CovMatrix):
        return sigma.values
    return np.asarray(sigma, dtype=np.float64)


def _traces(sigma):
    values = _sigma_values(sigma)
    tr2 = float((values * values).sum())
    trsq = float(np.trace(values)) ** 2
    return tr2, trsq


@dataclass(frozen=True)
class NullExpectationCurve:
    """E[d(k)] for k = 2..T-1 under MVN(0, Sigma) columns."""

    T: int
    sigma_tr2: float
    sigma_trsq: float
    k_values: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    std_error: float


@dataclass(frozen=True)
class MonteCarloCurve:
    """Monte Carlo mean and standard error of d(k) at every k in 2..T-1."""

    k_values: np.ndarray
    means: np.ndarray
    std_errors: np.ndarray
    reps: int


def expected_null_distance(sigma, T: int, k: int) -> float:
    """Closed-form E[d(k)] = (1/k + 1/(T-k)) (tr(Sigma^2) + tr(Sigma)^2).

    Raises
    ------
    BadRange
        Unless 2 <= k <= T-1.
    """
    if not 2 <= k <= T - 1:
        raise BadRange(f"k must be in [2, T-1] = [2, {T - 1}], got {k}")
    tr2, trsq = _traces(sigma)
    return (1.0 / k + 1.0 / (T - k)) * (tr2 + trsq)


def null_expectation_curve(sigma, T: int) -> NullExpectationCurve:
    """The full E[d(k)] curve, symmetric in k and T-k, minimized at T/2."""
    if T < 3:
        raise BadRange(f"need T >= 3, got {T}")
    tr2, trsq = _traces(sigma)
    ks = np.arange(2, T, dtype=np.int64)
    kf = ks.astype(np.float64)
    values = (1.0 / kf + 1.0 / (T - kf)) * (tr2 + trsq)
    return NullExpectationCurve(T=T, sigma_tr2=tr2, sigma_trsq=trsq, k_values=ks, values=values)


def _factor(sigma):
    """Cholesky factor, with eigenvalue clipping for PSD-but-singular input.

    The clipped fallback lives only in this generator; estimators never
    regularize silently.
    """
    values = _sigma_values(sigma)
    try:
        return np.linalg.cholesky(values)
    except np.linalg.LinAlgError:
        eigs, vecs = np.linalg.eigh(values)
        if eigs[0] < -1e-8 * max(eigs[-1], 0.0):
            raise CholeskyFailure("covariance is not positive semidefinite") from None
        return vecs * np.sqrt(np.clip(eigs, 1e-12, None))


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def monte_carlo_null_distance(sigma, T: int, k: int, reps: int, rng=None) -> MonteCarloEstimate:
    """Sample mean and standard error of d(k) over i.i.d. MVN(0, Sigma) panels.

    Panels are NOT standardized: the closed form assumes raw mean-zero
    normal columns. d is the squared-Frobenius distance between the
    uncentered segment covariances on either side of k.

    Raises
    ------
    CholeskyFailure
        If Sigma is not positive semidefinite.
    """
    if reps < 100:
        raise ValueError(f"reps must be >= 100, got {reps}")
    if not 2 <= k <= T - 1:
        raise BadRange(f"k must be in [2, T-1] = [2, {T - 1}], got {k}")
    factor = _factor(sigma)
    n = factor.shape[0]
    rng = _as_rng(rng)
    chunk = max(1, int(_MC_BUDGET_BYTES // (2 * n * T * 8)))
    d_all = np.empty(reps)
    done = 0
    while done < reps:
        c = min(chunk, reps - done)
        panels = np.einsum("ij,cjt->cit", factor, rng.standard_normal((c, n, T)))
        left = panels[:, :, :k]
        right = panels[:, :, k:]
        s_left = np.matmul(left, left.transpose(0, 2, 1)) / k
        s_right = np.matmul(right, right.transpose(0, 2, 1)) / (T - k)
        diff = s_left - s_right
        d_all[done : done + c] = (diff * diff).sum(axis=(1, 2))
        done += c
    return MonteCarloEstimate(
        mean=float(d_all.mean()),
        std_error=float(d_all.std(ddof=1) / np.sqrt(reps)),
    )


def monte_carlo_null_curve(sigma, T: int, reps: int, rng=None) -> MonteCarloCurve:
    """Monte Carlo E[d(k)] at every k in 2..T-1, one pass per panel.

    Each replicate contributes its whole distance profile, so 10000
    replicates cost one profile computation each rather than one per k.
    """
    if reps < 100:
        raise ValueError(f"reps must be >= 100, got {reps}")
    factor = _factor(sigma)
    n = factor.shape[0]
    rng = _as_rng(rng)
    ks = candidate_ks(T, 1)
    sums = np.zeros(ks.size)
    sq_sums = np.zeros(ks.size)
    chunk = max(1, int(_MC_BUDGET_BYTES // (3 * T * n * n * 8)))
    done = 0
    while done < reps:
        c = min(chunk, reps - done)
        panels = np.einsum("ij,cjt->cit", factor, rng.standard_normal((c, n, T)))
        d = _profile_arrays(panels, 1, [DistanceMetricKind.FROBENIUS_SQ])[
            DistanceMetricKind.FROBENIUS_SQ
        ]
        sums += d.sum(axis=0)
        sq_sums += (d * d).sum(axis=0)
        done += c
    means = sums / reps
    variances = (sq_sums - reps * means * means) / (reps - 1)
    return MonteCarloCurve(
        k_values=ks,
        means=means,
        std_errors=np.sqrt(np.maximum(variances, 0.0) / reps),
        reps=reps,
    )
