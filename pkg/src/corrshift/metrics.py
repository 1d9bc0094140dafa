"""Segment covariances, covariance-distance metrics, and distance profiles.

The segment covariance over [i, j] is the average of column outer products
S(i,j) = sum_{t=i..j} Y_t Y_t' / (j-i+1), with no re-centering inside the
segment. Distance profiles scan d(k) = dist(S(1,k), S(k+1,T)) over the
candidate set {k : 1+delta <= k <= T-delta}.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BadRange, InsufficientLength, ShapeMismatch, SingularCovariance
from .panel import SeriesPanel


class DistanceMetricKind(str, Enum):
    """Closed set of covariance-distance metrics."""

    FROBENIUS_SQ = "frobenius"
    MAX_ABS = "max"
    LIKELIHOOD_RATIO = "lr"


@dataclass(frozen=True)
class CovMatrix:
    """Symmetric PSD matrix, optionally tagged with the time range it summarizes.

    Parameters
    ----------
    values : ndarray, shape (n, n)
        Symmetric within 1e-10; smallest eigenvalue >= -1e-8 * largest.
    segment : tuple (i, j), optional
        Inclusive 1-based column range the matrix was estimated from.
        None for synthetic matrices that summarize no data range.
    """

    values: np.ndarray
    segment: tuple = None

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"covariance must be square, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("covariance entries must be finite")
        if np.abs(values - values.T).max() > 1e-10:
            raise ValueError("covariance is not symmetric within 1e-10")
        eigs = np.linalg.eigvalsh(values)
        if eigs[0] < -1e-8 * max(eigs[-1], 0.0):
            raise ValueError("covariance is not positive semidefinite within tolerance")
        object.__setattr__(self, "values", values)
        if self.segment is not None:
            i, j = self.segment
            if not (1 <= i <= j):
                raise ValueError(f"bad segment {self.segment}")
            object.__setattr__(self, "segment", (int(i), int(j)))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def length(self):
        """Number of time points summarized, or None for synthetic matrices."""
        if self.segment is None:
            return None
        return self.segment[1] - self.segment[0] + 1


@dataclass(frozen=True)
class DistanceProfile:
    """Observed distance d(k) over the candidate change points.

    k_values is exactly {k : 1+delta <= k <= T-delta}, ascending.
    """

    kind: DistanceMetricKind
    delta: int
    k_values: np.ndarray
    d_values: np.ndarray


def segment_covariance(panel: SeriesPanel, i: int, j: int) -> CovMatrix:
    """Average of column outer products over the inclusive range [i, j].

    Raises
    ------
    BadRange
        If not 1 <= i < j <= T.
    """
    if not panel.standardized:
        raise ValueError("segment_covariance expects a standardized panel")
    if not (1 <= i < j <= panel.T):
        raise BadRange(f"range ({i}, {j}) invalid for T={panel.T}")
    block = panel.values[:, i - 1 : j]
    cov = block @ block.T / (j - i + 1)
    cov = (cov + cov.T) / 2.0
    return CovMatrix(cov, segment=(i, j))


def pooled_segment_covariance(panels, i: int, j: int) -> CovMatrix:
    """Elementwise mean of segment_covariance over replicate panels.

    All panels must share n and T and be standardized.
    """
    if not panels:
        raise ValueError("need at least one panel")
    shape = panels[0].values.shape
    for idx, p in enumerate(panels):
        if p.values.shape != shape:
            raise ShapeMismatch(
                f"panel {idx + 1} has shape {p.values.shape}, expected {shape}"
            )
    total = np.zeros((shape[0], shape[0]))
    for p in panels:
        total += segment_covariance(p, i, j).values
    return CovMatrix(total / len(panels), segment=(i, j))


def _chol_logdet(mats, segment_for):
    """Log-determinants of a (..., K, n, n) stack via Cholesky.

    On failure, identifies the first offending candidate index and raises
    SingularCovariance named by segment_for(q).
    """
    try:
        factors = np.linalg.cholesky(mats)
    except np.linalg.LinAlgError:
        flat = mats.reshape(-1, *mats.shape[-3:])
        for q in range(flat.shape[1]):
            try:
                np.linalg.cholesky(flat[:, q])
            except np.linalg.LinAlgError:
                raise SingularCovariance(segment_for(q)) from None
        raise SingularCovariance(segment_for(0)) from None
    diags = np.einsum("...ii->...i", factors)
    return 2.0 * np.log(diags).sum(axis=-1)


def distance(a: CovMatrix, b: CovMatrix, kind: DistanceMetricKind, full: CovMatrix = None) -> float:
    """Distance between two covariance matrices of equal order.

    FROBENIUS_SQ is the squared Frobenius norm of the difference (the
    squared form is used uniformly so the null expectation is directly
    checkable). MAX_ABS is the largest absolute entry of the difference.
    LIKELIHOOD_RATIO is -2 log Lambda_k, which needs `full` = S(1,T) and
    segment-tagged a = S(1,k), b = S(k+1,T); larger values mean more
    evidence of change.

    Raises
    ------
    ShapeMismatch
        If orders differ.
    SingularCovariance
        If a log-determinant is required of a matrix whose Cholesky
        factorization fails.
    """
    if a.values.shape != b.values.shape:
        raise ShapeMismatch(f"orders differ: {a.values.shape} vs {b.values.shape}")
    kind = DistanceMetricKind(kind)
    if kind is DistanceMetricKind.FROBENIUS_SQ:
        diff = a.values - b.values
        return float((diff * diff).sum())
    if kind is DistanceMetricKind.MAX_ABS:
        return float(np.abs(a.values - b.values).max())
    if full is None:
        raise ValueError("likelihood-ratio distance needs full=S(1,T)")
    if a.length is None or b.length is None:
        raise ValueError("likelihood-ratio distance needs segment-tagged covariances")
    if full.values.shape != a.values.shape:
        raise ShapeMismatch("full-range covariance order differs")
    k = a.length
    T = a.length + b.length

    def _ld(cov, seg):
        return float(_chol_logdet(cov.values[None], lambda q: seg)[0])

    ld_full = _ld(full, (1, T))
    ld_left = _ld(a, a.segment)
    ld_right = _ld(b, b.segment)
    return (T - 1) * ld_full - (k - 1) * ld_left - (T - k - 1) * ld_right


def candidate_ks(T: int, delta: int) -> np.ndarray:
    """Candidate change points: {k : 1+delta <= k <= T-delta}."""
    return np.arange(delta + 1, T - delta + 1, dtype=np.int64)


def _check_profile_args(n, T, delta, kinds):
    if delta < 1:
        raise ValueError(f"delta must be >= 1, got {delta}")
    if T <= 2 * delta + 1:
        raise InsufficientLength(
            f"T={T} leaves no candidate range for delta={delta}; need T >= {2 * delta + 2}"
        )
    if DistanceMetricKind.LIKELIHOOD_RATIO in kinds and delta < n + 1:
        raise ValueError(
            f"likelihood-ratio metric needs delta >= n+1 = {n + 1} to keep segment "
            f"covariances well conditioned, got delta={delta}"
        )


def _outer_prefix(values):
    """Cumulative sums of column outer products.

    values has shape (..., n, T); the result A has shape (..., T, n, n)
    with A[..., t, :, :] = sum_{u<=t} Y_u Y_u'. One pass of this prefix sum
    serves every candidate k, replacing naive per-k recomputation.
    """
    outer = np.einsum("...it,...jt->...tij", values, values)
    return np.cumsum(outer, axis=-3)


def _profiles_from_prefix(A, delta, kinds):
    """d(k) profiles for each requested metric from a prefix stack.

    A has shape (..., T, n, n). Returns {kind: d} with d of shape (..., K).
    For the likelihood-ratio metric the offending segment is named in the
    error if any Cholesky factorization fails.
    """
    T = A.shape[-3]
    ks = candidate_ks(T, delta)
    kf = ks.astype(np.float64)
    left = A[..., delta : T - delta, :, :]
    full = A[..., T - 1, :, :]
    c1 = 1.0 / kf + 1.0 / (T - kf)
    c2 = 1.0 / (T - kf)
    out = {}
    for kind in kinds:
        kind = DistanceMetricKind(kind)
        if kind is DistanceMetricKind.FROBENIUS_SQ:
            q_left = np.einsum("...kij,...kij->...k", left, left)
            q_cross = np.einsum("...kij,...ij->...k", left, full)
            q_full = np.einsum("...ij,...ij->...", full, full)[..., None]
            d = c1 * c1 * q_left - 2.0 * c1 * c2 * q_cross + c2 * c2 * q_full
            # the expansion of ||c1*A_k - c2*A_T||^2 can cancel to tiny
            # negatives when the segments nearly agree; d(k) is >= 0
            out[kind] = np.maximum(d, 0.0)
        elif kind is DistanceMetricKind.MAX_ABS:
            diff = c1[:, None, None] * left - c2[:, None, None] * full[..., None, :, :]
            out[kind] = np.abs(diff).max(axis=(-2, -1))
        else:
            s_left = left / kf[:, None, None]
            s_right = (full[..., None, :, :] - left) / (T - kf)[:, None, None]
            ld_left = _chol_logdet(s_left, lambda q: (1, int(ks[q])))
            ld_right = _chol_logdet(s_right, lambda q: (int(ks[q]) + 1, T))
            ld_full = _chol_logdet(full[..., None, :, :] / T, lambda q: (1, T))[..., 0]
            out[kind] = (
                (T - 1) * ld_full[..., None]
                - (kf - 1.0) * ld_left
                - (T - kf - 1.0) * ld_right
            )
    return out


def _profile_arrays(values, delta, kinds):
    """Profiles for a raw (..., n, T) value stack; no standardization applied."""
    return _profiles_from_prefix(_outer_prefix(values), delta, kinds)


def distance_profile(panel: SeriesPanel, kind: DistanceMetricKind, delta: int) -> DistanceProfile:
    """Observed d(k) at every candidate k, via incremental prefix sums.

    Raises
    ------
    InsufficientLength
        If T <= 2*delta + 1.
    SingularCovariance
        Propagated from the likelihood-ratio metric.
    """
    if not panel.standardized:
        raise ValueError("distance_profile expects a standardized panel")
    kind = DistanceMetricKind(kind)
    delta = int(delta)
    _check_profile_args(panel.n, panel.T, delta, [kind])
    d = _profile_arrays(panel.values, delta, [kind])[kind]
    return DistanceProfile(
        kind=kind,
        delta=delta,
        k_values=candidate_ks(panel.T, delta),
        d_values=d,
    )


def threshold_network(cov: CovMatrix, tau: float = None, *, top_m: int = None):
    """Edges (u, v), u < v, 1-based, from thresholding a correlation matrix.

    Exactly one of tau (keep |corr| > tau) and top_m (choose the cut so the
    m largest |corr| survive; ties at the cut are all included, so the
    result may exceed m) must be given.
    """
    if (tau is None) == (top_m is None):
        raise ValueError("pass exactly one of tau and top_m")
    values = cov.values
    if np.abs(np.diag(values) - 1.0).max() > 1e-8:
        raise ValueError("threshold_network expects a correlation matrix (unit diagonal)")
    iu, iv = np.triu_indices(values.shape[0], k=1)
    mags = np.abs(values[iu, iv])
    if tau is not None:
        if not 0.0 < tau < 1.0:
            raise ValueError(f"tau must be in (0,1), got {tau}")
        keep = mags > tau
    else:
        if not 1 <= top_m <= mags.size:
            raise ValueError(f"top_m must be in [1, {mags.size}], got {top_m}")
        cut = np.sort(mags)[-top_m]
        keep = mags >= cut
    return [(int(u) + 1, int(v) + 1) for u, v in zip(iu[keep], iv[keep])]


def edge_csv(cov: CovMatrix, edges) -> str:
    """Serialize an edge list as CSV rows node_u,node_v,correlation."""
    lines = ["node_u,node_v,correlation"]
    for u, v in edges:
        lines.append(f"{u},{v},{float(cov.values[u - 1, v - 1])!r}")
    return "\n".join(lines) + "\n"
