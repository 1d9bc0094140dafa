"""Bootstrap scan statistic, p-values, and recursive binary segmentation.

The scan computes the observed distance profile d(k), simulates its null
distribution by resampling B panels under H0, standardizes both through the
bootstrap moments, and compares the observed maximum z-score Z against the
bootstrap maxima Z^(b). Everything is deterministic given the master seed:
replicate b of panel l draws from a stream keyed (seed, b, l), so results
are byte-identical regardless of chunking or thread count.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._streams import derive_seed, stream, thread_count
from .bootstrap import Iid, Sieve, _centered_residuals, _regenerate, fit_ar_yule_walker
from .errors import ConstantRow, ShapeMismatch, SingularCovariance
from .metrics import (
    DistanceMetricKind,
    _check_profile_args,
    _outer_prefix,
    _profiles_from_prefix,
    candidate_ks,
)
from .panel import SeriesPanel, _standardize_rows

# Bootstrap moment floor: below this the null is degenerate and z is pinned to 0.
_SIGMA_FLOOR = 1e-12
# Memory budget for one in-flight replicate chunk (split across worker threads).
_CHUNK_BUDGET_BYTES = 256 * 1024 * 1024


@dataclass(frozen=True)
class DetectorConfig:
    """Scan configuration.

    delta defaults to n (n+1 for the likelihood-ratio metric, its
    conditioning floor) and min_segment to 2*delta+2, both resolved
    against the panel at scan time.
    """

    metric: DistanceMetricKind = DistanceMetricKind.FROBENIUS_SQ
    delta: int = None
    b_count: int = 500
    alpha: float = 0.05
    mode: object = Iid()
    seed: int = 0
    max_depth: int = 8
    min_segment: int = None

    def __post_init__(self):
        object.__setattr__(self, "metric", DistanceMetricKind(self.metric))
        if self.b_count < 100:
            raise ValueError(f"b_count must be >= 100, got {self.b_count}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0,1), got {self.alpha}")
        if self.delta is not None and self.delta < 1:
            raise ValueError(f"delta must be >= 1, got {self.delta}")
        if not isinstance(self.mode, (Iid, Sieve)):
            raise ValueError(f"mode must be Iid or Sieve, got {self.mode!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a non-negative 64-bit integer")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")

    def resolved_delta(self, n: int) -> int:
        if self.delta is not None:
            return int(self.delta)
        if self.metric is DistanceMetricKind.LIKELIHOOD_RATIO:
            return n + 1
        return n

    def resolved_min_segment(self, delta: int) -> int:
        if self.min_segment is None:
            return 2 * delta + 2
        if self.min_segment < 2 * delta + 2:
            raise ValueError(
                f"min_segment must be >= 2*delta+2 = {2 * delta + 2}, got {self.min_segment}"
            )
        return int(self.min_segment)


@dataclass(frozen=True)
class ScanProfile:
    """Observed profile, bootstrap null moments, and z-scores for one scan.

    Fields
    ------
    k_values : candidate change points 1+delta..T-delta.
    d_values : observed d(k).
    mu0, sigma0 : bootstrap mean and (B-1)-divisor standard deviation of
        d^(b)(k) at each k.
    z_values : (d - mu0) / sigma0, pinned to 0 where degenerate.
    z_observed_max : Z = max_k z(k).
    z_argmax : the k attaining Z (smallest such k on ties).
    boot_maxima : the B bootstrap maxima Z^(b) = max_k z^(b)(k).
    boot_z_envelope : per-k max over b of z^(b)(k), for profile plots.
    degenerate : mask of candidates where sigma0 < 1e-12 (z pinned to 0).
    """

    kind: DistanceMetricKind
    delta: int
    k_values: np.ndarray
    d_values: np.ndarray
    mu0: np.ndarray
    sigma0: np.ndarray
    z_values: np.ndarray
    z_observed_max: float
    z_argmax: int
    boot_maxima: np.ndarray
    boot_z_envelope: np.ndarray
    degenerate: np.ndarray


@dataclass(frozen=True)
class Detection:
    """detect_single outcome: the argmax candidate and its significance."""

    location: int
    z: float
    p_value: float
    significant: bool
    profile: ScanProfile


@dataclass(frozen=True)
class ChangePoint:
    location: int
    z: float
    p_value: float
    segment: tuple
    depth: int


@dataclass(frozen=True)
class AbortedBranch:
    """A recursion branch terminated by a numeric error, kept for the report."""

    segment: tuple
    depth: int
    reason: str


@dataclass(frozen=True)
class ChangePointReport:
    """Recursive detection result.

    points are sorted by location; every p_value is <= alpha; total_tests
    counts the scans actually performed. root_profile is the depth-0 scan
    profile (for plotting and CSV export).
    """

    points: tuple
    config: DetectorConfig
    n: int
    T: int
    total_tests: int
    aborted: tuple
    root_profile: ScanProfile


def _fits_for(values, order):
    """Per-panel AR fits for sieve mode; values has shape (L, n, T)."""
    fits = []
    for l in range(values.shape[0]):
        panel = SeriesPanel(values[l], standardized=True)
        fits.append(fit_ar_yule_walker(panel, order))
    return fits


def _generate_chunk(values, mode, fits, seed, ids):
    """Replicate panels for bootstrap ids, shape (len(ids), L, n, T).

    Replicate b of panel l consumes exactly one stream keyed (seed, b, l),
    identically whether generated here or through the public one-replicate
    resamplers, so chunking never changes results.
    """
    L, n, T = values.shape
    count = len(ids)
    if isinstance(mode, Iid):
        raw = np.empty((count, L, n, T))
        for row, b in enumerate(ids):
            for l in range(L):
                idx = stream(seed, b, l).integers(0, T, size=T)
                raw[row, l] = values[l][:, idx]
        return raw
    s = mode.order
    if s == 0:
        raw = np.empty((count, L, n, T))
        for row, b in enumerate(ids):
            for l in range(L):
                idx = stream(seed, b, l).integers(0, T, size=T)
                raw[row, l] = fits[l].residuals[:, idx]
        return raw
    raw = np.empty((count, L, n, T))
    for l in range(L):
        eps = _centered_residuals(fits[l])
        idx = np.empty((count, T - s), dtype=np.int64)
        for row, b in enumerate(ids):
            idx[row] = stream(seed, b, l).integers(0, T - s, size=T - s)
        innovations = eps[:, idx].transpose(1, 0, 2)
        first = np.broadcast_to(values[l][:, :s], (count, n, s))
        raw[:, l] = _regenerate(first, fits[l].coefficients, innovations)
    return raw


def _chunk_size(L, n, T, kinds):
    weight = 3.0
    if DistanceMetricKind.LIKELIHOOD_RATIO in kinds:
        weight = 6.0
    per_replicate = weight * L * T * n * n * 8
    budget = _CHUNK_BUDGET_BYTES / max(thread_count(), 1)
    return max(1, int(budget // per_replicate))


def _scan_arrays(values, config: DetectorConfig, kinds):
    """Core scan on a standardized (L, n, T) stack; pooled when L > 1.

    Returns {kind: ScanProfile}. Sharing one bootstrap across several kinds
    gives each exactly the profile it would get from a solo scan with the
    same seed, since replicate panels depend only on the seed.
    """
    L, n, T = values.shape
    delta = config.resolved_delta(n)
    kinds = [DistanceMetricKind(k) for k in kinds]
    _check_profile_args(n, T, delta, kinds)
    B = config.b_count
    seed = int(config.seed)

    fits = None
    if isinstance(config.mode, Sieve):
        fits = _fits_for(values, config.mode.order)

    observed_prefix = _outer_prefix(values).mean(axis=0)
    d_obs = _profiles_from_prefix(observed_prefix, delta, kinds)

    ks = candidate_ks(T, delta)
    d_boot = {kind: np.empty((B, ks.size)) for kind in kinds}

    def run_chunk(ids):
        raw = _generate_chunk(values, config.mode, fits, seed, ids)
        replicates = _standardize_rows(raw)
        prefix = _outer_prefix(replicates).mean(axis=1)
        profiles = _profiles_from_prefix(prefix, delta, kinds)
        for kind in kinds:
            d_boot[kind][ids[0] : ids[-1] + 1] = profiles[kind]

    size = _chunk_size(L, n, T, kinds)
    chunks = [list(range(b0, min(b0 + size, B))) for b0 in range(0, B, size)]
    workers = thread_count()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, chunks))
    else:
        for chunk in chunks:
            run_chunk(chunk)

    out = {}
    for kind in kinds:
        boot = d_boot[kind]
        mu0 = boot.mean(axis=0)
        sigma0 = boot.std(axis=0, ddof=1)
        degenerate = sigma0 < _SIGMA_FLOOR
        safe = np.where(degenerate, 1.0, sigma0)
        z_obs = np.where(degenerate, 0.0, (d_obs[kind] - mu0) / safe)
        z_boot = np.where(degenerate, 0.0, (boot - mu0) / safe)
        argmax = int(np.argmax(z_obs))
        out[kind] = ScanProfile(
            kind=kind,
            delta=delta,
            k_values=ks,
            d_values=d_obs[kind],
            mu0=mu0,
            sigma0=sigma0,
            z_values=z_obs,
            z_observed_max=float(z_obs[argmax]),
            z_argmax=int(ks[argmax]),
            boot_maxima=z_boot.max(axis=1),
            boot_z_envelope=z_boot.max(axis=0),
            degenerate=degenerate,
        )
    return out


def scan(panel: SeriesPanel, config: DetectorConfig) -> ScanProfile:
    """Full bootstrap scan of one standardized panel.

    Raises
    ------
    InsufficientLength
        If T <= 2*delta + 1.
    SingularCovariance
        From the likelihood-ratio metric, naming the offending segment.
    """
    if not panel.standardized:
        raise ValueError("scan expects a standardized panel")
    return _scan_arrays(panel.values[None], config, [config.metric])[config.metric]


def scan_pooled(panels, config: DetectorConfig) -> ScanProfile:
    """Scan with every covariance pooled (averaged elementwise) over panels.

    Bootstrap replicates resample each panel independently; sieve mode fits
    one AR filter per panel. A single-panel list is identical to scan.
    """
    if not panels:
        raise ValueError("need at least one panel")
    shape = panels[0].values.shape
    for i, p in enumerate(panels):
        if p.values.shape != shape:
            raise ShapeMismatch(f"panel {i + 1} has shape {p.values.shape}, expected {shape}")
        if not p.standardized:
            raise ValueError("scan_pooled expects standardized panels")
    stacked = np.stack([p.values for p in panels])
    return _scan_arrays(stacked, config, [config.metric])[config.metric]


def p_value(profile: ScanProfile) -> float:
    """Fraction of bootstrap maxima at least as large as the observed Z.

    Always a multiple of 1/B; 0 means no bootstrap maximum reached Z and is
    displayed as "< 1/B" by format_p_value.
    """
    count = int((profile.boot_maxima >= profile.z_observed_max).sum())
    return count / profile.boot_maxima.size


def format_p_value(p: float, b_count: int) -> str:
    """Human-readable p-value; exact zero renders as the resolution bound."""
    if p == 0.0:
        return f"< {1.0 / b_count:.10g}"
    return f"{p:.10g}"


def detect_single(panel: SeriesPanel, config: DetectorConfig) -> Detection:
    """Scan once and test the argmax candidate at level alpha.

    The location is the smallest k attaining the maximum z-score;
    significant is true iff the bootstrap p-value is <= alpha.
    """
    profile = scan(panel, config)
    p = p_value(profile)
    return Detection(
        location=profile.z_argmax,
        z=profile.z_observed_max,
        p_value=p,
        significant=p <= config.alpha,
        profile=profile,
    )


def detect_recursive(panel: SeriesPanel, config: DetectorConfig) -> ChangePointReport:
    """Binary segmentation: test, split at the found point, recurse on halves.

    Sub-segments are re-standardized and re-scanned with fresh bootstrap
    replicates at the same level alpha (no multiplicity correction). Each
    sub-scan derives its seed from (master seed, segment start, segment
    end), so results do not depend on traversal order. Recursion into a
    segment stops when it is shorter than min_segment or at max_depth; a
    SingularCovariance or ConstantRow inside a sub-segment terminates only
    that branch and is recorded.
    """
    if not panel.standardized:
        raise ValueError("detect_recursive expects a standardized panel")
    n, T = panel.values.shape
    delta = config.resolved_delta(n)
    min_segment = config.resolved_min_segment(delta)
    master = int(config.seed)

    points = []
    aborted = []
    tests = 0
    root_profile = None

    def visit(start, end, depth, seed):
        nonlocal tests, root_profile
        if start == 1 and end == T:
            segment_values = panel.values
        else:
            try:
                segment_values = _standardize_rows(panel.values[:, start - 1 : end])
            except ConstantRow as err:
                aborted.append(AbortedBranch((start, end), depth, str(err)))
                return
        sub_config = replace(config, seed=seed)
        try:
            profile = _scan_arrays(segment_values[None], sub_config, [config.metric])[config.metric]
        except SingularCovariance as err:
            if depth == 0:
                raise
            aborted.append(AbortedBranch((start, end), depth, str(err)))
            return
        tests += 1
        if depth == 0:
            root_profile = profile
        p = p_value(profile)
        if p > config.alpha:
            return
        location = start - 1 + profile.z_argmax
        points.append(
            ChangePoint(
                location=location,
                z=profile.z_observed_max,
                p_value=p,
                segment=(start, end),
                depth=depth,
            )
        )
        if depth + 1 >= config.max_depth:
            return
        for child_start, child_end in ((start, location), (location + 1, end)):
            if child_end - child_start + 1 < min_segment:
                continue
            visit(child_start, child_end, depth + 1, derive_seed(master, child_start, child_end))

    visit(1, T, 0, master)
    points.sort(key=lambda pt: pt.location)
    return ChangePointReport(
        points=tuple(points),
        config=config,
        n=n,
        T=T,
        total_tests=tests,
        aborted=tuple(aborted),
        root_profile=root_profile,
    )
