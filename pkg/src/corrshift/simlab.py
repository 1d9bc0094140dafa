"""Synthetic panel generators and the three experiment harnesses:
power scaling, norm comparison with rho calibration, and multiple change
points. All experiments are deterministic given (seed, reps, config).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import lfilter

from ._streams import derive_seed, stream
from .detector import DetectorConfig, _scan_arrays, detect_recursive, p_value
from .errors import BadRho, CholeskyFailure, NoSolution
from .metrics import CovMatrix, DistanceMetricKind
from .panel import SeriesPanel, _standardize_rows


@dataclass(frozen=True)
class Regime:
    """A stretch of `length` columns drawn i.i.d. MVN(0, sigma)."""

    length: int
    sigma: object

    def __post_init__(self):
        if self.length < 0:
            raise ValueError(f"regime length must be >= 0, got {self.length}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Panel blueprint: node count, ordered regimes, and a seed."""

    n: int
    regimes: tuple
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "regimes", tuple(self.regimes))
        if self.n < 2:
            raise ValueError(f"need n >= 2 nodes, got {self.n}")
        total = sum(r.length for r in self.regimes)
        if total < 4:
            raise ValueError(f"regime lengths must sum to T >= 4, got {total}")
        for r in self.regimes:
            values = _sigma_array(r.sigma)
            if values.shape != (self.n, self.n):
                raise ValueError(
                    f"regime sigma has shape {values.shape}, expected ({self.n}, {self.n})"
                )

    @property
    def T(self) -> int:
        return sum(r.length for r in self.regimes)


def _sigma_array(sigma):
    if isinstance(sigma, CovMatrix):
        return sigma.values
    return np.asarray(sigma, dtype=np.float64)


def block_exchangeable_sigma(n: int, block: int, rho: float) -> CovMatrix:
    """Identity except an upper-left block x block exchangeable submatrix.

    The block is (1-rho) I + rho 11'; positive definiteness requires
    -1/(block-1) < rho < 1.

    Raises
    ------
    BadRho
        If rho falls outside the positive-definite range.
    """
    if not 2 <= block <= n:
        raise ValueError(f"block must be in [2, n] = [2, {n}], got {block}")
    if not -1.0 / (block - 1) < rho < 1.0:
        raise BadRho(
            f"rho={rho} outside the PD range (-1/{block - 1}, 1) for block size {block}"
        )
    sigma = np.eye(n)
    sigma[:block, :block] = (1.0 - rho) * np.eye(block) + rho * np.ones((block, block))
    return CovMatrix(sigma)


def _regime_factor(sigma):
    values = _sigma_array(sigma)
    try:
        return np.linalg.cholesky(values)
    except np.linalg.LinAlgError:
        raise CholeskyFailure("regime sigma is not positive definite") from None


def generate_panel(spec: SyntheticSpec, rng=None) -> SeriesPanel:
    """Draw the panel: independent MVN(0, sigma) columns per regime, concatenated.

    Returned unstandardized; callers standardize explicitly.
    """
    if rng is None:
        rng = stream(spec.seed)
    elif not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    blocks = []
    for regime in spec.regimes:
        factor = _regime_factor(regime.sigma)
        blocks.append(factor @ rng.standard_normal((spec.n, regime.length)))
    return SeriesPanel(np.hstack(blocks))


def generate_ar1_panel(n: int, T: int, phi: float, rng) -> SeriesPanel:
    """Stationary AR(1) rows with unit innovation variance, unstandardized."""
    if not -1.0 < phi < 1.0:
        raise ValueError(f"phi must be in (-1, 1), got {phi}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    eps = rng.standard_normal((n, T))
    first = eps[:, :1] / np.sqrt(1.0 - phi * phi)
    rest, _ = lfilter([1.0], [1.0, -phi], eps[:, 1:], axis=-1, zi=phi * first)
    return SeriesPanel(np.hstack([first, rest]))


@dataclass(frozen=True)
class ExperimentResult:
    """One harness outcome.

    detection_histogram maps a signed offset from the true change point
    (power/scaling harness) or a 5-point bin (lo, hi) (multiple change
    point harness) to the fraction of replicates detecting there. power is
    the fraction of replicates reporting at least one significant point.
    detections holds the per-replicate detected locations.
    """

    n: int
    T: int
    true_points: tuple
    detection_histogram: dict
    power: float
    replications: int
    config: DetectorConfig
    detections: tuple


def _two_regime_values(n, T, sigma2, rng):
    """I -> sigma2 panel with the switch after floor(T/2) columns."""
    mid = T // 2
    left = rng.standard_normal((n, mid))
    right = _regime_factor(sigma2) @ rng.standard_normal((n, T - mid))
    return np.hstack([left, right]), mid


def _detect_locations(n, T, sigma2, config, reps, kinds, namespace):
    """Per-metric detected location (or None) for each replicate.

    Replicate r draws its panel from (seed, *namespace, 0, r) and scans
    with a detector seed derived from (seed, *namespace, 1, r); all metrics
    share the replicate panel and its bootstrap, which matches solo scans
    seed-for-seed.
    """
    master = int(config.seed)
    out = {kind: [] for kind in kinds}
    for r in range(reps):
        rng = stream(master, *namespace, 0, r)
        values, _ = _two_regime_values(n, T, sigma2, rng)
        standardized = _standardize_rows(values)
        sub = replace(config, seed=derive_seed(master, *namespace, 1, r))
        profiles = _scan_arrays(standardized[None], sub, kinds)
        for kind in kinds:
            profile = profiles[kind]
            significant = p_value(profile) <= config.alpha
            out[kind].append(profile.z_argmax if significant else None)
    return out


def power_experiment(n_list, C: int = 30, rho: float = 0.9, reps: int = 300,
                     config: DetectorConfig = None):
    """Power scaling harness: for each n, T = n(n-1) + C, change at floor(T/2).

    The covariance switches from the identity to a 4-node exchangeable
    block with the given rho. Returns one ExperimentResult per n, with the
    detection histogram keyed by signed offset from the true change point.
    """
    if reps < 100:
        raise ValueError(f"reps must be >= 100, got {reps}")
    if config is None:
        config = DetectorConfig(b_count=200)
    results = []
    for m, n in enumerate(n_list):
        T = n * (n - 1) + C
        sigma2 = block_exchangeable_sigma(n, 4, rho) if rho != 0.0 else np.eye(n)
        locations = _detect_locations(n, T, sigma2, config, reps, [config.metric], (m,))
        found = locations[config.metric]
        mid = T // 2
        histogram = {}
        for loc in found:
            if loc is not None:
                histogram[loc - mid] = histogram.get(loc - mid, 0) + 1
        histogram = {off: count / reps for off, count in sorted(histogram.items())}
        results.append(
            ExperimentResult(
                n=n,
                T=T,
                true_points=(mid,),
                detection_histogram=histogram,
                power=sum(1 for loc in found if loc is not None) / reps,
                replications=reps,
                config=config,
                detections=tuple(found),
            )
        )
    return results


def calibrate_rho_for_power(n: int, T: int, altered_block: int, target_power: float,
                            config: DetectorConfig, reps: int = 200) -> float:
    """Bisect rho in (0, 1) until Frobenius power is within 3 points of target.

    Every evaluation reuses the same replicate panels (common random
    numbers), so the estimated power curve is monotone in rho and the
    search is deterministic given the seed. At most 12 bisection steps; if
    the tolerance is never met the best-scoring rho is returned.

    Raises
    ------
    NoSolution
        If power at rho -> 1 stays below the target.
    """
    if not config.alpha < target_power < 1.0:
        raise ValueError(
            f"target_power must be in (alpha, 1) = ({config.alpha}, 1), got {target_power}"
        )
    frobenius = DistanceMetricKind.FROBENIUS_SQ
    eval_config = replace(config, metric=frobenius)

    def estimate(rho):
        sigma2 = block_exchangeable_sigma(n, altered_block, rho)
        found = _detect_locations(n, T, sigma2, eval_config, reps, [frobenius], ())
        return sum(1 for loc in found[frobenius] if loc is not None) / reps

    hi = 0.995
    power_hi = estimate(hi)
    if power_hi < target_power - 0.03:
        raise NoSolution(
            f"power at rho={hi} is {power_hi:.3f}, below target {target_power}"
        )
    lo = 0.0
    best = (abs(power_hi - target_power), hi)
    for _ in range(12):
        mid = (lo + hi) / 2.0
        power_mid = estimate(mid)
        gap = abs(power_mid - target_power)
        if gap < best[0]:
            best = (gap, mid)
        if gap <= 0.03:
            return mid
        if power_mid < target_power:
            lo = mid
        else:
            hi = mid
    return best[1]


@dataclass(frozen=True)
class NormComparisonRow:
    proportion: float
    block: int
    rho: float
    metric: DistanceMetricKind
    power: float


def norm_comparison_experiment(n: int = 20, T: int = 400, proportions=(0.1, 0.4, 0.8),
                               config: DetectorConfig = None, reps: int = 300,
                               cal_reps: int = 200):
    """Per altered proportion: calibrate rho to 50% Frobenius power, then
    measure all three metrics at that rho on shared replicate panels.

    All metrics run with delta = 2n unless the config pins one: the
    likelihood-ratio metric needs resampled segment covariances to stay
    nonsingular, which requires a buffer comfortably above n, and sharing
    one candidate grid keeps the comparison fair.
    """
    if config is None:
        config = DetectorConfig(b_count=200)
    delta = config.delta if config.delta is not None else 2 * n
    base = replace(config, delta=delta)
    kinds = [
        DistanceMetricKind.FROBENIUS_SQ,
        DistanceMetricKind.MAX_ABS,
        DistanceMetricKind.LIKELIHOOD_RATIO,
    ]
    rows = []
    for proportion in proportions:
        block = max(2, round(proportion * n))
        rho = calibrate_rho_for_power(n, T, block, 0.5, base, cal_reps)
        sigma2 = block_exchangeable_sigma(n, block, rho)
        locations = _detect_locations(n, T, sigma2, base, reps, kinds, ())
        for kind in kinds:
            power = sum(1 for loc in locations[kind] if loc is not None) / reps
            rows.append(
                NormComparisonRow(
                    proportion=float(proportion),
                    block=block,
                    rho=rho,
                    metric=kind,
                    power=power,
                )
            )
    return rows


def multiple_cp_experiment(config: DetectorConfig = None, reps: int = 300,
                           reversed_order: bool = False, n: int = 10, T: int = 400,
                           block: int = 5, rho: float = 0.9,
                           switches: tuple = (100, 200, 300)):
    """Alternating-regime harness: recursive detection on Sigma1/Sigma2
    switches, histogram binned in 5-point bins.

    reversed_order puts the exchangeable block first, swapping the
    boundary asymmetry.
    """
    if config is None:
        config = DetectorConfig(b_count=200)
    sigma1 = np.eye(n)
    sigma2 = _sigma_array(block_exchangeable_sigma(n, block, rho)) if rho != 0.0 else np.eye(n)
    if reversed_order:
        sigma1, sigma2 = sigma2, sigma1
    edges = [0, *switches, T]
    sigmas = [sigma1 if i % 2 == 0 else sigma2 for i in range(len(edges) - 1)]
    factors = [_regime_factor(s) for s in sigmas]
    master = int(config.seed)
    detections = []
    for r in range(reps):
        rng = stream(master, 0, r)
        blocks = [
            factors[i] @ rng.standard_normal((n, edges[i + 1] - edges[i]))
            for i in range(len(factors))
        ]
        panel = SeriesPanel(_standardize_rows(np.hstack(blocks)), standardized=True)
        sub = replace(config, seed=derive_seed(master, 1, r))
        report = detect_recursive(panel, sub)
        detections.append(tuple(pt.location for pt in report.points))
    histogram = {}
    for lo in range(1, T + 1, 5):
        bin_range = (lo, lo + 4)
        hits = sum(1 for locs in detections if any(lo <= x <= lo + 4 for x in locs))
        histogram[bin_range] = hits / reps
    return ExperimentResult(
        n=n,
        T=T,
        true_points=tuple(switches),
        detection_histogram=histogram,
        power=sum(1 for locs in detections if locs) / reps,
        replications=reps,
        config=config,
        detections=tuple(detections),
    )


def detection_frequency(result: ExperimentResult, point: int, radius: int) -> float:
    """Fraction of replicates with a detected location within +-radius of point."""
    hits = sum(
        1
        for locs in result.detections
        if any(loc is not None and abs(loc - point) <= radius for loc in _as_tuple(locs))
    )
    return hits / result.replications


def _as_tuple(locs):
    if locs is None:
        return ()
    if isinstance(locs, tuple):
        return locs
    return (locs,)


def fig2_csv(results) -> str:
    """Rows n,T,offset,prob: signed-offset detection histograms per panel size."""
    lines = ["n,T,offset,prob"]
    for res in results:
        for offset, prob in res.detection_histogram.items():
            lines.append(f"{res.n},{res.T},{int(offset)},{float(prob)!r}")
    return "\n".join(lines) + "\n"


def fig3_csv(rows) -> str:
    """Rows proportion,block,rho,metric,power from norm_comparison_experiment."""
    lines = ["proportion,block,rho,metric,power"]
    for row in rows:
        lines.append(
            f"{float(row.proportion)!r},{row.block},{float(row.rho)!r},"
            f"{row.metric.value},{float(row.power)!r}"
        )
    return "\n".join(lines) + "\n"


def fig4_csv(result: ExperimentResult) -> str:
    """Rows bin_start,bin_end,prob from multiple_cp_experiment."""
    lines = ["bin_start,bin_end,prob"]
    for (lo, hi), prob in result.detection_histogram.items():
        lines.append(f"{int(lo)},{int(hi)},{float(prob)!r}")
    return "\n".join(lines) + "\n"


def synthetic_market_prices(n: int = 50, T_returns: int = 2000, break_at: int = 1000,
                            seed: int = 41) -> SeriesPanel:
    """Deterministic stock-like price panel with one correlation regime break.

    Log returns carry an exchangeable market correlation that jumps from
    0.12 to 0.45 after `break_at` return periods; per-stock drifts and
    volatilities vary. Prices are strictly positive, T_returns + 1 columns.
    """
    rng = stream(seed, 0)
    drifts = rng.uniform(0.0001, 0.0008, size=(n, 1))
    vols = rng.uniform(0.008, 0.03, size=(n, 1))
    p0 = rng.uniform(20.0, 150.0, size=n)
    calm = _regime_factor(block_exchangeable_sigma(n, n, 0.12))
    stressed = _regime_factor(block_exchangeable_sigma(n, n, 0.45))
    shocks = np.hstack(
        [
            calm @ rng.standard_normal((n, break_at)),
            stressed @ rng.standard_normal((n, T_returns - break_at)),
        ]
    )
    returns = drifts + vols * shocks
    log_prices = np.log(p0)[:, None] + np.hstack(
        [np.zeros((n, 1)), np.cumsum(returns, axis=1)]
    )
    labels = [f"STK{i + 1:02d}" for i in range(n)]
    return SeriesPanel(np.exp(log_prices), node_labels=labels)
