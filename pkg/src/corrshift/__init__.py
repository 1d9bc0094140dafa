"""Change point detection in the correlation structure of multivariate series.

A panel of n series is standardized row by row, and the question is whether
the cross-sectional covariance is the same over the whole observation window
or switches at some unknown time k. The detector compares the two segment
covariance estimates on either side of each admissible split with a matrix
distance (squared Frobenius, maximum absolute entry, or a Gaussian likelihood
ratio), studentizes the resulting profile against a bootstrap sample of the
no-change null, and reads off the maximally deviant split. Recursion on the
flanking segments turns the single-split test into a multiple change point
procedure.

Layout:

- ``panel``: the SeriesPanel container, standardization, log returns, and a
  Durbin-Watson autocorrelation screen.
- ``metrics``: segment covariance estimates, distance metrics, distance
  profiles over candidate splits, and correlation network thresholding.
- ``bootstrap``: i.i.d. column resampling and an autoregressive sieve for
  serially dependent panels, plus cross-validated order selection.
- ``detector``: the bootstrap scan test, p-values, and recursive
  segmentation. Everything is deterministic given the configured seed.
- ``nulldist``: closed-form expected null distances and Monte Carlo checks.
- ``simlab``: synthetic panel generators and the simulation experiments
  (power scaling, metric comparison, multiple change points).
- ``cli``: the ``corrshift`` command line tool built on the above.

All series indices, time indices, and change point locations are 1-based in
reports and error messages; a change point at k means the (1-based) segments
``1..k`` and ``k+1..T`` have distinct covariance.
"""

__version__ = "0.1.0"

from .bootstrap import (
    ArFit,
    Iid,
    Sieve,
    fit_ar_yule_walker,
    iid_resample,
    select_ar_order,
    sieve_resample,
)
from .detector import (
    ChangePoint,
    ChangePointReport,
    Detection,
    DetectorConfig,
    ScanProfile,
    detect_recursive,
    detect_single,
    format_p_value,
    p_value,
    scan,
    scan_pooled,
)
from .errors import (
    BadRange,
    BadRho,
    CholeskyFailure,
    ConstantRow,
    CorrshiftError,
    InsufficientLength,
    NoSolution,
    NonFiniteValue,
    NonPositivePrice,
    ParseError,
    RaggedRows,
    ShapeMismatch,
    SingularCovariance,
    SingularToeplitz,
)
from .metrics import (
    CovMatrix,
    DistanceMetricKind,
    DistanceProfile,
    candidate_ks,
    distance,
    distance_profile,
    edge_csv,
    pooled_segment_covariance,
    segment_covariance,
    threshold_network,
)
from .nulldist import (
    MonteCarloCurve,
    MonteCarloEstimate,
    NullExpectationCurve,
    expected_null_distance,
    monte_carlo_null_curve,
    monte_carlo_null_distance,
    null_expectation_curve,
)
from .panel import (
    AutocorrDiagnostic,
    SeriesPanel,
    durbin_watson,
    log_returns,
    standardize,
)
from .simlab import (
    ExperimentResult,
    NormComparisonRow,
    Regime,
    SyntheticSpec,
    block_exchangeable_sigma,
    calibrate_rho_for_power,
    detection_frequency,
    fig2_csv,
    fig3_csv,
    fig4_csv,
    generate_ar1_panel,
    generate_panel,
    multiple_cp_experiment,
    norm_comparison_experiment,
    power_experiment,
    synthetic_market_prices,
)

__all__ = [
    "__version__",
    "ArFit",
    "AutocorrDiagnostic",
    "BadRange",
    "BadRho",
    "ChangePoint",
    "ChangePointReport",
    "CholeskyFailure",
    "ConstantRow",
    "CorrshiftError",
    "CovMatrix",
    "Detection",
    "DetectorConfig",
    "DistanceMetricKind",
    "DistanceProfile",
    "ExperimentResult",
    "Iid",
    "InsufficientLength",
    "MonteCarloCurve",
    "MonteCarloEstimate",
    "NoSolution",
    "NonFiniteValue",
    "NonPositivePrice",
    "NormComparisonRow",
    "NullExpectationCurve",
    "ParseError",
    "RaggedRows",
    "Regime",
    "ScanProfile",
    "SeriesPanel",
    "ShapeMismatch",
    "Sieve",
    "SingularCovariance",
    "SingularToeplitz",
    "SyntheticSpec",
    "block_exchangeable_sigma",
    "calibrate_rho_for_power",
    "candidate_ks",
    "detect_recursive",
    "detect_single",
    "detection_frequency",
    "distance",
    "distance_profile",
    "durbin_watson",
    "edge_csv",
    "expected_null_distance",
    "fig2_csv",
    "fig3_csv",
    "fig4_csv",
    "fit_ar_yule_walker",
    "format_p_value",
    "generate_ar1_panel",
    "generate_panel",
    "iid_resample",
    "log_returns",
    "monte_carlo_null_curve",
    "monte_carlo_null_distance",
    "multiple_cp_experiment",
    "norm_comparison_experiment",
    "null_expectation_curve",
    "p_value",
    "pooled_segment_covariance",
    "power_experiment",
    "scan",
    "scan_pooled",
    "segment_covariance",
    "select_ar_order",
    "sieve_resample",
    "standardize",
    "synthetic_market_prices",
    "threshold_network",
]
