"""Panel data model, standardization, log returns, and autocorrelation diagnostics.

A panel is an n x T real matrix: n node series observed at T common time
points. Time indices are 1-based and inclusive everywhere in the public API.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConstantRow, NonPositivePrice

# Rows with population variance below this are degenerate and refuse to standardize.
_VAR_FLOOR = 1e-14
# Tolerance for the standardized-panel invariant (mean 0, population variance 1).
_STD_TOL = 1e-10


@dataclass(frozen=True)
class SeriesPanel:
    """n x T panel of node time series.

    Parameters
    ----------
    values : ndarray, shape (n, T)
        Rows are nodes, columns are time points. Must be finite, n >= 2, T >= 2.
    node_labels : list of str, optional
        One label per node; generated as "node1".."nodeN" when omitted.
    time_labels : list of str, optional
        One label per time point.
    standardized : bool
        True only if every row has mean 0 and population variance 1
        (divisor T), each within 1e-10. Verified at construction.
    """

    values: np.ndarray
    node_labels: list = None
    time_labels: list = None
    standardized: bool = False

    def __post_init__(self):
        values = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if values.ndim != 2:
            raise ValueError(f"panel values must be 2-dimensional, got shape {values.shape}")
        n, T = values.shape
        if n < 2:
            raise ValueError(f"panel needs at least 2 nodes, got {n}")
        if T < 2:
            raise ValueError(f"panel needs at least 2 time points, got {T}")
        if not np.all(np.isfinite(values)):
            raise ValueError("panel values must be finite (no NaN or inf)")
        object.__setattr__(self, "values", values)

        labels = self.node_labels
        if labels is None:
            labels = [f"node{i + 1}" for i in range(n)]
        labels = [str(s) for s in labels]
        if len(labels) != n:
            raise ValueError(f"expected {n} node labels, got {len(labels)}")
        object.__setattr__(self, "node_labels", labels)

        if self.time_labels is not None:
            tlabels = [str(s) for s in self.time_labels]
            if len(tlabels) != T:
                raise ValueError(f"expected {T} time labels, got {len(tlabels)}")
            object.__setattr__(self, "time_labels", tlabels)

        if self.standardized:
            means = values.mean(axis=1)
            variances = values.var(axis=1)
            if np.abs(means).max() > _STD_TOL or np.abs(variances - 1.0).max() > _STD_TOL:
                raise ValueError("standardized=True but rows are not mean-0, variance-1")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def T(self) -> int:
        return self.values.shape[1]


def _standardize_rows(values):
    """Center and scale along the last axis to mean 0, population variance 1.

    Works on any (..., n, T) stack. Raises ConstantRow naming the first
    offending node (1-based, within its panel) if a row variance falls
    below 1e-14.
    """
    means = values.mean(axis=-1, keepdims=True)
    centered = values - means
    variances = np.mean(centered * centered, axis=-1, keepdims=True)
    if np.any(variances < _VAR_FLOOR):
        flat = np.nonzero(variances < _VAR_FLOOR)
        raise ConstantRow(int(flat[-2][0]) + 1)
    return centered / np.sqrt(variances)


def standardize(panel: SeriesPanel) -> SeriesPanel:
    """Return the panel with every row scaled to mean 0, population variance 1.

    The population convention (divisor T) makes the full-range covariance
    of the result have an exactly unit diagonal. Idempotent up to 1e-12.

    Raises
    ------
    ConstantRow
        If any row has variance below 1e-14. Degenerate nodes must be
        removed by the caller; they are never dropped silently.
    """
    return SeriesPanel(
        _standardize_rows(panel.values),
        node_labels=panel.node_labels,
        time_labels=panel.time_labels,
        standardized=True,
    )


def log_returns(prices: SeriesPanel) -> SeriesPanel:
    """Log returns of a strictly positive price panel.

    Output column j is log(P[:, j+1]) - log(P[:, j]), so the result has
    T-1 columns and is not standardized.

    Raises
    ------
    NonPositivePrice
        Naming the first offending (node, time), 1-based.
    """
    values = prices.values
    bad = values <= 0.0
    if bad.any():
        node, time = np.argwhere(bad)[0]
        raise NonPositivePrice(int(node) + 1, int(time) + 1)
    logp = np.log(values)
    returns = logp[:, 1:] - logp[:, :-1]
    tlabels = prices.time_labels[1:] if prices.time_labels is not None else None
    return SeriesPanel(returns, node_labels=prices.node_labels, time_labels=tlabels)


@dataclass(frozen=True)
class AutocorrDiagnostic:
    """Per-node first-order autocorrelation diagnostics.

    Fields
    ------
    per_node_dw : ndarray, shape (n,)
        Durbin-Watson statistics, each in [0, 4].
    per_node_r1 : ndarray, shape (n,)
        Sample lag-1 autocorrelations, each in [-1, 1].
    any_significant : bool
        True iff at least one node rejects the no-autocorrelation null at
        alpha_used after Bonferroni correction over the n nodes.
    alpha_used : float
    """

    per_node_dw: np.ndarray
    per_node_r1: np.ndarray
    any_significant: bool
    alpha_used: float


def durbin_watson(panel: SeriesPanel, alpha: float = 0.05) -> AutocorrDiagnostic:
    """Durbin-Watson and lag-1 autocorrelation screen for a standardized panel.

    Per node, DW = sum_t (y_t - y_{t-1})^2 / sum_t y_t^2 and r1 is the
    sample lag-1 autocorrelation. Significance uses the normal
    approximation z = r1 * sqrt(T), two-sided, Bonferroni-corrected over
    nodes. Intended for T >= 10; shorter panels give a crude screen.
    """
    if not panel.standardized:
        raise ValueError("durbin_watson expects a standardized panel")
    values = panel.values
    T = panel.T
    diffs = values[:, 1:] - values[:, :-1]
    denom = (values * values).sum(axis=1)
    dw = (diffs * diffs).sum(axis=1) / denom
    r1 = (values[:, 1:] * values[:, :-1]).sum(axis=1) / denom
    pvals = 2.0 * stats.norm.sf(np.abs(r1) * np.sqrt(T))
    significant = pvals < alpha / panel.n
    return AutocorrDiagnostic(
        per_node_dw=dw,
        per_node_r1=r1,
        any_significant=bool(significant.any()),
        alpha_used=alpha,
    )
