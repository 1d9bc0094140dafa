"""Null-hypothesis resampling: i.i.d. column bootstrap and the AR sieve bootstrap.

Both schemes resample whole columns (jointly across nodes), because the
quantity under test is cross-node covariance; per-node resampling would
destroy it under H0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_toeplitz

from .errors import ShapeMismatch, SingularToeplitz
from .panel import SeriesPanel, _standardize_rows


@dataclass(frozen=True)
class Iid:
    """Plain column resampling with replacement."""


@dataclass(frozen=True)
class Sieve:
    """AR(s) sieve: resample whitened residual columns, regenerate recursively."""

    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"sieve order must be >= 0, got {self.order}")


@dataclass(frozen=True)
class ArFit:
    """Per-node Yule-Walker AR(s) fit.

    coefficients has shape (n, s), ordered phi_1..phi_s per node.
    residuals has shape (n, T - s): the one-step prediction errors
    e[i, t] = y[i, t] - sum_k phi[i, k] y[i, t - k] for t > s. For s = 0
    the residuals are the observations themselves.
    """

    coefficients: np.ndarray
    residuals: np.ndarray
    order: int


def _as_rng(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def iid_resample(panel: SeriesPanel, rng) -> SeriesPanel:
    """Resample T columns uniformly with replacement.

    Every output column is an exact copy of an input column; the result is
    returned unstandardized (detection re-standardizes replicates before
    profile computation).
    """
    rng = _as_rng(rng)
    idx = rng.integers(0, panel.T, size=panel.T)
    return SeriesPanel(panel.values[:, idx], node_labels=panel.node_labels)


def _autocovariances(values, s):
    """Raw sample autocovariances gamma(0..s), divisor T, per row."""
    T = values.shape[-1]
    gammas = np.empty(values.shape[:-1] + (s + 1,))
    for h in range(s + 1):
        gammas[..., h] = (values[..., : T - h] * values[..., h:]).sum(axis=-1) / T
    return gammas


def _yule_walker_from_gammas(gammas, s):
    """Solve per-row s x s Toeplitz Yule-Walker systems."""
    n = gammas.shape[0]
    coefficients = np.empty((n, s))
    for i in range(n):
        try:
            phi = solve_toeplitz((gammas[i, :s], gammas[i, :s]), gammas[i, 1 : s + 1])
        except np.linalg.LinAlgError:
            raise SingularToeplitz(i + 1) from None
        if not np.all(np.isfinite(phi)):
            raise SingularToeplitz(i + 1)
        coefficients[i] = phi
    return coefficients


def fit_ar_yule_walker(panel: SeriesPanel, s: int) -> ArFit:
    """Fit an AR(s) filter per node by solving the Yule-Walker equations.

    Raises
    ------
    SingularToeplitz
        Naming the node whose autocovariance system cannot be solved.
    """
    if not panel.standardized:
        raise ValueError("fit_ar_yule_walker expects a standardized panel")
    s = int(s)
    if s < 0 or 4 * s > panel.T:
        raise ValueError(f"order must satisfy 0 <= s <= T/4 = {panel.T / 4}, got {s}")
    values = panel.values
    n, T = values.shape
    if s == 0:
        return ArFit(np.empty((n, 0)), values.copy(), 0)
    coefficients = _yule_walker_from_gammas(_autocovariances(values, s), s)
    predicted = np.zeros((n, T - s))
    for k in range(1, s + 1):
        predicted += coefficients[:, k - 1 : k] * values[:, s - k : T - k]
    return ArFit(coefficients, values[:, s:] - predicted, s)


def _centered_residuals(fit: ArFit):
    # s = 0 residuals are the standardized observations, already mean zero.
    if fit.order == 0:
        return fit.residuals
    return fit.residuals - fit.residuals.mean(axis=1, keepdims=True)


def _regenerate(first_columns, coefficients, innovations):
    """Run the AR recursion from s observed seed columns.

    first_columns: (..., n, s); coefficients: (n, s); innovations:
    (..., n, T-s). Returns a (..., n, T) stack.
    """
    s = coefficients.shape[1]
    T = s + innovations.shape[-1]
    out = np.empty(innovations.shape[:-1] + (T,))
    out[..., :s] = first_columns
    for j in range(s, T):
        lags = out[..., j - s : j][..., ::-1]
        out[..., j] = (coefficients * lags).sum(axis=-1) + innovations[..., j - s]
    return out


def sieve_resample(panel: SeriesPanel, fit: ArFit, rng) -> SeriesPanel:
    """One sieve-bootstrap replicate of the panel.

    Residual columns are mean-centered per node, resampled jointly with
    replacement, and the series regenerated through the fitted AR filter,
    seeded with the first s observed columns. The result is re-standardized
    so replicates satisfy the same invariants as the observed panel.

    With s = 0 and a shared rng this is byte-identical to standardizing an
    iid_resample of the same panel.

    Raises
    ------
    ConstantRow
        If a regenerated row is constant (e.g. all-zero residuals with a
        unit-root filter).
    """
    rng = _as_rng(rng)
    n, T = panel.values.shape
    s = fit.order
    if fit.residuals.shape != (n, T - s) or fit.coefficients.shape != (n, s):
        raise ShapeMismatch("fit does not match panel shape")
    eps = _centered_residuals(fit)
    idx = rng.integers(0, T - s, size=T - s)
    # Column gathers come back Fortran-ordered; summation order (and hence
    # the exact float result) depends on layout, so force C order to keep
    # this byte-identical with the standardize(iid_resample(...)) path.
    innovations = np.ascontiguousarray(eps[:, idx])
    if s == 0:
        regenerated = innovations
    else:
        regenerated = _regenerate(panel.values[:, :s], fit.coefficients, innovations)
    return SeriesPanel(
        _standardize_rows(regenerated),
        node_labels=panel.node_labels,
        standardized=True,
    )


def select_ar_order(panel: SeriesPanel, s_max: int) -> int:
    """Pick the AR order in 0..s_max by 5-fold contiguous-block cross-validation.

    Each fold holds out one contiguous fifth of the time axis; the filter is
    fit on the remainder and scored by one-step-ahead prediction MSE,
    averaged over nodes and folds. Ties break toward the smaller order.
    """
    if not panel.standardized:
        raise ValueError("select_ar_order expects a standardized panel")
    s_max = int(s_max)
    if s_max < 0 or 4 * s_max > panel.T:
        raise ValueError(f"s_max must satisfy 0 <= s_max <= T/4 = {panel.T / 4}, got {s_max}")
    if s_max == 0:
        return 0
    values = panel.values
    n, T = values.shape
    bounds = np.linspace(0, T, 6).astype(int)
    total_sqerr = np.zeros(s_max + 1)
    total_cells = np.zeros(s_max + 1)
    for f in range(5):
        lo, hi = bounds[f], bounds[f + 1]
        runs = [(0, lo), (hi, T)]
        train_len = lo + (T - hi)
        gammas = np.zeros((n, s_max + 1))
        for a, b in runs:
            seg = values[:, a:b]
            width = b - a
            for h in range(min(s_max, max(width - 1, 0)) + 1):
                gammas[:, h] += (seg[:, : width - h] * seg[:, h:]).sum(axis=1)
        gammas /= train_len
        for s in range(s_max + 1):
            if s == 0:
                predicted = np.zeros((n, hi - lo))
                target = values[:, lo:hi]
            else:
                try:
                    coef = _yule_walker_from_gammas(gammas, s)
                except SingularToeplitz:
                    total_sqerr[s] = np.inf
                    continue
                start = max(lo, s)
                if start >= hi:
                    continue
                predicted = np.zeros((n, hi - start))
                for k in range(1, s + 1):
                    predicted += coef[:, k - 1 : k] * values[:, start - k : hi - k]
                target = values[:, start:hi]
            err = target - predicted
            total_sqerr[s] += (err * err).sum()
            total_cells[s] += err.size
    mse = total_sqerr / np.maximum(total_cells, 1)
    return int(np.argmin(mse))
