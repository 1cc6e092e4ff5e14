"""Evaluation metrics and dynamical diagnostics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import DegenerateSeriesError, RangeError, ShapeError

STABILITY_TOL = 1e-3


@dataclass(frozen=True)
class StabilityReport:
    """Which eigenvalues sit on the unit circle, and by how much the rest miss it."""

    steady_mask: np.ndarray
    deviation_sum: float
    tolerance: float


@dataclass(frozen=True)
class PeriodReport:
    """Oscillation periods in hours for the modes that have one.

    ``included`` are indices into the original eigenvalue vector;
    eigenvalues with zero phase (infinite period) and negative phase
    (conjugate duplicates) land in ``excluded``.
    """

    periods: np.ndarray
    amplitudes_real: np.ndarray
    included: np.ndarray
    excluded: np.ndarray


@dataclass
class ResidualDiagnostics:
    """Bundle of residual-process diagnostics for one reconstruction."""

    acf: Dict[int, np.ndarray]
    confidence_bound: float
    lag_correlations: Dict[int, np.ndarray]
    mean_abs_correlation: Dict[int, float] = field(default_factory=dict)


def mae_rmse(truth: np.ndarray, estimate: np.ndarray):
    """Mean absolute and root-mean-square error over all entries."""
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.shape != estimate.shape:
        raise ShapeError(f"shape mismatch: {truth.shape} vs {estimate.shape}")
    diff = truth - estimate
    mae = float(np.mean(np.abs(diff)))
    rmse = float(np.sqrt(np.mean(diff**2)))
    return mae, rmse


def mape_per_sensor(
    truth: np.ndarray, estimate: np.ndarray, zero_policy: str = "skip"
) -> np.ndarray:
    """Mean absolute percentage error per sensor row.

    Zero truth entries are undefined; ``zero_policy="skip"`` averages
    over the remaining entries (warning when any were skipped, NaN when
    a whole row is zero), ``"error"`` raises.
    """
    truth = np.asarray(truth, dtype=float)
    estimate = np.asarray(estimate, dtype=float)
    if truth.shape != estimate.shape:
        raise ShapeError(f"shape mismatch: {truth.shape} vs {estimate.shape}")
    if zero_policy not in ("skip", "error"):
        raise RangeError(f"zero_policy must be skip|error, got {zero_policy!r}")
    zero = truth == 0.0
    if zero.any():
        if zero_policy == "error":
            raise DegenerateSeriesError(
                f"{int(zero.sum())} zero truth entries make MAPE undefined"
            )
        warnings.warn(f"skipping {int(zero.sum())} zero truth entries in MAPE")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs((truth - estimate) / truth)
    ratio[zero] = 0.0
    counts = (~zero).sum(axis=1).astype(float)
    out = np.full(truth.shape[0], np.nan)
    nonempty = counts > 0
    out[nonempty] = 100.0 * ratio[nonempty].sum(axis=1) / counts[nonempty]
    return out


def predictability_groups(
    mape_values: np.ndarray, low: float = 5.0, high: float = 10.0
):
    """Band each sensor by MAPE: below ``low``, between, above ``high``."""
    labels = []
    for value in np.asarray(mape_values, dtype=float):
        if np.isnan(value):
            labels.append("undefined")
        elif value < low:
            labels.append(f"<{low:g}%")
        elif value <= high:
            labels.append(f"{low:g}-{high:g}%")
        else:
            labels.append(f">{high:g}%")
    return labels


def classify_stability(
    eigenvalues: np.ndarray, tol: float = STABILITY_TOL
) -> StabilityReport:
    """Mark eigenvalues with modulus in [1 - tol, 1 + tol] as steady."""
    if tol <= 0:
        raise RangeError(f"tolerance must be positive, got {tol}")
    moduli = np.abs(np.asarray(eigenvalues, dtype=complex))
    mask = (moduli >= 1.0 - tol) & (moduli <= 1.0 + tol)
    return StabilityReport(
        steady_mask=mask,
        deviation_sum=float(np.sum(np.abs(moduli - 1.0))),
        tolerance=float(tol),
    )


def oscillation_periods(
    eigenvalues: np.ndarray, delta_t: float, amplitudes: Optional[np.ndarray] = None
) -> PeriodReport:
    """Periods 2*pi*dt / imag(log(lambda)) for modes with positive phase.

    Zero phase means an infinite (non-oscillating) period and negative
    phase is the conjugate duplicate of a positive one; both are
    reported under ``excluded``.
    """
    if delta_t <= 0:
        raise RangeError(f"delta_t must be positive, got {delta_t}")
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    phases = np.angle(eigenvalues)
    included = np.flatnonzero(phases > 0)
    excluded = np.flatnonzero(phases <= 0)
    periods = 2.0 * np.pi * delta_t / phases[included]
    if amplitudes is not None:
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != eigenvalues.shape:
            raise ShapeError("amplitudes and eigenvalues differ in length")
        amp_real = np.real(amplitudes[included])
    else:
        amp_real = np.zeros(included.size)
    return PeriodReport(
        periods=periods, amplitudes_real=amp_real, included=included, excluded=excluded
    )


def reshape_mode(
    mode: np.ndarray, amplitude: complex, n: int, tau: int
) -> np.ndarray:
    """Unstack an amplitude-weighted mode into N x tau, block i -> column i."""
    mode = np.asarray(mode)
    if mode.shape != (n * tau,):
        raise ShapeError(f"mode length {mode.shape} does not match n*tau={n * tau}")
    return (amplitude * mode).reshape(tau, n).T


def residual_acf(residuals: np.ndarray, max_lag: int):
    """Sample autocorrelation (biased normalization) with a 3/sqrt(T) bound."""
    residuals = np.asarray(residuals, dtype=float).ravel()
    t = residuals.size
    if not 0 <= max_lag < t:
        raise RangeError(f"max_lag must satisfy 0 <= lag < {t}, got {max_lag}")
    centered = residuals - residuals.mean()
    denom = float(centered @ centered)
    if denom == 0.0:
        raise DegenerateSeriesError("constant series has no autocorrelation")
    acf = np.empty(max_lag + 1)
    for lag in range(max_lag + 1):
        acf[lag] = float(centered[lag:] @ centered[: t - lag]) / denom
    return acf, 3.0 / np.sqrt(t)


def residual_lag_correlation(residuals: np.ndarray, lag: int):
    """Pearson correlation between sensor residuals ``lag`` steps apart.

    Entry (i, j) correlates sensor i at time t - lag with sensor j at
    time t. Zero-variance sensors get zeroed rows/columns with a
    warning. Also returns the mean absolute entry.
    """
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 2:
        raise ShapeError(f"expected N x T residuals, got ndim={residuals.ndim}")
    n, t = residuals.shape
    if not 0 <= lag < t:
        raise RangeError(f"lag must satisfy 0 <= lag < {t}, got {lag}")
    past = residuals[:, : t - lag] if lag else residuals
    present = residuals[:, lag:] if lag else residuals
    past = past - past.mean(axis=1, keepdims=True)
    present = present - present.mean(axis=1, keepdims=True)
    past_norm = np.linalg.norm(past, axis=1)
    present_norm = np.linalg.norm(present, axis=1)
    degenerate = (past_norm == 0.0) | (present_norm == 0.0)
    if degenerate.any():
        warnings.warn(
            f"{int(degenerate.sum())} zero-variance sensors; correlations set to 0"
        )
    past_norm[past_norm == 0.0] = 1.0
    present_norm[present_norm == 0.0] = 1.0
    matrix = (past / past_norm[:, None]) @ (present / present_norm[:, None]).T
    matrix[degenerate, :] = 0.0
    matrix[:, degenerate] = 0.0
    return matrix, float(np.mean(np.abs(matrix)))


def residual_diagnostics(
    residuals: np.ndarray, max_lag: int, lags=(1, 2, 6, 12)
) -> ResidualDiagnostics:
    """Per-sensor ACF plus lagged cross-correlation matrices."""
    residuals = np.asarray(residuals, dtype=float)
    acf = {}
    for i in range(residuals.shape[0]):
        try:
            acf[i], bound = residual_acf(residuals[i], max_lag)
        except DegenerateSeriesError:
            warnings.warn(f"sensor {i} residual is constant; ACF skipped")
    bound = 3.0 / np.sqrt(residuals.shape[1])
    correlations = {}
    mean_abs = {}
    for lag in lags:
        correlations[lag], mean_abs[lag] = residual_lag_correlation(residuals, lag)
    return ResidualDiagnostics(
        acf=acf,
        confidence_bound=bound,
        lag_correlations=correlations,
        mean_abs_correlation=mean_abs,
    )
