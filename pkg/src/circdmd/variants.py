"""End-to-end decompositions: dmd, hankel, fb-hankel, tls-hankel, circ, circ-sp.

Each variant differs only in how the snapshot pair (source, target) is
built and, for circ-sp, in how amplitudes are selected. The circular
variants regress the shifted stack on its snapshot-ordered permutation,
so the wrap pair (c_T -> c_1) is part of the fit; amplitudes anchor on
c_1 (the last column of the unpermuted stack). Non-circular variants
follow the plain convention and anchor on the first data column.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .datamodel import SpeedMatrix
from .embedding import (
    anti_circulant,
    apply_right_permutation,
    collapse_snapshot_reconstruction,
    hankel,
    inverse_hankel,
)
from .errors import (
    ConfigError,
    NumericalError,
    RangeError,
    ShapeError,
    SingularBackwardError,
)
from .sparsity import admm_sparsify, build_quadratic, gamma_path
from .spectral import (
    RANK_AUTO,
    DynamicSpectrum,
    SpectrumMeta,
    amplitudes,
    dynamic_modes,
    eigendecompose,
    projected_dynamics,
    reconstruct,
    snapshot_svd,
    vandermonde,
)

METHODS = ("dmd", "hankel", "fb-hankel", "tls-hankel", "circ", "circ-sp")
_HANKEL_METHODS = ("hankel", "fb-hankel", "tls-hankel")
_CIRC_METHODS = ("circ", "circ-sp")


@dataclass
class VariantConfig:
    """Method selection plus the shared hyper-parameters.

    ``rank`` is "auto" (hard threshold) or a fixed integer. ``gamma``
    applies to circ-sp only; gamma = 0 collapses it to circ. ``tau`` is
    forced to 1 for plain dmd. circ-sp always reconstructs from
    projected modes because those are what the amplitude selection
    optimizes over.
    """

    method: str
    tau: Optional[int] = None
    rank: Union[int, str] = RANK_AUTO
    gamma: float = 0.0
    mode_flavor: Optional[str] = None
    tls_rank: Optional[int] = None
    admm_rho: float = 1.0
    admm_max_iter: int = 10000
    admm_eps_abs: float = 1e-6
    admm_eps_rel: float = 1e-4

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose one of {METHODS}")
        if self.method == "dmd":
            if self.tau not in (None, 1):
                warnings.warn("method 'dmd' forces tau = 1", stacklevel=2)
            self.tau = 1
        elif self.tau is None:
            raise ConfigError(f"method {self.method!r} requires a delay length tau")
        if self.tau < 1:
            raise RangeError(f"tau must be >= 1, got {self.tau}")
        if self.gamma < 0:
            raise RangeError(f"gamma must be >= 0, got {self.gamma}")
        if self.gamma > 0 and self.method != "circ-sp":
            raise ConfigError("gamma applies to method 'circ-sp' only")
        if self.mode_flavor is None:
            self.mode_flavor = "projected" if self.method == "circ-sp" else "exact"
        if self.mode_flavor not in ("exact", "projected"):
            raise ConfigError(
                f"mode_flavor must be exact|projected, got {self.mode_flavor!r}"
            )
        if self.method == "circ-sp" and self.mode_flavor != "projected":
            warnings.warn("circ-sp reconstructs from projected modes; overriding")
            self.mode_flavor = "projected"
        self.gamma = float(self.gamma)


def _assemble(source, target, initial, rank, flavor, meta) -> DynamicSpectrum:
    svd = snapshot_svd(source, rank)
    a_tilde = projected_dynamics(target, svd)
    eigs, w = eigendecompose(a_tilde)
    exact = dynamic_modes(target, svd, w, "exact")
    projected = dynamic_modes(target, svd, w, "projected")
    meta.rank = svd.rank
    spectrum = DynamicSpectrum(
        eigenvalues=eigs,
        modes_exact=exact,
        modes_projected=projected,
        eigvecs_reduced=w,
        amplitudes=np.zeros(svd.rank, dtype=complex),
        meta=meta,
    )
    phi = exact if flavor == "exact" else projected
    spectrum.amplitudes = amplitudes(phi, initial)
    spectrum._source_svd = svd
    return spectrum


def _meta(config: VariantConfig, data: SpeedMatrix) -> SpectrumMeta:
    return SpectrumMeta(
        method=config.method,
        tau=config.tau,
        rank=0,
        gamma=config.gamma,
        mode_flavor=config.mode_flavor,
        n_sensors=data.n_sensors,
        n_time=data.n_time,
        delta_t=data.delta_t,
    )


def _hankel_pair(data: SpeedMatrix, tau: int):
    if tau > data.n_time - 1:
        raise RangeError(
            f"hankel methods need tau <= T - 1, got tau={tau}, T={data.n_time}"
        )
    h = hankel(data, tau).values
    return h[:, :-1], h[:, 1:], h[:, 0]


def fit(data: SpeedMatrix, config: VariantConfig) -> DynamicSpectrum:
    """Fit the configured decomposition and return its spectrum."""
    method = config.method
    if method == "fb-hankel":
        return fit_forward_backward(data, config)
    if method == "tls-hankel":
        return fit_total_least_squares(data, config)

    if method == "dmd":
        x = data.values
        source, target, initial = x[:, :-1], x[:, 1:], x[:, 0]
    elif method == "hankel":
        source, target, initial = _hankel_pair(data, config.tau)
    else:  # circ methods pair every snapshot with its successor, wrap included
        c = anti_circulant(data, config.tau)
        cp = apply_right_permutation(c)
        source, target, initial = cp.values, c.values, cp.values[:, 0]

    spectrum = _assemble(
        source, target, initial, config.rank, config.mode_flavor, _meta(config, data)
    )
    if method == "circ-sp":
        _apply_sparsity(spectrum, config, n_columns=source.shape[1])
    return spectrum


def _apply_sparsity(spectrum: DynamicSpectrum, config: VariantConfig, n_columns: int):
    psi = vandermonde(spectrum.eigenvalues, n_columns)
    form = build_quadratic(spectrum.modes_projected, psi, spectrum._source_svd)
    solution = admm_sparsify(
        form,
        config.gamma,
        rho=config.admm_rho,
        max_iter=config.admm_max_iter,
        eps_abs=config.admm_eps_abs,
        eps_rel=config.admm_eps_rel,
    )
    spectrum.amplitudes = solution.amplitudes_polished
    spectrum.sparsity = solution


def fit_gamma_path(data: SpeedMatrix, config: VariantConfig, gammas):
    """Fit the circular decomposition once, then sweep the sparsity penalty.

    Returns one (gamma, spectrum, solution) triple per penalty; each
    spectrum shares the eigenstructure of the base fit but carries the
    polished amplitudes of its own penalty level.
    """
    base_config = VariantConfig(
        method="circ",
        tau=config.tau,
        rank=config.rank,
        mode_flavor="projected",
    )
    base = fit(data, base_config)
    n_columns = base.meta.n_time
    psi = vandermonde(base.eigenvalues, n_columns)
    form = build_quadratic(base.modes_projected, psi, base._source_svd)
    solutions = gamma_path(
        form,
        gammas,
        rho=config.admm_rho,
        max_iter=config.admm_max_iter,
        eps_abs=config.admm_eps_abs,
        eps_rel=config.admm_eps_rel,
    )
    results = []
    for solution in solutions:
        meta = SpectrumMeta(
            method="circ-sp",
            tau=base.meta.tau,
            rank=base.meta.rank,
            gamma=solution.gamma,
            mode_flavor="projected",
            n_sensors=base.meta.n_sensors,
            n_time=base.meta.n_time,
            delta_t=base.meta.delta_t,
        )
        spectrum = DynamicSpectrum(
            eigenvalues=base.eigenvalues,
            modes_exact=base.modes_exact,
            modes_projected=base.modes_projected,
            eigvecs_reduced=base.eigvecs_reduced,
            amplitudes=solution.amplitudes_polished,
            meta=meta,
            sparsity=solution,
        )
        spectrum._source_svd = base._source_svd
        results.append((solution.gamma, spectrum, solution))
    return results


def forward_backward_combine(a_forward: np.ndarray, a_backward: np.ndarray) -> np.ndarray:
    """Principal square root of A_f inv(A_b) with per-eigenvalue sign repair.

    The square root leaves each eigenvalue's sign free; each is chosen
    to be nearest the matching diagonal entry of the forward propagator
    expressed in the root's eigenbasis, which minimizes the distance to
    A_f and recovers it exactly on clean data.
    """
    a_forward = np.asarray(a_forward, dtype=complex)
    a_backward = np.asarray(a_backward, dtype=complex)
    if a_forward.shape != a_backward.shape:
        raise ShapeError(
            f"propagator shapes differ: {a_forward.shape} vs {a_backward.shape}"
        )
    if np.linalg.cond(a_backward) > 1.0 / np.finfo(float).eps:
        raise SingularBackwardError("backward propagator is numerically singular")
    product = a_forward @ np.linalg.inv(a_backward)
    eigvals, eigvecs = np.linalg.eig(product)
    try:
        eigvecs_inv = np.linalg.inv(eigvecs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"defective propagator product: {exc}") from exc
    roots = np.sqrt(eigvals.astype(complex))
    reference = np.diag(eigvecs_inv @ a_forward @ eigvecs)
    flip = np.abs(-roots - reference) < np.abs(roots - reference)
    roots = np.where(flip, -roots, roots)
    return eigvecs @ np.diag(roots) @ eigvecs_inv


def fit_forward_backward(data: SpeedMatrix, config: VariantConfig) -> DynamicSpectrum:
    """Debias by averaging forward and inverse-backward dynamics.

    Both legs are truncated to a common rank (the smaller of the two
    auto/fixed ranks) so the propagators conform before combining.
    """
    source, target, initial = _hankel_pair(data, config.tau)
    svd1 = snapshot_svd(source, config.rank)
    svd2 = snapshot_svd(target, config.rank)
    r = min(svd1.rank, svd2.rank)
    svd1 = svd1.truncate(r)
    svd2 = svd2.truncate(r)
    a_forward = projected_dynamics(target, svd1)
    a_backward = projected_dynamics(source, svd2)
    a_tilde = forward_backward_combine(a_forward, a_backward)

    eigs, w = eigendecompose(a_tilde)
    exact = dynamic_modes(target, svd1, w, "exact")
    projected = dynamic_modes(target, svd1, w, "projected")
    meta = _meta(config, data)
    meta.rank = r
    spectrum = DynamicSpectrum(
        eigenvalues=eigs,
        modes_exact=exact,
        modes_projected=projected,
        eigvecs_reduced=w,
        amplitudes=np.zeros(r, dtype=complex),
        meta=meta,
    )
    phi = exact if config.mode_flavor == "exact" else projected
    spectrum.amplitudes = amplitudes(phi, initial)
    spectrum._source_svd = svd1
    return spectrum


def fit_total_least_squares(data: SpeedMatrix, config: VariantConfig) -> DynamicSpectrum:
    """Debias by projecting both snapshot matrices onto the POD modes of
    their vertical stack, then running the plain pipeline on the
    projected pair."""
    source, target, _ = _hankel_pair(data, config.tau)
    stacked = np.vstack([source, target])
    z_rank = config.tls_rank if config.tls_rank is not None else RANK_AUTO
    if z_rank != RANK_AUTO and z_rank > stacked.shape[1]:
        raise RangeError(
            f"tls rank {z_rank} exceeds column count {stacked.shape[1]}"
        )
    svd_z = snapshot_svd(stacked, z_rank)
    projector = svd_z.right @ svd_z.right.conj().T
    source_bar = source @ projector
    target_bar = target @ projector
    return _assemble(
        source_bar,
        target_bar,
        source_bar[:, 0],
        config.rank,
        config.mode_flavor,
        _meta(config, data),
    )


def predict(
    spectrum: DynamicSpectrum, data_shape, horizon_columns: int
) -> np.ndarray:
    """Reconstruct history plus ``horizon_columns`` future steps in the
    original N-row space.

    Circular variants collapse the snapshot-ordered reconstruction by
    circular-shift averaging over the whole window; Hankel variants
    average all delayed copies of each timestamp; plain dmd returns its
    rows directly.
    """
    n, t = data_shape
    meta = spectrum.meta
    if (n, t) != (meta.n_sensors, meta.n_time):
        raise ShapeError(
            f"data shape {(n, t)} does not match fitted {(meta.n_sensors, meta.n_time)}"
        )
    if horizon_columns < 0:
        raise RangeError(f"horizon must be >= 0, got {horizon_columns}")
    tau = meta.tau
    if meta.method == "dmd":
        return reconstruct(spectrum, t + horizon_columns)
    if meta.method in _HANKEL_METHODS:
        width = (t - tau + 1) + horizon_columns
        rec = reconstruct(spectrum, width)
        return inverse_hankel(rec, n, tau)
    if meta.method not in _CIRC_METHODS:
        raise ConfigError(f"unknown method {meta.method!r} in spectrum metadata")
    rec = reconstruct(spectrum, t + horizon_columns)
    return collapse_snapshot_reconstruction(rec, n, tau)
