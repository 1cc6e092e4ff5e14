"""Core decomposition machinery shared by every variant.

The reduced SVD goes through the method of snapshots: the Gram matrix
of the smaller dimension is eigendecomposed and the long-side factor is
recovered by one projection, so the (N*tau) x (N*tau) product is never
formed. Rank selection combines the aspect-ratio hard threshold with a
numerical-rank guard so that exactly low-rank inputs do not drag
round-off directions into the spectrum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    NumericalError,
    RangeError,
    RankDeficiencyError,
    ShapeError,
    SingularEigenvalueError,
)

_EPS = float(np.finfo(float).eps)

RANK_AUTO = "auto"


@dataclass(frozen=True)
class ReducedSvd:
    """Rank-r factors M ~ left @ diag(singular) @ right.T."""

    left: np.ndarray
    singular: np.ndarray
    right: np.ndarray
    rank: int

    def truncate(self, rank: int) -> "ReducedSvd":
        if not 1 <= rank <= self.rank:
            raise RangeError(f"cannot truncate rank {self.rank} to {rank}")
        return ReducedSvd(
            left=self.left[:, :rank],
            singular=self.singular[:rank],
            right=self.right[:, :rank],
            rank=rank,
        )


@dataclass(frozen=True)
class EvolutionMatrix:
    """Vandermonde matrix of eigenvalue powers; row i is (1, l_i, l_i^2, ...)."""

    values: np.ndarray
    horizon: int


@dataclass
class SpectrumMeta:
    method: str
    tau: int
    rank: int
    gamma: float
    mode_flavor: str
    n_sensors: int
    n_time: int
    delta_t: float


@dataclass
class DynamicSpectrum:
    """Eigenvalues, modes and amplitudes of one fitted decomposition."""

    eigenvalues: np.ndarray
    modes_exact: np.ndarray
    modes_projected: np.ndarray
    eigvecs_reduced: np.ndarray
    amplitudes: np.ndarray
    meta: SpectrumMeta
    sparsity: Optional[object] = field(default=None, repr=False)

    @property
    def modes(self) -> np.ndarray:
        """The mode matrix matching the flavor the amplitudes were fit with."""
        if self.meta.mode_flavor == "exact":
            return self.modes_exact
        return self.modes_projected

    def dominance_order(self) -> np.ndarray:
        """Mode indices sorted by decreasing |b_i| * ||phi_i||."""
        weight = np.abs(self.amplitudes) * np.linalg.norm(self.modes, axis=0)
        return np.argsort(-weight, kind="stable")


def hard_threshold_factor(beta: float) -> float:
    """Aspect-ratio polynomial of the optimal hard threshold."""
    return 0.56 * beta**3 - 0.95 * beta**2 + 1.82 * beta + 1.43


def optimal_rank(singular_values: np.ndarray, m: int, n: int) -> int:
    """Count singular values above the median-scaled hard threshold.

    ``m`` is the row count and ``n`` the column count of the matrix the
    values came from. The aspect ratio is beta = n/m (time over
    embedded-space); if n > m the ratio is flipped to stay in (0, 1]
    and a warning is emitted. Never returns less than 1.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0:
        raise RangeError("empty singular value vector")
    if m <= 0 or n <= 0:
        raise RangeError(f"matrix dimensions must be positive, got {m} x {n}")
    if n <= m:
        beta = n / m
    else:
        warnings.warn(
            f"aspect ratio n/m = {n}/{m} exceeds 1; using min/max instead",
            stacklevel=2,
        )
        beta = m / n
    delta = hard_threshold_factor(beta) * float(np.median(s))
    return max(int(np.sum(s > delta)), 1)


def snapshot_svd(matrix: np.ndarray, rank=RANK_AUTO) -> ReducedSvd:
    """Reduced SVD via eigendecomposition of the smaller Gram matrix.

    ``rank`` is either ``"auto"`` (hard threshold capped at the
    numerical rank) or a fixed positive integer. A fixed rank that
    reaches into numerically zero singular values raises
    RankDeficiencyError, because the snapshot path cannot produce
    meaningful vectors for them.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={a.ndim}")
    rows, cols = a.shape
    gram_on_cols = cols <= rows

    gram = a.T @ a if gram_on_cols else a @ a.T
    eigvals, eigvecs = np.linalg.eigh(gram)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    eigvecs = eigvecs[:, order]
    sing_all = np.sqrt(eigvals)

    if eigvals[0] <= 0.0:
        raise RankDeficiencyError("matrix is numerically zero")
    # Gram eigenvalues below eps * max-dim * lambda_1 carry no signal.
    num_rank = int(np.sum(eigvals > eigvals[0] * max(rows, cols) * _EPS))

    if rank == RANK_AUTO:
        r = min(optimal_rank(sing_all, rows, cols), max(num_rank, 1))
    else:
        r = int(rank)
        if not 1 <= r <= min(rows, cols):
            raise RangeError(f"fixed rank {r} outside 1..{min(rows, cols)}")
        if r > num_rank:
            raise RankDeficiencyError(
                f"rank {r} requested but only {num_rank} nonzero singular values"
            )

    sing = sing_all[:r]
    if gram_on_cols:
        right = eigvecs[:, :r]
        left = (a @ right) / sing
    else:
        left = eigvecs[:, :r]
        right = (a.T @ left) / sing
    return ReducedSvd(left=left, singular=sing, right=right, rank=r)


def projected_dynamics(target: np.ndarray, svd_of_source: ReducedSvd) -> np.ndarray:
    """Project the regression onto the source's POD basis: U* target V inv(S)."""
    target = np.asarray(target)
    u, s, v = svd_of_source.left, svd_of_source.singular, svd_of_source.right
    if target.shape != (u.shape[0], v.shape[0]):
        raise ShapeError(
            f"target shape {target.shape} does not match factors "
            f"{u.shape[0]} x {v.shape[0]}"
        )
    return u.conj().T @ target @ (v / s)


def eigendecompose(a_tilde: np.ndarray):
    """Eigendecompose the reduced propagator.

    Returns (eigenvalues, eigenvectors) ordered by decreasing modulus
    with phase as tie-breaker; eigenvector columns follow their values.
    """
    a_tilde = np.asarray(a_tilde)
    if a_tilde.ndim != 2 or a_tilde.shape[0] != a_tilde.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a_tilde.shape}")
    try:
        eigvals, eigvecs = np.linalg.eig(a_tilde)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    order = np.lexsort((np.angle(eigvals), -np.abs(eigvals)))
    return eigvals[order], eigvecs[:, order]


def dynamic_modes(
    target: np.ndarray, svd: ReducedSvd, w: np.ndarray, flavor: str = "exact"
) -> np.ndarray:
    """Lift reduced eigenvectors to full-space modes.

    exact:     Phi = target @ V @ inv(S) @ W
    projected: Phi = U @ W
    """
    if flavor == "projected":
        return svd.left @ w
    if flavor != "exact":
        raise RangeError(f"flavor must be 'exact' or 'projected', got {flavor!r}")
    target = np.asarray(target)
    if target.shape[1] != svd.right.shape[0]:
        raise ShapeError(
            f"target has {target.shape[1]} columns, right factor {svd.right.shape[0]} rows"
        )
    return target @ (svd.right / svd.singular) @ w


def amplitudes(modes: np.ndarray, initial: np.ndarray) -> np.ndarray:
    """Least-squares fit of mode weights to the initial snapshot."""
    modes = np.asarray(modes)
    initial = np.asarray(initial)
    if modes.ndim != 2 or modes.shape[1] == 0:
        raise RankDeficiencyError("mode matrix has no columns")
    if modes.shape[0] != initial.shape[0]:
        raise ShapeError(
            f"modes have {modes.shape[0]} rows, initial vector {initial.shape[0]}"
        )
    b, *_ = np.linalg.lstsq(modes, initial.astype(complex), rcond=1e-12)
    return b


def vandermonde(eigenvalues: np.ndarray, horizon: int) -> EvolutionMatrix:
    """Geometric progressions of each eigenvalue over ``horizon`` steps."""
    if horizon < 1:
        raise RangeError(f"horizon must be >= 1, got {horizon}")
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    values = np.vander(eigenvalues, N=horizon, increasing=True)
    return EvolutionMatrix(values=values, horizon=horizon)


def reconstruct(spectrum: DynamicSpectrum, horizon: int) -> np.ndarray:
    """Real part of Phi @ diag(b) @ Psi over ``horizon`` columns.

    ``horizon`` is the total number of reconstructed columns; passing
    the training length reproduces history, larger values extend the
    evolution into the future.
    """
    psi = vandermonde(spectrum.eigenvalues, horizon).values
    return np.real((spectrum.modes * spectrum.amplitudes) @ psi)


def extrapolate_continuous(
    spectrum: DynamicSpectrum, t: float, delta_t: float
) -> np.ndarray:
    """Evaluate the fitted evolution at a real-valued time index.

    ``t`` is 1-based and grid-aligned at integers: t = 1 returns the
    initial snapshot and integer t matches the corresponding
    Vandermonde column. Uses the principal branch of the complex log;
    eigenvalues at zero have no continuous-time rate.
    """
    if delta_t <= 0:
        raise RangeError(f"delta_t must be positive, got {delta_t}")
    eigs = spectrum.eigenvalues
    if np.any(eigs == 0):
        raise SingularEigenvalueError("zero eigenvalue has no logarithm")
    rates = np.log(eigs) / delta_t
    weights = np.exp(rates * (t - 1) * delta_t)
    return np.real((spectrum.modes * spectrum.amplitudes) @ weights)
