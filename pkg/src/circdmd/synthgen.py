"""Deterministic synthetic data with known spectral content.

Every property test in the suite leans on this module as its ground
truth: component periods, amplitudes and spatial profiles are chosen
up front, so the fitted spectra can be checked against them. Streams
are reproducible bit-exactly from (spec, seed); the PRNG is NumPy's
default_rng (PCG64) and the draw order is fixed: missing spatial
profiles first, then noise, then outlier positions and signs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .datamodel import SpeedMatrix
from .errors import ConfigError, RangeError

INFINITE = math.inf


@dataclass(frozen=True)
class Component:
    """One harmonic building block: amplitude * profile * cos(2*pi*t*dt/period + phase).

    ``period`` is in hours; ``math.inf`` yields a constant (mean)
    component. ``spatial_profile`` is a length-N vector; ``None`` draws
    a random unit-norm profile from the spec's seed.
    """

    period: float
    amplitude: float
    phase: float = 0.0
    spatial_profile: Optional[np.ndarray] = None


@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    t: int
    delta_t: float
    components: Tuple[Component, ...]
    noise_sigma: float = 0.0
    outlier_rate: float = 0.0
    outlier_magnitude: float = 0.0
    seed: int = 0


def generate(spec: SyntheticSpec) -> SpeedMatrix:
    """Materialize the spec as a SpeedMatrix."""
    if spec.n < 1 or spec.t < 2:
        raise ConfigError(f"need n >= 1 and t >= 2, got {spec.n} x {spec.t}")
    if spec.delta_t <= 0:
        raise ConfigError(f"delta_t must be positive, got {spec.delta_t}")
    if spec.noise_sigma < 0:
        raise ConfigError(f"noise_sigma must be >= 0, got {spec.noise_sigma}")
    if not 0.0 <= spec.outlier_rate <= 1.0:
        raise ConfigError(f"outlier_rate must be in [0, 1], got {spec.outlier_rate}")

    rng = np.random.default_rng(spec.seed)
    profiles = []
    for comp in spec.components:
        if comp.period <= 0:
            raise ConfigError(f"component period must be positive, got {comp.period}")
        if comp.spatial_profile is None:
            v = rng.standard_normal(spec.n)
            v /= np.linalg.norm(v)
        else:
            v = np.asarray(comp.spatial_profile, dtype=float)
            if v.shape != (spec.n,):
                raise ConfigError(
                    f"spatial profile has shape {v.shape}, expected ({spec.n},)"
                )
        profiles.append(v)

    hours = np.arange(spec.t) * spec.delta_t
    values = np.zeros((spec.n, spec.t))
    for comp, profile in zip(spec.components, profiles):
        temporal = np.cos(2.0 * np.pi * hours / comp.period + comp.phase)
        values += comp.amplitude * np.outer(profile, temporal)

    if spec.noise_sigma > 0:
        values = values + rng.normal(0.0, spec.noise_sigma, size=values.shape)
    if spec.outlier_rate > 0:
        mask = rng.random(values.shape) < spec.outlier_rate
        signs = rng.choice([-1.0, 1.0], size=values.shape)
        values = values + mask * signs * spec.outlier_magnitude
    return SpeedMatrix(values=values, delta_t=spec.delta_t)


def generate_linear_system(
    a_true: np.ndarray, x0: np.ndarray, t: int, delta_t: float = 1.0
) -> SpeedMatrix:
    """Iterate x_{k+1} = A x_k for t columns starting from x0."""
    a_true = np.asarray(a_true, dtype=float)
    x0 = np.asarray(x0, dtype=float).ravel()
    if t < 2:
        raise RangeError(f"need t >= 2, got {t}")
    if a_true.ndim != 2 or a_true.shape[0] != a_true.shape[1]:
        raise ConfigError(f"a_true must be square, got shape {a_true.shape}")
    if x0.shape[0] != a_true.shape[0]:
        raise ConfigError(
            f"x0 length {x0.shape[0]} does not match system size {a_true.shape[0]}"
        )
    columns = np.empty((a_true.shape[0], t))
    columns[:, 0] = x0
    for k in range(1, t):
        columns[:, k] = a_true @ columns[:, k - 1]
    return SpeedMatrix(values=columns, delta_t=delta_t)


def rotation_system(angles, seed: int = 0) -> np.ndarray:
    """Block-diagonal 2-D rotations mixed by a random orthogonal basis.

    Produces a real matrix with eigenvalues exp(+-i*theta) for each
    angle; handy for building unit-circle ground truth.
    """
    angles = list(angles)
    dim = 2 * len(angles)
    blocks = np.zeros((dim, dim))
    for k, theta in enumerate(angles):
        c, s = math.cos(theta), math.sin(theta)
        blocks[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = [[c, -s], [s, c]]
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q @ blocks @ q.T
