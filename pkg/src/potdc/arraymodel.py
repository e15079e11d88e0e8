"""Uniform-linear-array signal model.

Steering vectors, incoherently-scattered source covariances synthesized by
quadrature over an angular power density, snapshot generation and the output
SINR measure.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .linalg import psd_sqrt_factor, require_hermitian

__all__ = [
    "ArrayConfig",
    "GaussianDensity",
    "UniformDensity",
    "TruncatedLaplacianDensity",
    "ScatteredSource",
    "angle_grid",
    "steering",
    "steering_matrix",
    "covariance_from_density",
    "generate_snapshots",
    "sample_covariance",
    "output_sinr",
]

DEFAULT_GRID_POINTS = 721  # 0.25 deg steps over [-90, 90]


@dataclass(frozen=True)
class ArrayConfig:
    num_elements: int
    spacing: float = 0.5  # in wavelengths

    def __post_init__(self):
        if self.num_elements < 2:
            raise InvalidInput("need at least 2 array elements")
        if self.spacing <= 0:
            raise InvalidInput("element spacing must be positive")


@dataclass(frozen=True)
class GaussianDensity:
    """Gaussian angular power density; spread is the standard deviation in
    degrees."""
    center_deg: float
    spread_deg: float

    def raw_values(self, grid_deg):
        return np.exp(-0.5 * ((grid_deg - self.center_deg) / self.spread_deg) ** 2)


@dataclass(frozen=True)
class UniformDensity:
    """Uniform density over a sector; width is the total width in degrees."""
    center_deg: float
    width_deg: float

    def raw_values(self, grid_deg):
        half = 0.5 * self.width_deg
        inside = np.abs(grid_deg - self.center_deg) <= half + 1e-12
        return inside.astype(float)


@dataclass(frozen=True)
class TruncatedLaplacianDensity:
    """Laplacian density truncated to a support interval and distorted by
    seeded per-grid-point multiplicative fluctuations.

    The scale parameter is in radians (the angle is converted before the
    exponential is evaluated).
    """
    center_deg: float
    scale: float
    support_deg: tuple = (15.0, 45.0)
    fluctuation_seed: int = 7
    fluctuation_strength: float = 0.9

    def raw_values(self, grid_deg):
        x = np.deg2rad(np.abs(grid_deg - self.center_deg))
        vals = np.exp(-x / self.scale)
        lo, hi = self.support_deg
        vals = np.where((grid_deg >= lo) & (grid_deg <= hi), vals, 0.0)
        if self.fluctuation_strength > 0:
            rng = np.random.default_rng(self.fluctuation_seed)
            u = rng.uniform(-self.fluctuation_strength,
                            self.fluctuation_strength, size=grid_deg.shape)
            vals = vals * (1.0 + u)
        return vals


@dataclass(frozen=True)
class ScatteredSource:
    density: object
    power: float = 1.0

    def __post_init__(self):
        if self.power < 0:
            raise InvalidInput("source power must be nonnegative")


def angle_grid(grid_points=DEFAULT_GRID_POINTS):
    return np.linspace(-90.0, 90.0, grid_points)


def _trapezoid_weights(grid_deg):
    d = grid_deg[1] - grid_deg[0]
    w = np.full(grid_deg.shape, d)
    w[0] = w[-1] = 0.5 * d
    return w


def normalized_density(density, grid_deg):
    """Density sampled on the grid, normalized so its trapezoid integral is 1."""
    vals = density.raw_values(grid_deg)
    if np.any(vals < 0):
        raise InvalidInput("angular power density must be nonnegative")
    total = float(np.sum(vals * _trapezoid_weights(grid_deg)))
    if total <= 0:
        raise InvalidInput("angular power density integrates to zero")
    return vals / total


def steering(cfg, theta_deg):
    """Steering vector a(theta) with entries exp(j*2*pi*d*m*sin(theta))."""
    if abs(theta_deg) > 90.0:
        raise InvalidInput("direction must lie in [-90, 90] degrees")
    m = np.arange(cfg.num_elements)
    return np.exp(2j * np.pi * cfg.spacing * m * np.sin(np.deg2rad(theta_deg)))


def steering_matrix(cfg, grid_deg):
    m = np.arange(cfg.num_elements)[:, None]
    return np.exp(2j * np.pi * cfg.spacing * m * np.sin(np.deg2rad(grid_deg))[None, :])


def covariance_from_density(cfg, src, grid_points=DEFAULT_GRID_POINTS):
    """Source covariance  power * integral zeta(theta) a a^H dtheta  by
    composite trapezoid quadrature over [-90, 90] degrees."""
    if grid_points < 181:
        raise InvalidInput("need at least 181 quadrature points")
    grid = angle_grid(grid_points)
    zeta = normalized_density(src.density, grid)
    A = steering_matrix(cfg, grid)
    w = zeta * _trapezoid_weights(grid)
    R = (A * w[None, :]) @ A.conj().T
    R = 0.5 * (R + R.conj().T)
    return src.power * R


def _circular_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def generate_snapshots(R_s, R_int, noise_power, K, seed):
    """K array snapshots x(k) = R_s^{1/2} z_s + R_int^{1/2} z_i + sqrt(n) z_n
    with independent circular complex Gaussian excitations.

    Returns an (K, M) array; rows are snapshots.  Deterministic per seed.
    """
    if noise_power <= 0:
        raise InvalidInput("noise power must be positive")
    if K < 1:
        raise InvalidInput("need at least one snapshot")
    mats = [m for m in (R_s, R_int) if m is not None]
    if not mats:
        raise InvalidInput("at least one covariance must be given")
    M = np.asarray(mats[0]).shape[0]
    rng = np.random.default_rng(seed)
    x = np.zeros((K, M), dtype=np.complex128)
    for R in (R_s, R_int):
        if R is not None and np.any(R):
            Q = psd_sqrt_factor(R)
            x += _circular_gaussian(rng, (K, M)) @ Q
    x += np.sqrt(noise_power) * _circular_gaussian(rng, (K, M))
    return x


def sample_covariance(X):
    """(1/K) sum x x^H over the snapshot rows of X."""
    X = np.asarray(X, dtype=np.complex128)
    if X.ndim != 2 or X.shape[0] < 1:
        raise InvalidInput("snapshot set must be a nonempty (K, M) array")
    R = X.conj().T @ X / X.shape[0]
    return 0.5 * (R + R.conj().T)


def output_sinr(w, R_s, R_in):
    """Output SINR 10*log10(w^H R_s w / w^H R_in w) in dB."""
    w = np.asarray(w, dtype=np.complex128)
    if not np.any(w):
        raise InvalidInput("beamformer weights must be nonzero")
    R_s = require_hermitian(R_s, name="R_s")
    R_in = require_hermitian(R_in, name="R_in")
    den = float(np.real(w.conj() @ R_in @ w))
    if den <= 0:
        raise InvalidInput("interference-plus-noise power is not positive")
    num = float(np.real(w.conj() @ R_s @ w))
    return 10.0 * np.log10(max(num, 1e-300) / den)
