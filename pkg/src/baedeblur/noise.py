"""Noise laws for the measurement model ``y = n * (A x) + eta``.

Multiplicative noise ``n`` always has mean one; the supported laws are

* gamma with shape ``L`` and scale ``1/L`` (variance ``1/L``, never negative),
* normal with standard deviation ``sigma``,
* uniform on ``[1 - w, 1 + w]`` (variance ``w^2 / 3``),
* spatially correlated normal with squared-exponential correlation
  ``exp(-d^2 / (2 l^2))`` over Euclidean inter-pixel distance ``d`` measured
  in pixel units.

Additive noise ``eta`` is zero-mean iid normal; its level is usually
calibrated to a fraction of the value range of the noiseless observation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .grids import Grid, GridField, make_field, value_range
from .linalg import CovarianceModel
from .rng import stream_rng

__all__ = [
    "GammaNoise",
    "NormalNoise",
    "UniformNoise",
    "CorrelatedNormalNoise",
    "AdditiveNoise",
    "MultiplicativeNoise",
    "multiplicative_covariance",
    "additive_covariance",
    "negative_probability",
    "calibrate_additive_sigma",
    "sample_multiplicative",
    "sample_additive",
    "draw_multiplicative",
    "draw_additive",
]


@dataclass(frozen=True)
class GammaNoise:
    """Gamma law with mean one: shape ``L``, scale ``1/L``, variance ``1/L``."""

    shape: float

    def __post_init__(self) -> None:
        if self.shape <= 0.0:
            raise ValueError("gamma shape must be positive")

    @property
    def variance(self) -> float:
        return 1.0 / self.shape


@dataclass(frozen=True)
class NormalNoise:
    """Normal law with mean one and standard deviation ``sigma``.

    ``sigma = 0`` is the degenerate point mass at one, kept legal so that
    reductions to the purely additive model stay expressible.
    """

    sigma: float

    def __post_init__(self) -> None:
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")

    @property
    def variance(self) -> float:
        return self.sigma**2


@dataclass(frozen=True)
class UniformNoise:
    """Uniform law on ``[1 - half_width, 1 + half_width]``."""

    half_width: float

    def __post_init__(self) -> None:
        if self.half_width <= 0.0:
            raise ValueError("half_width must be positive")

    @property
    def variance(self) -> float:
        return self.half_width**2 / 3.0


@dataclass(frozen=True)
class CorrelatedNormalNoise:
    """Normal law, mean one, with squared-exponential spatial correlation.

    ``corr_length`` is measured in pixels; as it shrinks below one pixel
    the covariance approaches the iid normal case.
    """

    sigma: float
    corr_length: float

    def __post_init__(self) -> None:
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.corr_length <= 0.0:
            raise ValueError("corr_length must be positive")

    @property
    def variance(self) -> float:
        return self.sigma**2


MultiplicativeNoise = GammaNoise | NormalNoise | UniformNoise | CorrelatedNormalNoise


@dataclass(frozen=True)
class AdditiveNoise:
    """Zero-mean iid normal additive noise with standard deviation ``sigma``.

    ``sigma = 0`` is legal for noiseless simulation; covariances built from
    it are degenerate and only usable where something else keeps the total
    error covariance positive definite.
    """

    sigma: float

    def __post_init__(self) -> None:
        if self.sigma < 0.0:
            raise ValueError("sigma must be non-negative")

    @property
    def variance(self) -> float:
        return self.sigma**2


def _pixel_correlation(grid: Grid, corr_length: float) -> np.ndarray:
    idx = np.arange(grid.num_nodes)
    px = idx % grid.nx
    py = idx // grid.nx
    d2 = (px[:, None] - px[None, :]) ** 2 + (py[:, None] - py[None, :]) ** 2
    return np.exp(-d2 / (2.0 * corr_length**2))


def multiplicative_covariance(spec: MultiplicativeNoise, grid: Grid) -> CovarianceModel:
    """Covariance of the multiplicative noise field on ``grid``."""
    if isinstance(spec, CorrelatedNormalNoise):
        return CovarianceModel(spec.variance * _pixel_correlation(grid, spec.corr_length))
    return CovarianceModel.from_scaled_identity(grid.num_nodes, spec.variance)


def additive_covariance(spec: AdditiveNoise, grid: Grid) -> CovarianceModel:
    return CovarianceModel.from_scaled_identity(grid.num_nodes, spec.variance)


def negative_probability(spec: MultiplicativeNoise) -> float:
    """Marginal probability that one multiplicative noise value is negative."""
    if isinstance(spec, GammaNoise):
        return 0.0
    if isinstance(spec, (NormalNoise, CorrelatedNormalNoise)):
        if spec.sigma == 0.0:
            return 0.0
        return float(norm.cdf(-1.0 / spec.sigma))
    if isinstance(spec, UniformNoise):
        if spec.half_width <= 1.0:
            return 0.0
        return float((spec.half_width - 1.0) / (2.0 * spec.half_width))
    raise TypeError(f"unknown multiplicative noise spec {spec!r}")


def calibrate_additive_sigma(noiseless: GridField, fraction: float) -> AdditiveNoise:
    """Additive level as a fraction of the noiseless observation range."""
    if fraction <= 0.0:
        raise ValueError("fraction must be positive")
    spread = value_range(noiseless)
    if spread == 0.0:
        raise ValueError("noiseless observation is constant; range is zero")
    return AdditiveNoise(sigma=fraction * spread)


def draw_multiplicative(
    spec: MultiplicativeNoise, grid: Grid, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Draw ``count`` noise fields as rows of a ``(count, n)`` array."""
    size = (count, grid.num_nodes)
    if isinstance(spec, GammaNoise):
        return rng.gamma(shape=spec.shape, scale=1.0 / spec.shape, size=size)
    if isinstance(spec, NormalNoise):
        return 1.0 + spec.sigma * rng.standard_normal(size)
    if isinstance(spec, UniformNoise):
        return rng.uniform(1.0 - spec.half_width, 1.0 + spec.half_width, size=size)
    if isinstance(spec, CorrelatedNormalNoise):
        cov = multiplicative_covariance(spec, grid)
        return 1.0 + cov.sample(rng, count)
    raise TypeError(f"unknown multiplicative noise spec {spec!r}")


def draw_additive(
    spec: AdditiveNoise, grid: Grid, rng: np.random.Generator, count: int
) -> np.ndarray:
    return spec.sigma * rng.standard_normal((count, grid.num_nodes))


def sample_multiplicative(
    spec: MultiplicativeNoise, grid: Grid, seed: int, stream: int = 0
) -> GridField:
    """One reproducible multiplicative noise field for ``(seed, stream)``."""
    row = draw_multiplicative(spec, grid, stream_rng(seed, stream), 1)[0]
    return make_field(grid, row)


def sample_additive(
    spec: AdditiveNoise, grid: Grid, seed: int, stream: int = 0
) -> GridField:
    """One reproducible additive noise field for ``(seed, stream)``."""
    row = draw_additive(spec, grid, stream_rng(seed, stream), 1)[0]
    return make_field(grid, row)
