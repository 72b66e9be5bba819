"""Periodic Gaussian blur as an explicit circulant operator.

The kernel is the bivariate Gaussian

    k(s) = (hx * hy) / (2 pi kappa^2) * exp(-|s|^2 / (2 kappa^2)),

sampled at minimum-image displacements on the periodic grid and weighted
by the pixel area, so the kernel mass approximates the unit integral of
the continuous kernel.  Applications are direct summations over kernel
entries (no transforms), and `dense` materializes the full matrix for
desk-scale grids; the two routes are independent and are checked against
each other in the tests.
"""

from __future__ import annotations

import numpy as np

from .grids import Grid, GridField, field_from_matrix
from .linalg import CovarianceModel, symmetrize

__all__ = ["gaussian_kernel", "ForwardOperator", "DENSE_NODE_LIMIT"]

# Dense realization is meant for analysis-sized grids only.
DENSE_NODE_LIMIT = 4096


def _min_image_offsets(n: int, h: float) -> np.ndarray:
    """Signed displacement of each periodic lag, in physical units."""
    lags = np.arange(n)
    return np.where(lags > n / 2, lags - n, lags) * h


def gaussian_kernel(
    grid: Grid, kappa: float, trunc_radius: float | None = None
) -> GridField:
    """Periodized, area-weighted Gaussian kernel raster on ``grid``.

    ``trunc_radius`` zeroes entries beyond that physical distance; by
    default nothing is truncated, which keeps the kernel mass within
    discretization error of one whenever ``kappa`` is small against the
    grid extent.
    """
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    if trunc_radius is not None and trunc_radius <= 0.0:
        raise ValueError("trunc_radius must be positive when given")
    sx = _min_image_offsets(grid.nx, grid.hx)
    sy = _min_image_offsets(grid.ny, grid.hy)
    d2 = sy[:, None] ** 2 + sx[None, :] ** 2
    raster = (grid.hx * grid.hy) / (2.0 * np.pi * kappa**2) * np.exp(
        -d2 / (2.0 * kappa**2)
    )
    if trunc_radius is not None:
        raster = np.where(d2 <= trunc_radius**2, raster, 0.0)
    return field_from_matrix(grid, raster)


class ForwardOperator:
    """Circulant convolution operator built from a kernel raster.

    Attributes
    ----------
    kernel : GridField
        Kernel raster indexed by periodic lag, entry ``[0]`` at lag zero.
    kernel_mass : float
        Sum of retained kernel entries.
    truncation_error : float
        Kernel mass removed by truncation (zero when none was requested).
    """

    def __init__(self, grid: Grid, kappa: float, trunc_radius: float | None = None):
        self.grid = grid
        self.kappa = kappa
        full = gaussian_kernel(grid, kappa)
        self.kernel = (
            full if trunc_radius is None else gaussian_kernel(grid, kappa, trunc_radius)
        )
        self.kernel_mass = float(self.kernel.values.sum())
        self.truncation_error = float(full.values.sum()) - self.kernel_mass
        self._dense: np.ndarray | None = None

    @classmethod
    def identity(cls, grid: Grid) -> "ForwardOperator":
        """Test hook: operator whose kernel is a discrete delta at lag zero."""
        op = cls.__new__(cls)
        op.grid = grid
        op.kappa = None
        raster = np.zeros(grid.shape)
        raster[0, 0] = 1.0
        op.kernel = field_from_matrix(grid, raster)
        op.kernel_mass = 1.0
        op.truncation_error = 0.0
        op._dense = None
        return op

    def apply(self, field: GridField) -> GridField:
        """Convolve by direct summation over retained kernel entries."""
        if field.grid != self.grid:
            raise ValueError("field lives on a different grid")
        image = field.as_matrix()
        raster = self.kernel.as_matrix()
        lags_y, lags_x = np.nonzero(raster)
        out = np.zeros(self.grid.shape)
        for b, a in zip(lags_y, lags_x):
            out += raster[b, a] * np.roll(image, (b, a), axis=(0, 1))
        return field_from_matrix(self.grid, out)

    def dense(self) -> np.ndarray:
        """Materialize the circulant matrix; cached after the first call."""
        if self._dense is None:
            n = self.grid.num_nodes
            if n > DENSE_NODE_LIMIT:
                raise ValueError(
                    f"dense realization limited to {DENSE_NODE_LIMIT} nodes, got {n}"
                )
            idx = np.arange(n)
            px = (idx % self.grid.nx).astype(np.int64)
            py = (idx // self.grid.nx).astype(np.int64)
            di = (px[:, None] - px[None, :]) % self.grid.nx
            dj = (py[:, None] - py[None, :]) % self.grid.ny
            self._dense = self.kernel.as_matrix()[dj, di]
        return self._dense

    def apply_dense(self, values: np.ndarray) -> np.ndarray:
        """Matrix route for flat vectors or stacked columns."""
        return self.dense() @ np.asarray(values, dtype=float)

    def propagate_covariance(self, cov: CovarianceModel) -> np.ndarray:
        """Push a covariance through the operator: ``A @ cov @ A.T``."""
        dense = self.dense()
        return symmetrize(dense @ cov.matrix @ dense.T)
