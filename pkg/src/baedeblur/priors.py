"""Smoothness prior built from finite-element mass and stiffness matrices.

The prior covariance is the squared inverse of the sparse operator

    L = c1 * (c2 * G + M),

where ``G`` and ``M`` are the stiffness and mass matrices of a bilinear
finite-element discretization on the pixel grid (natural boundary
conditions, one rectangular element per pixel cell).  ``L`` is symmetric
positive definite for ``c1 > 0`` and ``c2 >= 0``, so the covariance
``L^{-2}`` never needs jitter, and whitening with ``L`` itself is exact:
``L`` is the symmetric square root of the prior precision ``L @ L``.

Larger ``c2`` weights the stiffness term and lengthens spatial correlation;
larger ``c1`` shrinks pointwise variance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.linalg import splu

from .grids import Grid, GridField, make_field
from .linalg import CovarianceModel, symmetrize
from .rng import stream_rng

__all__ = [
    "FemMatrices",
    "assemble_mass_stiffness",
    "PriorModel",
    "build_prior",
    "sample_prior",
    "correlation_function",
]

# Reference element matrices for bilinear basis functions on an a-by-b
# rectangle, local node order (0,0), (a,0), (a,b), (0,b).  Mass scales by
# a*b/36; stiffness is (b/(6a)) * _KX + (a/(6b)) * _KY.
_MASS = np.array(
    [
        [4.0, 2.0, 1.0, 2.0],
        [2.0, 4.0, 2.0, 1.0],
        [1.0, 2.0, 4.0, 2.0],
        [2.0, 1.0, 2.0, 4.0],
    ]
)
_KX = np.array(
    [
        [2.0, -2.0, -1.0, 1.0],
        [-2.0, 2.0, 1.0, -1.0],
        [-1.0, 1.0, 2.0, -2.0],
        [1.0, -1.0, -2.0, 2.0],
    ]
)
_KY = np.array(
    [
        [2.0, 1.0, -1.0, -2.0],
        [1.0, 2.0, -2.0, -1.0],
        [-1.0, -2.0, 2.0, 1.0],
        [-2.0, -1.0, 1.0, 2.0],
    ]
)


@dataclass(frozen=True)
class FemMatrices:
    """Assembled sparse stiffness and mass matrices on a grid."""

    grid: Grid
    stiffness: scipy.sparse.csr_matrix
    mass: scipy.sparse.csr_matrix


def _element_matrices(hx: float, hy: float) -> tuple[np.ndarray, np.ndarray]:
    mass = (hx * hy / 36.0) * _MASS
    stiffness = (hy / (6.0 * hx)) * _KX + (hx / (6.0 * hy)) * _KY
    return stiffness, mass


def assemble_mass_stiffness(grid: Grid) -> FemMatrices:
    """Assemble global stiffness and mass matrices over all pixel cells.

    Every cell between four neighboring nodes is one element; no boundary
    rows are altered, which leaves the natural (zero-flux) condition.
    """
    stiff_e, mass_e = _element_matrices(grid.hx, grid.hy)
    nx, ny = grid.nx, grid.ny
    ex, ey = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="ij")
    base = (ey * nx + ex).reshape(-1)
    # Local order (0,0), (1,0), (1,1), (0,1) relative to the cell corner.
    nodes = np.column_stack((base, base + 1, base + nx + 1, base + nx))
    rows = np.repeat(nodes, 4, axis=1).reshape(-1)
    cols = np.tile(nodes, (1, 4)).reshape(-1)
    n_el = nodes.shape[0]
    stiffness = scipy.sparse.coo_matrix(
        (np.tile(stiff_e.reshape(-1), n_el), (rows, cols)),
        shape=(grid.num_nodes, grid.num_nodes),
    ).tocsr()
    mass = scipy.sparse.coo_matrix(
        (np.tile(mass_e.reshape(-1), n_el), (rows, cols)),
        shape=(grid.num_nodes, grid.num_nodes),
    ).tocsr()
    return FemMatrices(grid=grid, stiffness=stiffness, mass=mass)


@dataclass
class PriorModel:
    """Gaussian field prior with sparse precision square root.

    Attributes
    ----------
    grid : Grid
    mean : GridField
    c1, c2 : float
        Overall inverse scale and stiffness weight in ``L = c1(c2 G + M)``.
    fem : FemMatrices
    root : csr_matrix
        The sparse operator ``L``; symmetric positive definite.
    """

    grid: Grid
    mean: GridField
    c1: float
    c2: float
    fem: FemMatrices
    root: scipy.sparse.csr_matrix
    _lu: object = field(default=None, repr=False)
    _cov: CovarianceModel | None = field(default=None, repr=False)

    def _solver(self):
        if self._lu is None:
            self._lu = splu(self.root.tocsc())
        return self._lu

    def root_solve(self, rhs: np.ndarray) -> np.ndarray:
        """Apply ``L^{-1}`` to a vector or to stacked columns."""
        return self._solver().solve(np.asarray(rhs, dtype=float))

    def whiten(self, deviation: np.ndarray) -> np.ndarray:
        """Map a deviation from the mean to unit-covariance coordinates.

        ``L`` is its own transpose, so ``L @ deviation`` has identity
        covariance under the prior and ``||L d||^2 = d' (L L) d`` is the
        prior quadratic form.
        """
        return self.root @ np.asarray(deviation, dtype=float)

    def precision_dense(self) -> np.ndarray:
        """Dense prior precision ``L @ L``."""
        return symmetrize((self.root @ self.root).toarray())

    def precision_apply(self, vec: np.ndarray) -> np.ndarray:
        return self.root @ (self.root @ np.asarray(vec, dtype=float))

    def covariance(self) -> CovarianceModel:
        """Dense prior covariance ``L^{-2}``, built once and cached."""
        if self._cov is None:
            inv_root = scipy.linalg.solve(
                self.root.toarray(), np.eye(self.grid.num_nodes), assume_a="pos"
            )
            self._cov = CovarianceModel(inv_root @ inv_root)
        return self._cov

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Sample ``count`` fields as rows via ``mean + L^{-1} w``."""
        white = rng.standard_normal((self.grid.num_nodes, count))
        return self.mean.values[None, :] + self.root_solve(white).T


def build_prior(
    grid: Grid,
    c1: float,
    c2: float,
    mean: GridField | None = None,
    fem: FemMatrices | None = None,
) -> PriorModel:
    """Assemble the prior ``N(mean, (c1(c2 G + M))^{-2})`` on ``grid``."""
    if c1 <= 0.0:
        raise ValueError("c1 must be positive")
    if c2 < 0.0:
        raise ValueError("c2 must be non-negative")
    if fem is None:
        fem = assemble_mass_stiffness(grid)
    if mean is None:
        mean = make_field(grid, np.zeros(grid.num_nodes))
    if mean.grid != grid:
        raise ValueError("prior mean lives on a different grid")
    root = (c1 * (c2 * fem.stiffness + fem.mass)).tocsr()
    return PriorModel(grid=grid, mean=mean, c1=c1, c2=c2, fem=fem, root=root)


def sample_prior(prior: PriorModel, seed: int, count: int, stream: int = 0) -> list[GridField]:
    """Draw reproducible prior realizations; same seed, same fields."""
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return []
    draws = prior.draw(stream_rng(seed, stream), count)
    return [make_field(prior.grid, row) for row in draws]


def correlation_function(prior: PriorModel, center: int) -> GridField:
    """Correlation of every node with the ``center`` node; 1 at the center."""
    cov = prior.covariance().matrix
    if not (0 <= center < prior.grid.num_nodes):
        raise IndexError("center node outside grid")
    diag = np.diag(cov)
    corr = cov[center] / np.sqrt(diag[center] * diag)
    return make_field(prior.grid, corr)
