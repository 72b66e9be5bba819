"""Dense symmetric positive-definite covariance handling.

Every covariance in the package is wrapped in `CovarianceModel`, which owns
the one place where Cholesky factorization, jitter, solves, whitening, and
sampling happen.  The jitter policy is deterministic: factor the matrix as
given; on failure add ``jitter * I`` exactly once and retry; a second
failure raises `FactorizationError`.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

__all__ = ["FactorizationError", "symmetrize", "CovarianceModel"]


class FactorizationError(RuntimeError):
    """A matrix required to be positive definite could not be factored."""


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    """Average a matrix with its transpose to kill round-off asymmetry."""
    return 0.5 * (matrix + matrix.T)


class CovarianceModel:
    """Symmetric positive-definite matrix with a lazily cached factorization.

    Parameters
    ----------
    matrix : ndarray
        Square symmetric matrix; symmetrized defensively on input.
    jitter : float
        Diagonal boost applied once if plain Cholesky fails.
    """

    def __init__(self, matrix: np.ndarray, jitter: float = 1e-10):
        mat = np.asarray(matrix, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("covariance must be square")
        if not np.all(np.isfinite(mat)):
            raise ValueError("covariance entries must be finite")
        self._matrix = symmetrize(mat)
        self._jitter = float(jitter)
        self._chol: np.ndarray | None = None
        self._jitter_used = False

    @classmethod
    def from_scaled_identity(cls, dim: int, variance: float) -> "CovarianceModel":
        """Scaled identity; ``variance = 0`` gives a degenerate zero matrix
        meant for algebraic use only, not for solves."""
        if variance < 0.0:
            raise ValueError("variance must be non-negative")
        return cls(variance * np.eye(dim))

    @classmethod
    def from_diagonal(cls, diagonal: np.ndarray) -> "CovarianceModel":
        diag = np.asarray(diagonal, dtype=float)
        if np.any(diag <= 0.0):
            raise ValueError("diagonal variances must be positive")
        return cls(np.diag(diag))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def jitter_used(self) -> bool:
        """Whether the cached factor belongs to the jittered matrix."""
        return self._jitter_used

    def cholesky(self) -> np.ndarray:
        """Lower factor ``C`` with ``C @ C.T`` equal to the (jittered) matrix."""
        if self._chol is None:
            try:
                self._chol = np.linalg.cholesky(self._matrix)
            except np.linalg.LinAlgError:
                boosted = self._matrix + self._jitter * np.eye(self.dim)
                try:
                    self._chol = np.linalg.cholesky(boosted)
                except np.linalg.LinAlgError as exc:
                    raise FactorizationError(
                        "covariance is not positive definite even after "
                        f"adding jitter {self._jitter:g}"
                    ) from exc
                self._matrix = boosted
                self._jitter_used = True
        return self._chol

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Apply the inverse covariance to ``rhs`` (vector or stacked columns)."""
        chol = self.cholesky()
        return scipy.linalg.cho_solve((chol, True), rhs, check_finite=False)

    def whiten(self, residual: np.ndarray) -> np.ndarray:
        """Forward-substitute ``C^{-1} residual`` so the output has unit covariance.

        Accepts a vector or a matrix whose columns are residuals.
        """
        chol = self.cholesky()
        return scipy.linalg.solve_triangular(
            chol, residual, lower=True, check_finite=False
        )

    def whitening_matrix(self) -> np.ndarray:
        """Dense ``W = C^{-1}`` with ``W.T @ W`` equal to the inverse covariance."""
        chol = self.cholesky()
        return scipy.linalg.solve_triangular(
            chol, np.eye(self.dim), lower=True, check_finite=False
        )

    def diagonal(self) -> np.ndarray:
        return np.diag(self._matrix).copy()

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Draw ``count`` zero-mean samples, one per row."""
        white = rng.standard_normal((self.dim, count))
        return (self.cholesky() @ white).T
