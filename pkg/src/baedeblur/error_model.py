"""Embedding multiplicative noise into an approximate additive error.

The measurement model ``y = n * (A x) + eta`` is rewritten exactly as

    y = A x + e,        e = (n - 1) * (A x) + eta,

and the combined error ``e`` is then approximated by a Gaussian whose
first two moments match.  With unit-mean ``n``, zero-mean ``eta``, and a
zero-mean prior on ``x``, the error mean is zero and the covariance is

    cov(e) = cov(eta) + cov(n) * (A cov(x) A'),

with ``*`` the entrywise (Schur) product.  For iid noise this collapses to
``sigma_eta^2 I + var(n) diag(A cov(x) A')``.  A refinement conditions the
error on ``x`` when the additive noise is correlated with the field:

    cov(e | x) = cov(eta) + cov(n) * (A cov(x) A')
                 - cov(eta, x) cov(x)^{-1} cov(x, eta),
    mean(e | x) = mean(eta) + cov(eta, x) cov(x)^{-1} (x - mean(x)).

The conditional mean is affine in ``x``, so downstream inference only needs
the gain matrix ``cov(eta, x) cov(x)^{-1}`` stored here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blur import ForwardOperator
from .linalg import CovarianceModel, symmetrize
from .noise import (
    AdditiveNoise,
    MultiplicativeNoise,
    additive_covariance,
    multiplicative_covariance,
)
from .priors import PriorModel

__all__ = [
    "ErrorStatistics",
    "error_mean",
    "error_covariance",
    "embedded_error_statistics",
    "conditional_error_stats",
    "whiten",
]


@dataclass(frozen=True)
class ErrorStatistics:
    """Gaussian summary of the embedded error term.

    ``mean_gain`` is ``None`` on the default (unconditional) path; when
    present, the effective error mean at field value ``x`` is
    ``mean + mean_gain @ (x - x_mean)``.
    """

    mean: np.ndarray
    cov: CovarianceModel
    cross_cov: np.ndarray | None = None
    mean_gain: np.ndarray | None = None
    x_mean: np.ndarray | None = None

    def mean_at(self, x: np.ndarray) -> np.ndarray:
        """Error mean evaluated at a concrete field ``x``."""
        if self.mean_gain is None:
            return self.mean
        return self.mean + self.mean_gain @ (np.asarray(x, dtype=float) - self.x_mean)


def error_mean(
    noise_mean: np.ndarray,
    additive_mean: np.ndarray,
    op: ForwardOperator,
    x_mean: np.ndarray,
) -> np.ndarray:
    """Mean of ``(n - 1) * (A x) + eta`` at the stated component means.

    Exactly zero whenever the multiplicative mean is one and the additive
    mean is zero, regardless of the field mean.
    """
    blurred = op.apply_dense(np.asarray(x_mean, dtype=float))
    return np.asarray(additive_mean, dtype=float) + (
        np.asarray(noise_mean, dtype=float) - 1.0
    ) * blurred


def error_covariance(
    additive_cov: CovarianceModel,
    mult_cov: CovarianceModel,
    propagated_prior: np.ndarray,
) -> CovarianceModel:
    """Moment-matched error covariance ``cov(eta) + cov(n) * (A cov(x) A')``."""
    schur = mult_cov.matrix * propagated_prior
    return CovarianceModel(symmetrize(additive_cov.matrix + schur))


def embedded_error_statistics(
    op: ForwardOperator,
    prior: PriorModel,
    mult_spec: MultiplicativeNoise,
    add_spec: AdditiveNoise,
) -> ErrorStatistics:
    """Assemble the default error statistics for a model configuration.

    Uses the library-wide component means (multiplicative one, additive
    zero), so the error mean reduces to zero identically.
    """
    grid = op.grid
    mult_cov = multiplicative_covariance(mult_spec, grid)
    add_cov = additive_covariance(add_spec, grid)
    propagated = op.propagate_covariance(prior.covariance())
    cov = error_covariance(add_cov, mult_cov, propagated)
    return ErrorStatistics(mean=np.zeros(grid.num_nodes), cov=cov)


def conditional_error_stats(
    additive_cov: CovarianceModel,
    mult_cov: CovarianceModel,
    op: ForwardOperator,
    prior: PriorModel,
    cross_cov: np.ndarray,
) -> ErrorStatistics:
    """Error statistics conditioned on the unknown field.

    ``cross_cov`` is ``cov(eta, x)``; passing all zeros reproduces the
    unconditional statistics exactly, which the tests rely on.
    """
    cross = np.asarray(cross_cov, dtype=float)
    n = op.grid.num_nodes
    if cross.shape != (n, n):
        raise ValueError(f"cross covariance must be {n} x {n}")
    propagated = op.propagate_covariance(prior.covariance())
    gain = prior.covariance().solve(cross.T).T
    reduced = symmetrize(
        additive_cov.matrix + mult_cov.matrix * propagated - gain @ cross.T
    )
    return ErrorStatistics(
        mean=np.zeros(n),
        cov=CovarianceModel(reduced),
        cross_cov=cross,
        mean_gain=gain,
        x_mean=prior.mean.values.copy(),
    )


def whiten(stats: ErrorStatistics, residual: np.ndarray) -> np.ndarray:
    """Whiten a residual against the error model: ``C^{-1}(residual - mean)``.

    The output has identity covariance when the residual follows the
    Gaussian error model.
    """
    res = np.asarray(residual, dtype=float)
    if res.ndim == 1:
        return stats.cov.whiten(res - stats.mean)
    return stats.cov.whiten((res - stats.mean[None, :]).T).T
