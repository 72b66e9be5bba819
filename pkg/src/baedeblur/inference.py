"""Closed-form Gaussian inference under the embedded error model.

With Gaussian error statistics the negative log-posterior is quadratic,

    J(x) = 1/2 |C^{-1}(y - A x - mean(e))|^2 + 1/2 |L (x - x0)|^2,

so the estimate solves one symmetric positive-definite linear system

    (M' cov(e)^{-1} M + L L) (x - x0) = M' cov(e)^{-1} (y - A x0 - mean(e)),

where ``M = A + G`` absorbs the conditional-mean gain ``G`` of the error
model (``G = 0`` on the default path).  The same coefficient matrix is the
posterior precision, whose inverse supplies pointwise standard deviations
and credible bands.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .blur import ForwardOperator
from .error_model import ErrorStatistics
from .grids import GridField, make_field
from .linalg import CovarianceModel, FactorizationError, symmetrize
from .priors import PriorModel

__all__ = [
    "PosteriorSummary",
    "map_estimate",
    "posterior_covariance",
    "credible_band",
    "coverage_fraction",
    "summarize_posterior",
]


@dataclass(frozen=True)
class PosteriorSummary:
    """Point estimate with pointwise uncertainty on the same grid."""

    map: GridField
    pointwise_std: GridField
    band_halfwidth_factor: float
    coverage: float | None = None


def _effective_forward(op: ForwardOperator, stats: ErrorStatistics) -> np.ndarray:
    matrix = op.dense()
    if stats.mean_gain is not None:
        matrix = matrix + stats.mean_gain
    return matrix


def _normal_system(
    op: ForwardOperator,
    stats: ErrorStatistics,
    prior: PriorModel,
    y: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Posterior precision and (optionally) the right-hand side at ``y``."""
    m_eff = _effective_forward(op, stats)
    weighted = stats.cov.solve(m_eff)
    precision = symmetrize(m_eff.T @ weighted + prior.precision_dense())
    if y is None:
        return precision, None
    residual = (
        np.asarray(y, dtype=float) - op.apply_dense(prior.mean.values) - stats.mean
    )
    return precision, m_eff.T @ stats.cov.solve(residual)


def map_estimate(
    op: ForwardOperator,
    stats: ErrorStatistics,
    prior: PriorModel,
    y: GridField,
    method: str = "dense",
    cg_rtol: float = 1e-12,
) -> GridField:
    """Maximum a posteriori field under the Gaussian error model.

    ``method`` selects the solver for the normal equations: ``"dense"``
    factors the posterior precision with Cholesky, ``"cg"`` runs conjugate
    gradients on the same system without materializing it beyond the
    operator pieces.  Both return the same field to solver tolerance.
    """
    if y.grid != op.grid:
        raise ValueError("observation lives on a different grid")
    if method == "dense":
        precision, rhs = _normal_system(op, stats, prior, y.values)
        try:
            factor = scipy.linalg.cho_factor(precision, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise FactorizationError("posterior precision not positive definite") from exc
        delta = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    elif method == "cg":
        m_eff = _effective_forward(op, stats)
        residual = y.values - op.apply_dense(prior.mean.values) - stats.mean
        rhs = m_eff.T @ stats.cov.solve(residual)

        def matvec(v: np.ndarray) -> np.ndarray:
            return m_eff.T @ stats.cov.solve(m_eff @ v) + prior.precision_apply(v)

        n = op.grid.num_nodes
        operator = scipy.sparse.linalg.LinearOperator((n, n), matvec=matvec)
        delta, info = scipy.sparse.linalg.cg(
            operator, rhs, rtol=cg_rtol, atol=0.0, maxiter=20 * n
        )
        if info != 0:
            raise FactorizationError(f"conjugate gradients did not converge (info={info})")
    else:
        raise ValueError(f"unknown solver method {method!r}")
    return make_field(op.grid, prior.mean.values + delta)


def posterior_covariance(
    op: ForwardOperator, stats: ErrorStatistics, prior: PriorModel
) -> CovarianceModel:
    """Laplace posterior covariance: inverse of the posterior precision."""
    precision, _ = _normal_system(op, stats, prior, None)
    try:
        factor = scipy.linalg.cho_factor(precision, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise FactorizationError("posterior precision not positive definite") from exc
    cov = scipy.linalg.cho_solve(
        factor, np.eye(op.grid.num_nodes), check_finite=False
    )
    return CovarianceModel(symmetrize(cov))


def credible_band(
    estimate: GridField, pointwise_std: GridField, factor: float
) -> tuple[GridField, GridField]:
    """Symmetric pointwise band ``estimate -/+ factor * std``."""
    if factor < 0.0:
        raise ValueError("band factor must be non-negative")
    if estimate.grid != pointwise_std.grid:
        raise ValueError("estimate and std live on different grids")
    lower = estimate.values - factor * pointwise_std.values
    upper = estimate.values + factor * pointwise_std.values
    return make_field(estimate.grid, lower), make_field(estimate.grid, upper)


def coverage_fraction(truth: GridField, lower: GridField, upper: GridField) -> float:
    """Fraction of nodes where ``lower <= truth <= upper`` (closed band)."""
    inside = (truth.values >= lower.values) & (truth.values <= upper.values)
    return float(np.mean(inside))


def summarize_posterior(
    op: ForwardOperator,
    stats: ErrorStatistics,
    prior: PriorModel,
    y: GridField,
    band_factor: float = 3.0,
    truth: GridField | None = None,
) -> PosteriorSummary:
    """MAP estimate, Laplace pointwise std, and optional band coverage.

    Shares one factorization of the posterior precision between the point
    estimate and the covariance, unlike calling `map_estimate` and
    `posterior_covariance` separately.
    """
    if y.grid != op.grid:
        raise ValueError("observation lives on a different grid")
    precision, rhs = _normal_system(op, stats, prior, y.values)
    try:
        factor = scipy.linalg.cho_factor(precision, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise FactorizationError("posterior precision not positive definite") from exc
    delta = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    estimate = make_field(op.grid, prior.mean.values + delta)
    cov = scipy.linalg.cho_solve(factor, np.eye(op.grid.num_nodes), check_finite=False)
    std = make_field(op.grid, np.sqrt(np.diag(symmetrize(cov))))
    coverage = None
    if truth is not None:
        lower, upper = credible_band(estimate, std, band_factor)
        coverage = coverage_fraction(truth, lower, upper)
    return PosteriorSummary(
        map=estimate,
        pointwise_std=std,
        band_halfwidth_factor=band_factor,
        coverage=coverage,
    )
