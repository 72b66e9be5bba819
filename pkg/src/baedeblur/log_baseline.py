"""Log-domain baseline estimator for multiplicative noise.

Taking logarithms of ``y = n * (A x)`` (additive noise ignored) turns the
multiplicative noise into an additive log-noise ``xi = log n``:

    log y = log(A x) + xi.

Modeling ``xi`` as Gaussian is exact when ``n`` is lognormal and an
approximation otherwise; `lognormal_matched_model` picks the Gaussian whose
implied lognormal matches the unit mean and the variance of the actual law.
The estimator minimizes

    J(x) = 1/2 |C^{-1}(log y - log(A x) - mean(xi))|^2 + 1/2 |L (x - x0)|^2

by damped Gauss-Newton steps, halving any step that would drive ``A x``
nonpositive.  The method fails by construction on data with nonpositive
entries; that failure is reported as a typed exception, never a crash.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .blur import ForwardOperator
from .grids import GridField, constant_field, make_field
from .linalg import CovarianceModel
from .noise import MultiplicativeNoise
from .priors import PriorModel

__all__ = [
    "LogBaselineError",
    "NonPositiveDataError",
    "NonPositiveModelOutputError",
    "NonConvergenceError",
    "LogDomainModel",
    "lognormal_matched_model",
    "log_transform_map",
]


class LogBaselineError(RuntimeError):
    """Base class for documented failure modes of the log-domain method."""


class NonPositiveDataError(LogBaselineError):
    """The observation contains entries at or below zero, so ``log y`` is undefined."""


class NonPositiveModelOutputError(LogBaselineError):
    """No damping kept the model output ``A x`` strictly positive."""


class NonConvergenceError(LogBaselineError):
    """The iteration exhausted its budget before meeting the gradient test."""


@dataclass(frozen=True)
class LogDomainModel:
    """Gaussian model for the log-noise together with the field prior."""

    xi_mean: np.ndarray
    xi_cov: CovarianceModel
    prior: PriorModel


def lognormal_matched_model(
    spec: MultiplicativeNoise, prior: PriorModel
) -> LogDomainModel:
    """Log-noise model matching a unit-mean lognormal to the law's variance.

    For a lognormal with mean one and variance ``v`` the log is Gaussian
    with variance ``log(1 + v)`` and mean ``-log(1 + v) / 2``.
    """
    n = prior.grid.num_nodes
    log_var = float(np.log1p(spec.variance))
    xi_mean = np.full(n, -0.5 * log_var)
    return LogDomainModel(
        xi_mean=xi_mean,
        xi_cov=CovarianceModel.from_scaled_identity(n, log_var),
        prior=prior,
    )


def _objective(
    model: LogDomainModel, log_y: np.ndarray, x: np.ndarray, output: np.ndarray
) -> float:
    residual = log_y - np.log(output) - model.xi_mean
    white = model.xi_cov.whiten(residual)
    prior_white = model.prior.whiten(x - model.prior.mean.values)
    return 0.5 * float(white @ white) + 0.5 * float(prior_white @ prior_white)


def log_transform_map(
    op: ForwardOperator,
    y: GridField,
    model: LogDomainModel,
    x0: GridField | None = None,
    max_iter: int = 100,
    grad_rtol: float = 1e-6,
    max_halvings: int = 30,
) -> GridField:
    """Estimate the field by damped Gauss-Newton in the log domain.

    Raises
    ------
    NonPositiveDataError
        If any observation entry is not strictly positive.
    NonPositiveModelOutputError
        If the start point or a fully damped step leaves ``A x`` nonpositive.
    NonConvergenceError
        If ``max_iter`` iterations do not reduce the gradient norm below
        ``grad_rtol`` times its starting value.
    """
    if y.grid != op.grid:
        raise ValueError("observation lives on a different grid")
    y_vals = y.values
    if np.any(y_vals <= 0.0):
        bad = int(np.sum(y_vals <= 0.0))
        raise NonPositiveDataError(
            f"{bad} observation entries are nonpositive; log-domain model undefined"
        )
    log_y = np.log(y_vals)
    forward = op.dense()
    prior = model.prior
    if x0 is None:
        # Flat start whose blurred output equals the mean observation level.
        level = float(np.mean(y_vals)) / op.kernel_mass
        x0 = constant_field(op.grid, level)
    x = x0.values.copy()
    output = forward @ x
    if np.any(output <= 0.0):
        raise NonPositiveModelOutputError("model output nonpositive at the start point")

    precision_prior = prior.precision_dense()
    grad_norm0 = None
    for _ in range(max_iter):
        residual = log_y - np.log(output) - model.xi_mean
        weighted = model.xi_cov.solve(residual)
        grad = -forward.T @ (weighted / output) + precision_prior @ (
            x - prior.mean.values
        )
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm0 is None:
            grad_norm0 = grad_norm
        if grad_norm <= grad_rtol * grad_norm0 or grad_norm == 0.0:
            return make_field(op.grid, x)
        # Gauss-Newton curvature of the log-residual term, always SPD.
        scaled = forward / output[:, None]
        hessian = scaled.T @ model.xi_cov.solve(scaled) + precision_prior
        step = scipy.linalg.solve(hessian, -grad, assume_a="pos")
        current = _objective(model, log_y, x, output)
        t = 1.0
        halvings = 0
        while True:
            trial = x + t * step
            trial_out = forward @ trial
            if np.all(trial_out > 0.0):
                if _objective(model, log_y, trial, trial_out) <= current:
                    break
            halvings += 1
            if halvings > max_halvings:
                if np.any(trial_out <= 0.0):
                    raise NonPositiveModelOutputError(
                        "damping could not keep the model output positive"
                    )
                raise NonConvergenceError("step halving failed to reduce the objective")
            t *= 0.5
        x = trial
        output = trial_out
    raise NonConvergenceError(f"gradient test not met within {max_iter} iterations")
