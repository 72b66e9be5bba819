"""Independent oracles: 1D exact-likelihood quadrature and error simulators.

These live in the library rather than the test tree so the CLI can run the
same checks in the field.  The quadrature marginalizes the multiplicative
noise out of the scalar model ``y = n * a * x + eta`` numerically,

    p(y | x) = integral of pdf_n(n) * pdf_eta(y - n * a * x) dn,

with panel Gauss-Legendre rules refined until self-convergence.  The error
simulator draws joint samples of ``e = (n - 1) * (A x) + eta`` so that its
empirical covariance can be held against the closed-form moment-matched
covariance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import gamma as gamma_dist
from scipy.stats import norm

from .blur import ForwardOperator
from .error_model import error_covariance
from .linalg import CovarianceModel
from .noise import (
    AdditiveNoise,
    CorrelatedNormalNoise,
    GammaNoise,
    MultiplicativeNoise,
    NormalNoise,
    UniformNoise,
    additive_covariance,
    draw_additive,
    draw_multiplicative,
    multiplicative_covariance,
)
from .priors import PriorModel
from .rng import stream_rng

__all__ = [
    "QuadratureError",
    "ScalarProblem",
    "LikelihoodMoments",
    "exact_likelihood_1d",
    "likelihood_moments",
    "gaussian_approx_moments",
    "simulate_errors",
    "CovarianceCheck",
    "covariance_check",
]

_GL_ORDER = 16
_MAX_DOUBLINGS = 18


class QuadratureError(RuntimeError):
    """Panel refinement failed to self-converge."""


@dataclass(frozen=True)
class ScalarProblem:
    """One-pixel test problem ``y = n * a * x + eta``.

    ``support_sigmas`` controls how many marginal standard deviations of
    ``n`` the integration window covers; at least 8 are required, and the
    default of 12 keeps the window's truncated variance mass negligible
    even for the heavy-tailed gamma law.
    """

    a: float
    noise: MultiplicativeNoise
    sigma_eta: float
    nodes: int = 256
    support_sigmas: float = 12.0

    def __post_init__(self) -> None:
        if self.sigma_eta < 0.0:
            raise ValueError("sigma_eta must be non-negative")
        if self.nodes < 64:
            raise ValueError("quadrature needs at least 64 nodes")
        if self.support_sigmas < 8.0:
            raise ValueError("integration support must cover at least 8 sigma")


@dataclass(frozen=True)
class LikelihoodMoments:
    """Numerical moments of the exact likelihood as a density in ``y``."""

    mass: float
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    nodes_used: int


def _mult_pdf(spec: MultiplicativeNoise, n: np.ndarray) -> np.ndarray:
    """Marginal density of the multiplicative noise at points ``n``."""
    if isinstance(spec, GammaNoise):
        return gamma_dist.pdf(n, a=spec.shape, scale=1.0 / spec.shape)
    if isinstance(spec, (NormalNoise, CorrelatedNormalNoise)):
        return norm.pdf(n, loc=1.0, scale=spec.sigma)
    if isinstance(spec, UniformNoise):
        width = 2.0 * spec.half_width
        inside = (n >= 1.0 - spec.half_width) & (n <= 1.0 + spec.half_width)
        return np.where(inside, 1.0 / width, 0.0)
    raise TypeError(f"unknown multiplicative noise spec {spec!r}")


def _integration_window(prob: ScalarProblem) -> tuple[float, float]:
    """Window covering the requested sigma span, clipped to the law's support.

    Clipping matters twice over: the gamma law lives on the half line, and
    the uniform law's density is discontinuous at its endpoints, which
    would wreck Gauss-Legendre convergence if the window overshot them.
    """
    sigma = float(np.sqrt(prob.noise.variance))
    lo = 1.0 - prob.support_sigmas * sigma
    hi = 1.0 + prob.support_sigmas * sigma
    if isinstance(prob.noise, GammaNoise):
        lo = max(0.0, lo)
    elif isinstance(prob.noise, UniformNoise):
        lo = max(lo, 1.0 - prob.noise.half_width)
        hi = min(hi, 1.0 + prob.noise.half_width)
    return lo, hi


def _panel_rule(lo: float, hi: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    base_nodes, base_weights = np.polynomial.legendre.leggauss(_GL_ORDER)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * base_nodes[None, :]).reshape(-1)
    weights = (half[:, None] * base_weights[None, :]).reshape(-1)
    return nodes, weights


def _start_panels(prob: ScalarProblem) -> int:
    return max(4, int(np.ceil(prob.nodes / _GL_ORDER)))


def exact_likelihood_1d(
    prob: ScalarProblem, y: float, x: float, rtol: float = 1e-8
) -> float:
    """Marginal likelihood value by self-converged panel quadrature.

    Panel count doubles until successive values agree to ``rtol`` relative
    (absolute near zero), so the returned number is oracle-grade.
    """
    if prob.sigma_eta <= 0.0:
        raise ValueError("quadrature needs sigma_eta > 0 for a smooth integrand")
    lo, hi = _integration_window(prob)

    def evaluate(panels: int) -> float:
        nodes, weights = _panel_rule(lo, hi, panels)
        integrand = _mult_pdf(prob.noise, nodes) * norm.pdf(
            y - nodes * prob.a * x, scale=prob.sigma_eta
        )
        return float(weights @ integrand)

    panels = _start_panels(prob)
    value = evaluate(panels)
    for _ in range(_MAX_DOUBLINGS):
        panels *= 2
        refined = evaluate(panels)
        scale = max(abs(refined), 1e-300)
        if abs(refined - value) <= rtol * scale:
            return refined
        value = refined
    raise QuadratureError(f"no self-convergence after {_MAX_DOUBLINGS} doublings")


def likelihood_moments(
    prob: ScalarProblem, x: float, rtol: float = 1e-8
) -> LikelihoodMoments:
    """Mass and central moments of ``p(y | x)`` over a wide ``y`` grid.

    The outer integral is a trapezoid rule on a grid fine enough to resolve
    the additive-noise scale; the inner quadrature's panel count doubles
    until mass, mean, and variance all stabilize to ``rtol``.
    """
    if prob.sigma_eta <= 0.0:
        raise ValueError("moments need sigma_eta > 0")
    lo, hi = _integration_window(prob)
    signal = prob.a * x
    corners = np.array([lo * signal, hi * signal])
    y_lo = float(corners.min()) - 10.0 * prob.sigma_eta
    y_hi = float(corners.max()) + 10.0 * prob.sigma_eta
    count = int(np.ceil((y_hi - y_lo) / (prob.sigma_eta / 6.0))) + 1
    count = min(max(count, 1001), 200_001)
    ys = np.linspace(y_lo, y_hi, count)

    def evaluate(panels: int) -> tuple[np.ndarray, int]:
        nodes, weights = _panel_rule(lo, hi, panels)
        weighted_pdf = weights * _mult_pdf(prob.noise, nodes)
        kernel = norm.pdf(ys[:, None] - nodes[None, :] * signal, scale=prob.sigma_eta)
        return kernel @ weighted_pdf, nodes.size

    def summarize(density: np.ndarray, nodes_used: int) -> LikelihoodMoments:
        mass = float(np.trapezoid(density, ys))
        mean = float(np.trapezoid(ys * density, ys) / mass)
        centered = ys - mean
        variance = float(np.trapezoid(centered**2 * density, ys) / mass)
        mu3 = float(np.trapezoid(centered**3 * density, ys) / mass)
        mu4 = float(np.trapezoid(centered**4 * density, ys) / mass)
        return LikelihoodMoments(
            mass=mass,
            mean=mean,
            variance=variance,
            skewness=mu3 / variance**1.5,
            excess_kurtosis=mu4 / variance**2 - 3.0,
            nodes_used=nodes_used,
        )

    panels = _start_panels(prob)
    density, used = evaluate(panels)
    current = summarize(density, used)
    for _ in range(_MAX_DOUBLINGS):
        panels *= 2
        density, used = evaluate(panels)
        refined = summarize(density, used)
        checks = (
            (refined.mass, current.mass),
            (refined.mean, current.mean),
            (refined.variance, current.variance),
        )
        if all(abs(a - b) <= rtol * max(abs(a), 1e-300) for a, b in checks):
            return refined
        current = refined
    raise QuadratureError(f"moments did not self-converge after {_MAX_DOUBLINGS} doublings")


def gaussian_approx_moments(prob: ScalarProblem, x: float) -> tuple[float, float]:
    """Mean and variance of the moment-matched Gaussian likelihood at ``x``.

    These equal the exact first two moments of ``y = n a x + eta``, so the
    quadrature moments must land on them; only higher moments may differ.
    """
    signal = prob.a * x
    return signal, prob.sigma_eta**2 + prob.noise.variance * signal**2


def simulate_errors(
    op: ForwardOperator,
    prior: PriorModel,
    mult: MultiplicativeNoise,
    add: AdditiveNoise,
    seed: int,
    count: int,
) -> np.ndarray:
    """Joint draws of the embedded error, one per row of a ``(count, n)`` array.

    Field, multiplicative, and additive draws use disjoint streams of the
    same seed, so the output is reproducible and rows are independent.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    grid = op.grid
    fields = prior.draw(stream_rng(seed, 0), count)
    blurred = fields @ op.dense().T
    noise = draw_multiplicative(mult, grid, stream_rng(seed, 1), count)
    eta = draw_additive(add, grid, stream_rng(seed, 2), count)
    return (noise - 1.0) * blurred + eta


@dataclass(frozen=True)
class CovarianceCheck:
    """Outcome of holding simulated errors against the closed-form covariance."""

    samples: int
    rel_frobenius: float
    offdiag_rel_frobenius: float
    mean_max_abs: float
    mean_bound: float
    threshold: float
    passed: bool

    def lines(self) -> list[str]:
        """Structured report lines: metric, value, threshold, verdict."""
        frob = (
            f"metric=covariance_rel_frobenius value={self.rel_frobenius:.6f} "
            f"threshold={self.threshold:.6f} "
            f"{'pass' if self.rel_frobenius < self.threshold else 'fail'}"
        )
        offdiag = (
            f"metric=offdiag_rel_frobenius value={self.offdiag_rel_frobenius:.6f} "
            f"threshold={self.threshold:.6f} "
            f"{'pass' if self.offdiag_rel_frobenius < self.threshold else 'fail'}"
        )
        mean = (
            f"metric=error_mean_max_abs value={self.mean_max_abs:.6e} "
            f"threshold={self.mean_bound:.6e} "
            f"{'pass' if self.mean_max_abs < self.mean_bound else 'fail'}"
        )
        return [frob, offdiag, mean]


def covariance_check(
    op: ForwardOperator,
    prior: PriorModel,
    mult: MultiplicativeNoise,
    add: AdditiveNoise,
    seed: int,
    samples: int,
    threshold: float = 0.05,
) -> CovarianceCheck:
    """Compare empirical error covariance against the moment-matched formula.

    The mean check bounds each empirical mean component by five standard
    errors of its own scale; the covariance checks use relative Frobenius
    distance, once over the whole matrix and once restricted to the
    off-diagonal part (both normalized by the full model norm, since the
    off-diagonal model part vanishes for iid noise).
    """
    draws = simulate_errors(op, prior, mult, add, seed, samples)
    empirical = np.cov(draws, rowvar=False)
    model = error_covariance(
        additive_covariance(add, op.grid),
        multiplicative_covariance(mult, op.grid),
        op.propagate_covariance(prior.covariance()),
    ).matrix
    scale = np.linalg.norm(model)
    gap = empirical - model
    rel = float(np.linalg.norm(gap) / scale)
    offdiag = float(np.linalg.norm(gap - np.diag(np.diag(gap))) / scale)
    mean_max = float(np.max(np.abs(draws.mean(axis=0))))
    mean_bound = float(5.0 * np.sqrt(np.diag(model).max() / samples))
    passed = rel < threshold and offdiag < threshold and mean_max < mean_bound
    return CovarianceCheck(
        samples=samples,
        rel_frobenius=rel,
        offdiag_rel_frobenius=offdiag,
        mean_max_abs=mean_max,
        mean_bound=mean_bound,
        threshold=threshold,
        passed=passed,
    )
