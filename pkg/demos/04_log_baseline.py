"""
Log-domain baseline: when it works and how it fails
===================================================

A standard treatment of multiplicative noise takes logarithms,
``log y = log(A x) + log n``, models ``log n`` as Gaussian, and runs damped
Gauss-Newton on the resulting nonlinear least-squares problem. That needs
every data value and every model output to stay strictly positive, and it
simply has no slot for the additive component.

This script runs the baseline on a favorable case (mild gamma noise on a
strictly positive scene), compares it with the linear embedded-error
estimate, and then walks the documented failure taxonomy: negative data,
and an exhausted iteration budget. Each failure is a typed exception under
one catchable base, never a silent wrong answer.
"""

import numpy as np

from baedeblur import (
    ForwardOperator,
    GammaNoise,
    LogBaselineError,
    NonConvergenceError,
    NonPositiveDataError,
    NormalNoise,
    block_phantom,
    build_prior,
    calibrate_additive_sigma,
    constant_field,
    embedded_error_statistics,
    log_transform_map,
    lognormal_matched_model,
    make_field,
    make_grid,
    map_estimate,
    sample_additive,
    sample_multiplicative,
)
from baedeblur.config import BlockConfig

# A strictly positive scene: background level 2 with two blocks on top.
grid = make_grid(16, 16)
blocks = tuple(
    b.to_block()
    for b in (
        BlockConfig(0.0, 0.0, 1.0, 1.0, 2.0),
        BlockConfig(0.25, 0.25, 0.75, 0.75, 3.0),
        BlockConfig(0.4, 0.4, 0.6, 0.6, 1.2),
    )
)
truth = block_phantom(grid, blocks)
op = ForwardOperator(grid, kappa=1.6)
prior = build_prior(grid, c1=0.1, c2=20.0, mean=constant_field(grid, 2.0))
noiseless = op.apply(truth)

mult = GammaNoise(shape=100.0)  # sigma 0.1: mild, keeps the data positive
add = calibrate_additive_sigma(noiseless, fraction=0.005)
seed = 2024
n = sample_multiplicative(mult, grid, seed, stream=1)
eta = sample_additive(add, grid, seed, stream=2)
y = make_field(grid, n.values * noiseless.values + eta.values)
print(f"favorable case: gamma(100) noise, data minimum {y.values.min():.3f} > 0")

model = lognormal_matched_model(mult, prior)
baseline = log_transform_map(op, y, model)
stats = embedded_error_statistics(op, prior, mult, add)
linear = map_estimate(op, stats, prior, y)

scale = np.linalg.norm(truth.values)
for label, est in [("log baseline", baseline), ("embedded linear", linear)]:
    rel = np.linalg.norm(est.values - truth.values) / scale
    print(f"  {label:>16}: relative error {rel:.3f}")
print("  both recover the scene; the linear route needs no iteration at all")
print()

# Failure 1: a noise law with negative mass makes log y undefined.
harsh = NormalNoise(sigma=1.0)
n_bad = sample_multiplicative(harsh, grid, seed, stream=1)
y_bad = make_field(grid, n_bad.values * noiseless.values + eta.values)
try:
    log_transform_map(op, y_bad, model)
except NonPositiveDataError as exc:
    print(f"normal(sigma=1) data: NonPositiveDataError: {exc}")

# Failure 2: a starved iteration budget raises instead of returning early.
try:
    log_transform_map(op, y, model, max_iter=1)
except NonConvergenceError as exc:
    print(f"max_iter=1: NonConvergenceError: {exc}")

# All failure modes share one base class, so callers need a single handler.
for bad_call in (lambda: log_transform_map(op, y_bad, model),):
    try:
        bad_call()
    except LogBaselineError as exc:
        print(f"caught via the common base: {type(exc).__name__}")
