"""
Deblurring under multiplicative noise with an embedded error model
==================================================================

The measurement ``y = n * (A x) + eta`` is nonlinear in the pair ``(n, x)``,
but it can be rewritten exactly as ``y = A x + e`` with the lumped error
``e = (n - 1) * (A x) + eta``. Moment-matching ``e`` with a Gaussian whose
covariance is ``G_eta + G_nn o (A G_xx A')`` (entrywise product) keeps the
whole inversion linear: one symmetric positive-definite solve returns the
MAP field and the same matrix inverts to the Laplace posterior covariance.

This script deblurs a blocky phantom under unit-variance gamma noise twice:
once with the embedded error model and once pretending the noise were purely
additive. The embedded model widens its credible band where the signal is
large, which is exactly where multiplicative noise hits hardest; the naive
model keeps a narrow band and misses the truth on most of those pixels.
"""

import numpy as np

from baedeblur import (
    ForwardOperator,
    GammaNoise,
    NormalNoise,
    build_prior,
    calibrate_additive_sigma,
    coverage_fraction,
    credible_band,
    cross_section,
    default_phantom,
    embedded_error_statistics,
    make_field,
    make_grid,
    sample_additive,
    sample_multiplicative,
    summarize_posterior,
    value_range,
)

grid = make_grid(32, 32)
op = ForwardOperator(grid, kappa=3.0)
prior = build_prior(grid, c1=0.1, c2=20.0)
truth = default_phantom(grid)
noiseless = op.apply(truth)

mult = GammaNoise(shape=1.0)
add = calibrate_additive_sigma(noiseless, fraction=0.01)

seed = 1234
n = sample_multiplicative(mult, grid, seed, stream=1)
eta = sample_additive(add, grid, seed, stream=2)
y = make_field(grid, n.values * noiseless.values + eta.values)

print(f"scene: 32x32 phantom, kernel width {op.kappa}, kernel mass {op.kernel_mass:.6f}")
print(f"  truth range {value_range(truth):.2f}, blurred range {value_range(noiseless):.2f}")
print(f"  gamma noise variance {mult.variance:.1f}, additive sigma {add.sigma:.4f}")
print()

# Route A: embedded error statistics (multiplicative part accounted for).
stats = embedded_error_statistics(op, prior, mult, add)
summary = summarize_posterior(op, stats, prior, y, band_factor=3.0, truth=truth)

# Route B: pretend the noise were purely additive (degenerate multiplicative
# law with zero variance), same data, same prior, same band factor.
naive_stats = embedded_error_statistics(op, prior, NormalNoise(sigma=0.0), add)
naive = summarize_posterior(op, naive_stats, prior, y, band_factor=3.0, truth=truth)

for label, s in [("embedded", summary), ("additive-only", naive)]:
    err = np.linalg.norm(s.map.values - truth.values) / np.linalg.norm(truth.values)
    mean_std = float(np.mean(s.pointwise_std.values))
    print(
        f"{label:>14}: rel error {err:.3f}, mean pointwise std {mean_std:.3f},"
        f" 3-sigma band coverage {s.coverage:.3f}"
    )

print()
print("same point-estimate quality, but the additive-only band is far too")
print("confident: the lumped error grows with the signal and only the")
print("embedded covariance knows that")

# Cross-section through the middle row, every fourth pixel.
row = grid.ny // 2
lower, upper = credible_band(summary.map, summary.pointwise_std, 3.0)
t, o = cross_section(truth, row), cross_section(y, row)
m, lo, hi = cross_section(summary.map, row), cross_section(lower, row), cross_section(upper, row)
print()
print(f"cross-section at row {row} (every 4th pixel)")
print(f"  {'i':>3} {'truth':>7} {'observed':>9} {'map':>7} {'band':>15} {'hit':>4}")
for i in range(0, grid.nx, 4):
    inside = "yes" if lo[i] <= t[i] <= hi[i] else "NO"
    print(
        f"  {i:>3} {t[i]:7.2f} {o[i]:9.2f} {m[i]:7.2f}"
        f" [{lo[i]:+6.2f}, {hi[i]:+6.2f}] {inside:>4}"
    )

band_cov = coverage_fraction(truth, lower, upper)
print(f"  full-image coverage {band_cov:.4f} at band factor 3")
