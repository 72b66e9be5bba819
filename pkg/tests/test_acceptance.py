"""Acceptance gate: nine criteria, one verdict line each.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured
values and then asserts the criterion at its stated tolerance, so a
failure documents itself in the test output.
"""

import hashlib
import time
from pathlib import Path

import numpy as np
import pytest

from baedeblur.blur import ForwardOperator
from baedeblur.cli import main
from baedeblur.config import ExperimentConfig
from baedeblur.error_model import embedded_error_statistics, error_mean
from baedeblur.grids import default_phantom, make_field, make_grid
from baedeblur.inference import map_estimate, posterior_covariance
from baedeblur.log_baseline import (
    NonPositiveDataError,
    log_transform_map,
    lognormal_matched_model,
)
from baedeblur.noise import (
    GammaNoise,
    NormalNoise,
    UniformNoise,
    calibrate_additive_sigma,
    draw_multiplicative,
    negative_probability,
)
from baedeblur.pipeline import run_experiment, sweep_correlation, validate_covariance
from baedeblur.priors import build_prior
from baedeblur.rng import stream_rng
from baedeblur.validation import (
    ScalarProblem,
    gaussian_approx_moments,
    likelihood_moments,
    simulate_errors,
)

IID_LAW_SECTIONS = {
    "gamma": {"law": "gamma", "shape": 1.0},
    "normal": {"law": "normal", "sigma": 1.0},
    "uniform": {"law": "uniform", "half_width": float(np.sqrt(3.0))},
}
IID_LAW_SPECS = {
    "gamma": GammaNoise(shape=1.0),
    "normal": NormalNoise(sigma=1.0),
    "uniform": UniformNoise(half_width=float(np.sqrt(3.0))),
}
DEFAULT_BLOCKS = [
    {"x0": 0.16, "y0": 0.16, "x1": 0.44, "y1": 0.44, "value": 1.0},
    {"x0": 0.56, "y0": 0.56, "x1": 0.84, "y1": 0.84, "value": -1.0},
]


def reference_doc(out_dir: str, law_section: dict, nx: int = 50) -> dict:
    """Full-size reference configuration used throughout the gate."""
    return {
        "grid": {"nx": nx, "ny": nx},
        "phantom": {"blocks": DEFAULT_BLOCKS},
        "kernel": {"kappa": 5.0},
        "prior": {"c1": 0.1, "c2": 20.0},
        "multiplicative_noise": law_section,
        "additive_noise": {"fraction_of_range": 0.01},
        "band_factor": 3.0,
        "seeds": {"data": 1234, "validation": 5678},
        "output_dir": out_dir,
        "method": "bae",
    }


def small_instance(law_key: str):
    """8x8 instance with the reference prior and calibrated additive noise."""
    grid = make_grid(8, 8)
    op = ForwardOperator(grid, kappa=5.0)
    prior = build_prior(grid, c1=0.1, c2=20.0)
    blurred = op.apply(default_phantom(grid))
    add_spec = calibrate_additive_sigma(blurred, 0.01)
    return grid, op, prior, IID_LAW_SPECS[law_key], add_spec


def verdict(capsys, number: int, passed: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


def test_criterion_1_covariance_formula_oracle(workdir, capsys):
    rels = {}
    all_ok = True
    worst_seconds = 0.0
    for key, section in IID_LAW_SECTIONS.items():
        config = ExperimentConfig.from_dict(
            reference_doc(str(workdir / f"validate_{key}"), section)
        )
        started = time.monotonic()
        check, _ = validate_covariance(config, samples=100_000)
        elapsed = time.monotonic() - started
        worst_seconds = max(worst_seconds, elapsed)
        rels[key] = check.rel_frobenius
        all_ok = all_ok and check.passed and elapsed < 120.0
    detail = (
        "empirical error covariance vs closed form at 1e5 draws on 8x8: "
        + ", ".join(f"{k} rel={v:.4f}" for k, v in rels.items())
        + f" (threshold 0.05, slowest spec {worst_seconds:.1f}s < 120s)"
    )
    verdict(capsys, 1, all_ok, detail)
    assert all_ok, detail


def test_criterion_2_zero_mean_errors(capsys):
    worst_ratio = 0.0
    exact = True
    count = 100_000
    for key in IID_LAW_SECTIONS:
        grid, op, prior, mult_spec, add_spec = small_instance(key)
        x_mean = stream_rng(2).standard_normal(grid.num_nodes)
        mean = error_mean(
            np.ones(grid.num_nodes), np.zeros(grid.num_nodes), op, x_mean
        )
        exact = exact and np.array_equal(mean, np.zeros(grid.num_nodes))
        stats = embedded_error_statistics(op, prior, mult_spec, add_spec)
        draws = simulate_errors(op, prior, mult_spec, add_spec, seed=211, count=count)
        bound = 5.0 * np.sqrt(stats.cov.diagonal() / count)
        worst_ratio = max(
            worst_ratio, float(np.max(np.abs(draws.mean(axis=0)) / bound))
        )
    passed = exact and worst_ratio < 1.0
    detail = (
        "error mean identically zero at unit noise mean: "
        f"{'exact' if exact else 'NOT exact'}; empirical means within "
        f"5 std/sqrt(N) (worst ratio {worst_ratio:.3f})"
    )
    verdict(capsys, 2, passed, detail)
    assert passed, detail


def test_criterion_3_negative_mass_constants(capsys):
    analytic = {
        key: negative_probability(spec) for key, spec in IID_LAW_SPECS.items()
    }
    targets = {"gamma": 0.0, "normal": 0.158655, "uniform": 0.211325}
    analytic_ok = all(
        abs(analytic[key] - targets[key]) <= 1e-6 for key in targets
    )
    grid = make_grid(2, 2)
    empirical = {}
    for key, spec in IID_LAW_SPECS.items():
        draws = draw_multiplicative(spec, grid, stream_rng(31), 1_000_000)
        empirical[key] = float(np.mean(draws < 0.0))
    empirical_ok = all(
        abs(empirical[key] - analytic[key]) <= 0.01 for key in targets
    )
    passed = analytic_ok and empirical_ok
    detail = (
        "negative-mass probabilities "
        + ", ".join(
            f"{k} analytic={analytic[k]:.6f} empirical={empirical[k]:.6f}"
            for k in targets
        )
        + " (analytic +-1e-6, empirical +-0.01 at 1e6 draws)"
    )
    verdict(capsys, 3, passed, detail)
    assert passed, detail


def test_criterion_4_full_pipeline_coverage(workdir, capsys):
    coverages = {}
    all_ok = True
    worst_seconds = 0.0
    for key, section in IID_LAW_SECTIONS.items():
        config = ExperimentConfig.from_dict(
            reference_doc(str(workdir / f"run_{key}"), section)
        )
        started = time.monotonic()
        result = run_experiment(config)
        elapsed = time.monotonic() - started
        worst_seconds = max(worst_seconds, elapsed)
        coverages[key] = result.manifest["coverage"]
        all_ok = all_ok and coverages[key] >= 0.95 and elapsed < 300.0
    detail = (
        "50x50 kappa=5 pipeline, 1% additive noise, 3-sigma bands: coverage "
        + ", ".join(f"{k}={v:.4f}" for k, v in coverages.items())
        + f" (>= 0.95 each, slowest model {worst_seconds:.1f}s < 300s)"
    )
    verdict(capsys, 4, all_ok, detail)
    assert all_ok, detail


def test_criterion_5_correlation_length_monotonicity(workdir, capsys):
    config = ExperimentConfig.from_dict(
        reference_doc(str(workdir / "sweep"), IID_LAW_SECTIONS["normal"])
    )
    result = sweep_correlation(config, [2.0, 5.0, 10.0])
    coverage_ok = all(c >= 0.95 for c in result.coverages)
    passed = result.ordered and coverage_ok
    detail = (
        "mean pointwise posterior std over correlation lengths {2, 5, 10} = "
        + "("
        + ", ".join(f"{s:.6f}" for s in result.mean_stds)
        + ")"
        + (" non-decreasing" if result.ordered else " NOT non-decreasing")
        + "; coverage ("
        + ", ".join(f"{c:.4f}" for c in result.coverages)
        + (") >= 0.95" if coverage_ok else ") below 0.95")
    )
    verdict(capsys, 5, passed, detail)
    assert passed, detail


def test_criterion_6_exact_likelihood_oracle(capsys):
    x = 2.0
    worst_rel = 0.0
    higher = {}
    for key, spec in IID_LAW_SPECS.items():
        prob = ScalarProblem(a=1.0, noise=spec, sigma_eta=0.1)
        moments = likelihood_moments(prob, x)
        mean, variance = gaussian_approx_moments(prob, x)
        worst_rel = max(
            worst_rel,
            abs(moments.mean - mean) / abs(mean),
            abs(moments.variance - variance) / variance,
        )
        higher[key] = (moments.skewness, moments.excess_kurtosis)
    passed = worst_rel < 0.01
    detail = (
        f"scalar likelihood mean/variance vs quadrature, worst rel={worst_rel:.2e} "
        "(< 1%); higher moments (skew, ex-kurtosis): "
        + ", ".join(f"{k}=({s:+.3f}, {e:+.3f})" for k, (s, e) in higher.items())
    )
    verdict(capsys, 6, passed, detail)
    assert passed, detail


def test_criterion_7_inference_algebra(capsys):
    grid, op, prior, mult_spec, add_spec = small_instance("gamma")
    stats = embedded_error_statistics(op, prior, mult_spec, add_spec)
    y = make_field(grid, stream_rng(3).standard_normal(grid.num_nodes))

    a = op.dense()
    gamma = stats.cov.matrix
    precision = a.T @ np.linalg.solve(gamma, a) + prior.precision_dense()
    cov = posterior_covariance(op, stats, prior).matrix
    identity_gap = float(np.max(np.abs(cov @ precision - np.eye(grid.num_nodes))))

    x_map = map_estimate(op, stats, prior, y).values

    def gradient(x):
        return -a.T @ np.linalg.solve(gamma, y.values - a @ x) + (
            prior.precision_dense() @ x
        )

    grad_ratio = float(
        np.linalg.norm(gradient(x_map))
        / np.linalg.norm(gradient(np.zeros(grid.num_nodes)))
    )

    sigma = add_spec.sigma
    plain_stats = embedded_error_statistics(
        op, prior, NormalNoise(sigma=0.0), add_spec
    )
    classical = np.linalg.solve(
        a.T @ a / sigma**2 + prior.precision_dense(), a.T @ y.values / sigma**2
    )
    reduction_rel = float(
        np.linalg.norm(map_estimate(op, plain_stats, prior, y).values - classical)
        / np.linalg.norm(classical)
    )

    passed = identity_gap < 1e-8 and grad_ratio < 1e-8 and reduction_rel < 1e-10
    detail = (
        f"precision identity max-norm {identity_gap:.2e} < 1e-8; MAP gradient "
        f"ratio {grad_ratio:.2e} < 1e-8; zero-multiplicative reduction rel "
        f"{reduction_rel:.2e} < 1e-10"
    )
    verdict(capsys, 7, passed, detail)
    assert passed, detail


def test_criterion_8_baseline_failure_mode(workdir, capsys):
    grid, op, prior, mult_spec, add_spec = small_instance("gamma")
    values = stream_rng(7).standard_normal(grid.num_nodes)
    values[0] = -1.0
    observation = make_field(grid, values)
    model = lognormal_matched_model(mult_spec, prior)
    direct_ok = False
    try:
        log_transform_map(op, observation, model)
    except NonPositiveDataError:
        direct_ok = True
    except Exception:
        direct_ok = False

    doc = reference_doc(str(workdir / "baseline"), IID_LAW_SECTIONS["gamma"], nx=12)
    doc["method"] = "log-baseline"
    pipeline_ok = False
    try:
        run_experiment(ExperimentConfig.from_dict(doc))
    except NonPositiveDataError:
        pipeline_ok = True
    except Exception:
        pipeline_ok = False

    passed = direct_ok and pipeline_ok
    detail = (
        "log-domain method on data with negative entries: direct call "
        f"{'raised NonPositiveData' if direct_ok else 'misbehaved'}, pipeline "
        f"{'raised NonPositiveData' if pipeline_ok else 'misbehaved'} (no crash)"
    )
    verdict(capsys, 8, passed, detail)
    assert passed, detail


def test_criterion_9_byte_identical_reruns(workdir, capsys):
    results = {}

    def digests(directory: Path, suffixes=(".csv", ".txt", ".png")) -> dict:
        out = {}
        for path in sorted(directory.rglob("*")):
            if path.is_file() and path.suffix in suffixes:
                out[str(path.relative_to(directory))] = hashlib.sha256(
                    path.read_bytes()
                ).hexdigest()
        return out

    run_dir = workdir / "det_run"
    doc = reference_doc(str(run_dir), IID_LAW_SECTIONS["gamma"], nx=12)
    config_path = workdir / "det_run.json"
    config_path.write_text(ExperimentConfig.from_dict(doc).serialize())
    results["run"] = []
    for _ in range(2):
        assert main(["run", str(config_path)]) == 0
        results["run"].append(digests(run_dir))

    val_dir = workdir / "det_validate"
    doc = reference_doc(str(val_dir), {"law": "normal", "sigma": 0.5}, nx=12)
    val_path = workdir / "det_validate.json"
    val_path.write_text(ExperimentConfig.from_dict(doc).serialize())
    results["validate"] = []
    for _ in range(2):
        assert main(["validate", str(val_path)]) == 0
        results["validate"].append(digests(val_dir))

    sweep_dir = workdir / "det_sweep"
    doc = reference_doc(str(sweep_dir), {"law": "normal", "sigma": 1.0}, nx=16)
    doc["kernel"] = {"kappa": 1.6}
    sweep_path = workdir / "det_sweep.json"
    sweep_path.write_text(ExperimentConfig.from_dict(doc).serialize())
    results["sweep"] = []
    for _ in range(2):
        assert main(["sweep", str(sweep_path), "--lengths", "2", "10"]) == 0
        results["sweep"].append(digests(sweep_dir))

    results["render"] = []
    for idx in range(2):
        target = workdir / f"det_render_{idx}.png"
        assert main(["render", str(run_dir / "truth.csv"), str(target)]) == 0
        results["render"].append(
            {"render.png": hashlib.sha256(target.read_bytes()).hexdigest()}
        )

    mismatches = [
        name for name, (first, second) in results.items() if first != second
    ]
    passed = not mismatches
    detail = (
        "re-running run/validate/sweep/render reproduces every artifact "
        f"byte for byte ({sum(len(first) for first, _ in results.values())} files compared)"
        if passed
        else f"byte differences in subcommands: {mismatches}"
    )
    verdict(capsys, 9, passed, detail)
    assert passed, detail
