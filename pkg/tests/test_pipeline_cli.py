"""End-to-end pipeline and command-line behavior.

Determinism is asserted at the byte level: two runs of the same
configuration must produce identical artifact digests, which is also what
the manifest records.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from baedeblur.config import ExperimentConfig
from baedeblur.cli import main
from baedeblur.fieldio import read_field_csv, sha256_file
from baedeblur.grids import block_phantom, cross_section, make_grid
from baedeblur.log_baseline import NonPositiveDataError
from baedeblur.pipeline import (
    OUTPUT_ROOT_ENV,
    resolve_output_dir,
    run_experiment,
    sweep_correlation,
    validate_covariance,
)

EXPECTED_ARTIFACTS = {
    "truth.csv",
    "truth.png",
    "truth.png.scale.txt",
    "blurred.csv",
    "blurred.png",
    "blurred.png.scale.txt",
    "observed.csv",
    "observed.png",
    "observed.png.scale.txt",
    "posterior.csv",
    "cross_section.csv",
    "manifest.json",
}


def config_with(base: dict, **overrides) -> ExperimentConfig:
    doc = dict(base)
    doc.update(overrides)
    return ExperimentConfig.from_dict(doc)


def positive_phantom_doc(base: dict, out: str) -> dict:
    """Config whose observation stays strictly positive for the log baseline."""
    doc = dict(base)
    doc["phantom"] = {
        "blocks": [
            {"x0": 0.0, "y0": 0.0, "x1": 1.0, "y1": 1.0, "value": 2.0},
            {"x0": 0.3, "y0": 0.3, "x1": 0.7, "y1": 0.7, "value": 1.0},
        ]
    }
    doc["prior"] = {"c1": 0.1, "c2": 20.0, "mean_level": 2.0}
    doc["multiplicative_noise"] = {"law": "gamma", "shape": 25.0}
    doc["method"] = "log-baseline"
    doc["output_dir"] = out
    return doc


class TestRunExperiment:
    def test_writes_the_full_artifact_set(self, base_config_dict):
        result = run_experiment(config_with(base_config_dict))
        names = {p.name for p in result.output_dir.iterdir()}
        assert names == EXPECTED_ARTIFACTS

    def test_manifest_records_config_digests_and_summary(self, base_config_dict):
        config = config_with(base_config_dict)
        result = run_experiment(config)
        manifest = json.loads((result.output_dir / "manifest.json").read_text())
        assert ExperimentConfig.from_dict(manifest["config"]) == config
        assert manifest["status"] == "ok"
        assert manifest["method"] == "bae"
        assert manifest["seeds"] == {"data": 1234, "validation": 5678}
        assert manifest["additive_sigma"] > 0.0
        assert 0.0 <= manifest["coverage"] <= 1.0
        assert manifest["mean_pointwise_std"] > 0.0
        assert manifest["cross_section_row"] == 6
        assert manifest["wall_clock_seconds"] >= 0.0
        em = manifest["error_model"]
        assert 0.0 < em["diag_min"] <= em["diag_max"] < em["trace"]
        for name, digest in manifest["files"].items():
            assert sha256_file(result.output_dir / name) == digest
        assert set(manifest["files"]) == EXPECTED_ARTIFACTS - {"manifest.json"}

    def test_two_runs_produce_byte_identical_artifacts(
        self, base_config_dict, tmp_path
    ):
        first = run_experiment(
            config_with(base_config_dict, output_dir=str(tmp_path / "a"))
        )
        second = run_experiment(
            config_with(base_config_dict, output_dir=str(tmp_path / "b"))
        )
        assert first.manifest["files"] == second.manifest["files"]
        for name in EXPECTED_ARTIFACTS - {"manifest.json"}:
            assert (first.output_dir / name).read_bytes() == (
                second.output_dir / name
            ).read_bytes()

    def test_truth_artifact_is_the_configured_phantom(self, base_config_dict):
        config = config_with(base_config_dict)
        result = run_experiment(config)
        stored = read_field_csv(result.output_dir / "truth.csv")
        grid = make_grid(config.nx, config.ny)
        expected = block_phantom(grid, tuple(b.to_block() for b in config.blocks))
        assert stored.grid == grid
        assert np.array_equal(stored.values, expected.values)

    def test_cross_section_row_override_is_honored(self, base_config_dict):
        config = config_with(base_config_dict, cross_section_row=2)
        result = run_experiment(config)
        assert result.manifest["cross_section_row"] == 2
        truth = read_field_csv(result.output_dir / "truth.csv")
        lines = (result.output_dir / "cross_section.csv").read_text().splitlines()
        stored_truth = np.array([float(line.split(",")[1]) for line in lines[1:]])
        assert np.array_equal(stored_truth, cross_section(truth, 2))

    def test_conditional_method_with_zero_coupling_matches_default(
        self, base_config_dict, tmp_path
    ):
        plain = run_experiment(
            config_with(base_config_dict, output_dir=str(tmp_path / "p"))
        )
        conditional = run_experiment(
            config_with(
                base_config_dict,
                method="bae-conditional",
                output_dir=str(tmp_path / "c"),
            )
        )
        for name in ("posterior.csv", "cross_section.csv"):
            assert (plain.output_dir / name).read_bytes() == (
                conditional.output_dir / name
            ).read_bytes()

    def test_log_baseline_succeeds_on_positive_scene(
        self, base_config_dict, tmp_path
    ):
        doc = positive_phantom_doc(base_config_dict, str(tmp_path / "lb"))
        result = run_experiment(ExperimentConfig.from_dict(doc))
        assert result.manifest["status"] == "ok"
        assert result.manifest["coverage"] is None
        assert result.summary is None
        posterior = (result.output_dir / "posterior.csv").read_text().splitlines()
        assert posterior[0] == "index,map,std"
        assert all(line.endswith(",") for line in posterior[1:])

    def test_log_baseline_failure_writes_manifest_then_raises(
        self, base_config_dict, tmp_path
    ):
        # The default phantom has a negative block, so the observation has
        # nonpositive entries and the log transform must refuse it.
        config = config_with(
            base_config_dict, method="log-baseline", output_dir=str(tmp_path / "f")
        )
        with pytest.raises(NonPositiveDataError):
            run_experiment(config)
        manifest = json.loads((tmp_path / "f" / "manifest.json").read_text())
        assert manifest["status"] == "method-failure"
        assert manifest["failure"] == "NonPositiveData"
        assert "nonpositive" in manifest["failure_detail"]
        assert "observed.csv" in manifest["files"]
        assert "posterior.csv" not in manifest["files"]


class TestValidateCovariance:
    def test_passes_at_the_default_sample_count(self, base_config_dict):
        config = config_with(
            base_config_dict,
            multiplicative_noise={"law": "normal", "sigma": 0.5},
        )
        check, report = validate_covariance(config, 100_000)
        assert check.passed
        text = report.read_text().splitlines()
        assert text[0] == "samples=100000 grid=8x8"
        assert len(text) == 4
        assert all(line.startswith("metric=") for line in text[1:])

    def test_rejects_sample_counts_too_small_to_mean_anything(
        self, base_config_dict
    ):
        with pytest.raises(ValueError):
            validate_covariance(config_with(base_config_dict), 5_000)

    def test_heavy_tailed_law_fails_at_minimum_samples(self, base_config_dict):
        # Gamma shape one converges slowly; ten thousand draws sit far
        # outside the five percent bar, exercising the failing verdict.
        check, report = validate_covariance(config_with(base_config_dict), 10_000)
        assert not check.passed
        assert check.rel_frobenius > 0.05
        assert "fail" in report.read_text()


class TestSweepCorrelation:
    @pytest.fixture()
    def sweep_doc(self, base_config_dict, tmp_path):
        doc = dict(base_config_dict)
        doc["grid"] = {"nx": 16, "ny": 16}
        doc["kernel"] = {"kappa": 1.6}
        doc["multiplicative_noise"] = {"law": "normal", "sigma": 1.0}
        doc["output_dir"] = str(tmp_path / "sweep")
        return doc

    def test_mean_std_is_nondecreasing_in_correlation_length(self, sweep_doc):
        result = sweep_correlation(
            ExperimentConfig.from_dict(sweep_doc), [1.0, 3.0, 10.0]
        )
        assert result.lengths == (1.0, 3.0, 10.0)
        assert result.ordered
        assert result.mean_stds[0] < result.mean_stds[1] < result.mean_stds[2]
        assert all(0.0 <= c <= 1.0 for c in result.coverages)
        assert result.report_lines[-1].endswith("pass")
        report = (result.output_dir / "sweep_report.txt").read_text()
        assert report.strip().splitlines() == list(result.report_lines)

    def test_each_length_gets_its_own_artifact_directory(self, sweep_doc):
        result = sweep_correlation(ExperimentConfig.from_dict(sweep_doc), [1.0, 3.0])
        for length in ("1", "3"):
            sub = result.output_dir / f"corr_length_{length}"
            manifest = json.loads((sub / "manifest.json").read_text())
            assert manifest["status"] == "ok"
            noise = manifest["config"]["multiplicative_noise"]
            assert noise["law"] == "correlated_normal"
            assert noise["corr_length"] == float(length)
            assert noise["sigma"] == 1.0
        stds = [
            json.loads(
                (result.output_dir / f"corr_length_{l}" / "manifest.json").read_text()
            )["mean_pointwise_std"]
            for l in ("1", "3")
        ]
        assert tuple(stds) == result.mean_stds

    def test_repeated_length_reproduces_identical_statistics(self, sweep_doc):
        result = sweep_correlation(ExperimentConfig.from_dict(sweep_doc), [3.0, 3.0])
        assert result.mean_stds[0] == result.mean_stds[1]
        assert result.ordered

    def test_input_validation(self, sweep_doc):
        config = ExperimentConfig.from_dict(sweep_doc)
        with pytest.raises(ValueError):
            sweep_correlation(config, [3.0])
        with pytest.raises(ValueError):
            sweep_correlation(config, [3.0, -1.0])
        baseline = ExperimentConfig.from_dict(
            positive_phantom_doc(sweep_doc, sweep_doc["output_dir"])
        )
        with pytest.raises(ValueError):
            sweep_correlation(baseline, [1.0, 3.0])


class TestOutputRoot:
    def test_relative_directories_move_under_the_root(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        assert resolve_output_dir("runs/a") == tmp_path / "root" / "runs" / "a"
        absolute = str(tmp_path / "abs")
        assert resolve_output_dir(absolute) == Path(absolute)

    def test_unset_root_leaves_paths_alone(self, monkeypatch):
        monkeypatch.delenv(OUTPUT_ROOT_ENV, raising=False)
        assert resolve_output_dir("runs/a") == Path("runs/a")

    def test_pipeline_honors_the_root(
        self, base_config_dict, monkeypatch, tmp_path
    ):
        monkeypatch.setenv(OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        result = run_experiment(config_with(base_config_dict, output_dir="exp"))
        assert result.output_dir == tmp_path / "root" / "exp"
        assert (result.output_dir / "manifest.json").exists()


@pytest.fixture()
def config_file(base_config_dict, tmp_path):
    path = tmp_path / "config.json"
    path.write_text(ExperimentConfig.from_dict(base_config_dict).serialize())
    return path


class TestCli:
    def test_run_reports_completion_and_coverage(self, config_file, capsys):
        assert main(["run", str(config_file)]) == 0
        out = capsys.readouterr().out
        assert "run complete:" in out
        assert "coverage=" in out

    def test_missing_config_file_is_a_config_error(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.json")]) == 2
        assert "config error" in capsys.readouterr().err

    def test_invalid_config_content_is_a_config_error(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"grid": {"nx": 12}}')
        assert main(["run", str(path)]) == 2
        err = capsys.readouterr().err
        assert "config error" in err
        assert "grid.ny" in err

    def test_unknown_subcommand_exits_with_usage_error(self, capsys):
        assert main(["frobnicate"]) == 2

    def test_method_failure_maps_to_exit_three(
        self, base_config_dict, tmp_path, capsys
    ):
        doc = dict(base_config_dict)
        doc["method"] = "log-baseline"
        path = tmp_path / "lb.json"
        path.write_text(ExperimentConfig.from_dict(doc).serialize())
        assert main(["run", str(path)]) == 3
        assert "NonPositiveData" in capsys.readouterr().err

    def test_validate_passes_and_prints_metrics(
        self, base_config_dict, tmp_path, capsys
    ):
        doc = dict(base_config_dict)
        doc["multiplicative_noise"] = {"law": "normal", "sigma": 0.5}
        path = tmp_path / "v.json"
        path.write_text(ExperimentConfig.from_dict(doc).serialize())
        assert main(["validate", str(path)]) == 0
        out = capsys.readouterr().out
        assert "metric=covariance_rel_frobenius" in out
        assert "report written:" in out

    def test_validate_rejects_tiny_sample_counts(self, config_file, capsys):
        assert main(["validate", str(config_file), "--samples", "5000"]) == 2
        assert "--samples" in capsys.readouterr().err

    def test_validate_failing_check_exits_three(self, config_file, capsys):
        assert main(["validate", str(config_file), "--samples", "10000"]) == 3
        assert "fail" in capsys.readouterr().out

    def test_sweep_passes_and_prints_per_length_lines(
        self, base_config_dict, tmp_path, capsys
    ):
        doc = dict(base_config_dict)
        doc["grid"] = {"nx": 16, "ny": 16}
        doc["kernel"] = {"kappa": 1.6}
        doc["multiplicative_noise"] = {"law": "normal", "sigma": 1.0}
        doc["output_dir"] = str(tmp_path / "sweep")
        path = tmp_path / "s.json"
        path.write_text(ExperimentConfig.from_dict(doc).serialize())
        assert main(["sweep", str(path), "--lengths", "1", "3", "10"]) == 0
        out = capsys.readouterr().out
        assert out.count("mean_pointwise_std=") == 3
        assert "metric=mean_std_nondecreasing value=1 threshold=1 pass" in out

    def test_sweep_requires_two_positive_lengths(self, config_file, capsys):
        assert main(["sweep", str(config_file), "--lengths", "3"]) == 2
        capsys.readouterr()
        assert main(["sweep", str(config_file), "--lengths", "3", "-1"]) == 2

    def test_render_round_trips_a_stored_field(self, config_file, tmp_path, capsys):
        assert main(["run", str(config_file)]) == 0
        truth_csv = Path(json.loads(config_file.read_text())["output_dir"]) / "truth.csv"
        out_png = tmp_path / "again.png"
        assert main(["render", str(truth_csv), str(out_png)]) == 0
        assert out_png.exists()
        assert "rendered:" in capsys.readouterr().out

    def test_render_rejects_missing_or_malformed_input(self, tmp_path, capsys):
        assert main(["render", str(tmp_path / "no.csv"), str(tmp_path / "o.png")]) == 2
        bad = tmp_path / "bad.csv"
        bad.write_text("not,a,field\n")
        assert main(["render", str(bad), str(tmp_path / "o.png")]) == 2

    def test_cli_runs_are_byte_identical(
        self, base_config_dict, tmp_path, capsys
    ):
        digests = []
        for sub in ("x", "y"):
            doc = dict(base_config_dict)
            doc["output_dir"] = str(tmp_path / sub)
            path = tmp_path / f"{sub}.json"
            path.write_text(ExperimentConfig.from_dict(doc).serialize())
            assert main(["run", str(path)]) == 0
            manifest = json.loads((tmp_path / sub / "manifest.json").read_text())
            digests.append(manifest["files"])
        assert digests[0] == digests[1]

    def test_entry_raises_system_exit(self, monkeypatch, config_file):
        from baedeblur.cli import entry

        monkeypatch.setattr(
            "sys.argv", ["baedeblur", "run", str(config_file)]
        )
        with pytest.raises(SystemExit) as info:
            entry()
        assert info.value.code == 0
