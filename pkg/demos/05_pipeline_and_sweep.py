"""
Reproducible experiment runs and a noise-correlation sweep
==========================================================

`run_experiment` drives a whole study from one JSON-serializable config:
simulate the scene, deblur it, and write every artifact (CSV fields, PNG
quicklooks, a posterior table, a cross-section, and a manifest with SHA-256
digests) into the configured directory. Identical configs produce
byte-identical artifacts, which the manifest digests make checkable.

`sweep_correlation` reruns the experiment while replacing the noise with a
correlated normal field of the same marginal variance at several correlation
lengths, reporting how the posterior uncertainty responds. Everything here
is also reachable from the command line:

    baedeblur run config.json
    baedeblur sweep config.json --lengths 1 3 10
"""

import dataclasses
import json
from pathlib import Path

from baedeblur import ExperimentConfig, run_experiment, sweep_correlation

out_root = Path(__file__).resolve().parent / "output"

doc = {
    "grid": {"nx": 16, "ny": 16},
    "phantom": {
        "blocks": [
            {"x0": 0.2, "y0": 0.2, "x1": 0.8, "y1": 0.8, "value": 1.0},
            {"x0": 0.4, "y0": 0.4, "x1": 0.6, "y1": 0.6, "value": -0.5},
        ]
    },
    "kernel": {"kappa": 1.6},
    "prior": {"c1": 0.1, "c2": 20.0},
    "multiplicative_noise": {"law": "normal", "sigma": 1.0},
    "additive_noise": {"fraction_of_range": 0.01},
    "band_factor": 3.0,
    "seeds": {"data": 1234, "validation": 5678},
    "output_dir": str(out_root / "run_a"),
    "method": "bae",
}
config = ExperimentConfig.from_dict(doc)

result = run_experiment(config)
manifest = result.manifest
print(f"run wrote {len(manifest['files'])} digested artifacts plus the manifest"
      f" to {result.output_dir}")
for name in sorted(manifest["files"]):
    print(f"  {name}")
print()
print(f"  status {manifest['status']!r}, coverage {manifest['coverage']:.4f},"
      f" mean pointwise std {manifest['mean_pointwise_std']:.4f}")
print(f"  error covariance trace {manifest['error_model']['trace']:.2f}")

# Same config, different directory: every digest must agree.
twin_config = dataclasses.replace(config, output_dir=str(out_root / "run_b"))
twin = run_experiment(twin_config)
same = twin.manifest["files"] == manifest["files"]
print(f"  rerun into a second directory: digests identical = {same}")
print()

# Sweep the correlation length of the noise field. The configured law only
# contributes its marginal variance; each leg runs correlated normal noise.
sweep_config = dataclasses.replace(config, output_dir=str(out_root / "sweep"))
sweep = sweep_correlation(sweep_config, lengths=[1.0, 3.0, 10.0])
print("correlation-length sweep")
for line in sweep.report_lines:
    print(f"  {line}")
print()
print("longer-range noise is harder to tell from blurred signal, so the")
print("posterior widens as the correlation length grows in this regime")

# The manifest of each sweep leg records the substituted law.
leg = json.loads((sweep.output_dir / "corr_length_3" / "manifest.json").read_text())
print(f"  leg 3 noise law: {leg['config']['multiplicative_noise']}")
