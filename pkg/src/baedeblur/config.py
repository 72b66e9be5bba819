"""Experiment configuration: a JSON document with nested sections.

The file is the complete record of a run: grid, phantom, kernel, prior,
noise laws, band factor, seeds, method, and output directory.  Parsing
validates every field and reports problems with their dotted path, and
``parse(serialize(config))`` returns an equal config, which lets the
manifest embed the configuration verbatim.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .grids import PhantomBlock
from .noise import (
    CorrelatedNormalNoise,
    GammaNoise,
    MultiplicativeNoise,
    NormalNoise,
    UniformNoise,
)

__all__ = ["ConfigError", "ExperimentConfig", "NoiseConfig", "BlockConfig"]

METHODS = ("bae", "bae-conditional", "log-baseline")
NOISE_LAWS = ("gamma", "normal", "uniform", "correlated_normal")


class ConfigError(ValueError):
    """Configuration problem, carrying the dotted field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _require(section: dict, path: str, key: str):
    if key not in section:
        raise ConfigError(f"{path}.{key}", "missing required field")
    return section[key]


def _as_number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _as_section(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigError(path, f"expected a section, got {value!r}")
    return value


@dataclass(frozen=True)
class BlockConfig:
    """Phantom rectangle in unit-square fractions."""

    x0: float
    y0: float
    x1: float
    y1: float
    value: float

    def to_block(self) -> PhantomBlock:
        return PhantomBlock(self.x0, self.y0, self.x1, self.y1, self.value)


@dataclass(frozen=True)
class NoiseConfig:
    """Tagged multiplicative-noise description; unused parameters stay None."""

    law: str
    shape: float | None = None
    sigma: float | None = None
    half_width: float | None = None
    corr_length: float | None = None

    def to_spec(self) -> MultiplicativeNoise:
        if self.law == "gamma":
            return GammaNoise(shape=self.shape)
        if self.law == "normal":
            return NormalNoise(sigma=self.sigma)
        if self.law == "uniform":
            return UniformNoise(half_width=self.half_width)
        if self.law == "correlated_normal":
            return CorrelatedNormalNoise(sigma=self.sigma, corr_length=self.corr_length)
        raise ConfigError("multiplicative_noise.law", f"unknown law {self.law!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    nx: int
    ny: int
    hx: float
    hy: float
    blocks: tuple[BlockConfig, ...]
    kappa: float
    trunc_radius: float | None
    c1: float
    c2: float
    prior_mean_level: float
    noise: NoiseConfig
    additive_fraction: float
    band_factor: float
    data_seed: int
    validation_seed: int
    output_dir: str
    method: str = "bae"
    cross_section_row: int | None = None

    def to_dict(self) -> dict:
        """JSON-ready nested representation; inverse of `from_dict`."""
        return {
            "grid": {"nx": self.nx, "ny": self.ny, "hx": self.hx, "hy": self.hy},
            "phantom": {"blocks": [asdict(b) for b in self.blocks]},
            "kernel": {"kappa": self.kappa, "trunc_radius": self.trunc_radius},
            "prior": {"c1": self.c1, "c2": self.c2, "mean_level": self.prior_mean_level},
            "multiplicative_noise": {
                k: v for k, v in asdict(self.noise).items() if v is not None
            },
            "additive_noise": {"fraction_of_range": self.additive_fraction},
            "band_factor": self.band_factor,
            "seeds": {"data": self.data_seed, "validation": self.validation_seed},
            "output_dir": self.output_dir,
            "method": self.method,
            "cross_section_row": self.cross_section_row,
        }

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("<root>", "top level must be an object")
        grid = _as_section(_require(doc, "<root>", "grid"), "grid")
        nx = _as_int(_require(grid, "grid", "nx"), "grid.nx")
        ny = _as_int(_require(grid, "grid", "ny"), "grid.ny")
        if nx < 2 or ny < 2:
            raise ConfigError("grid", "nx and ny must both be at least 2")
        hx = _as_number(grid.get("hx", 1.0), "grid.hx")
        hy = _as_number(grid.get("hy", 1.0), "grid.hy")
        if hx <= 0.0 or hy <= 0.0:
            raise ConfigError("grid", "hx and hy must be positive")

        phantom = _as_section(_require(doc, "<root>", "phantom"), "phantom")
        raw_blocks = _require(phantom, "phantom", "blocks")
        if not isinstance(raw_blocks, list) or not raw_blocks:
            raise ConfigError("phantom.blocks", "expected a non-empty list")
        blocks = []
        for idx, raw in enumerate(raw_blocks):
            path = f"phantom.blocks[{idx}]"
            sec = _as_section(raw, path)
            vals = {
                key: _as_number(_require(sec, path, key), f"{path}.{key}")
                for key in ("x0", "y0", "x1", "y1", "value")
            }
            if not (0.0 <= vals["x0"] < vals["x1"] <= 1.0):
                raise ConfigError(path, "need 0 <= x0 < x1 <= 1")
            if not (0.0 <= vals["y0"] < vals["y1"] <= 1.0):
                raise ConfigError(path, "need 0 <= y0 < y1 <= 1")
            blocks.append(BlockConfig(**vals))

        kernel = _as_section(_require(doc, "<root>", "kernel"), "kernel")
        kappa = _as_number(_require(kernel, "kernel", "kappa"), "kernel.kappa")
        if kappa <= 0.0:
            raise ConfigError("kernel.kappa", "must be positive")
        trunc = kernel.get("trunc_radius")
        if trunc is not None:
            trunc = _as_number(trunc, "kernel.trunc_radius")
            if trunc <= 0.0:
                raise ConfigError("kernel.trunc_radius", "must be positive when given")

        prior = _as_section(_require(doc, "<root>", "prior"), "prior")
        c1 = _as_number(_require(prior, "prior", "c1"), "prior.c1")
        c2 = _as_number(_require(prior, "prior", "c2"), "prior.c2")
        if c1 <= 0.0:
            raise ConfigError("prior.c1", "must be positive")
        if c2 < 0.0:
            raise ConfigError("prior.c2", "must be non-negative")
        mean_level = _as_number(prior.get("mean_level", 0.0), "prior.mean_level")

        noise = _parse_noise(
            _as_section(_require(doc, "<root>", "multiplicative_noise"), "multiplicative_noise")
        )

        additive = _as_section(_require(doc, "<root>", "additive_noise"), "additive_noise")
        fraction = _as_number(
            _require(additive, "additive_noise", "fraction_of_range"),
            "additive_noise.fraction_of_range",
        )
        if fraction <= 0.0:
            raise ConfigError("additive_noise.fraction_of_range", "must be positive")

        band = _as_number(_require(doc, "<root>", "band_factor"), "band_factor")
        if band < 0.0:
            raise ConfigError("band_factor", "must be non-negative")

        seeds = _as_section(_require(doc, "<root>", "seeds"), "seeds")
        data_seed = _as_int(_require(seeds, "seeds", "data"), "seeds.data")
        validation_seed = _as_int(_require(seeds, "seeds", "validation"), "seeds.validation")
        if data_seed < 0 or validation_seed < 0:
            raise ConfigError("seeds", "seeds must be non-negative")

        output_dir = _require(doc, "<root>", "output_dir")
        if not isinstance(output_dir, str) or not output_dir:
            raise ConfigError("output_dir", "expected a non-empty string")

        method = doc.get("method", "bae")
        if method not in METHODS:
            raise ConfigError("method", f"must be one of {METHODS}, got {method!r}")

        row = doc.get("cross_section_row")
        if row is not None:
            row = _as_int(row, "cross_section_row")
            if not (0 <= row < ny):
                raise ConfigError("cross_section_row", f"must lie in [0, {ny})")

        return ExperimentConfig(
            nx=nx,
            ny=ny,
            hx=hx,
            hy=hy,
            blocks=tuple(blocks),
            kappa=kappa,
            trunc_radius=trunc,
            c1=c1,
            c2=c2,
            prior_mean_level=mean_level,
            noise=noise,
            additive_fraction=fraction,
            band_factor=band,
            data_seed=data_seed,
            validation_seed=validation_seed,
            output_dir=output_dir,
            method=method,
            cross_section_row=row,
        )

    @staticmethod
    def parse(text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
        return ExperimentConfig.from_dict(doc)

    @staticmethod
    def load(path: str | Path) -> "ExperimentConfig":
        return ExperimentConfig.parse(Path(path).read_text())


def _parse_noise(section: dict) -> NoiseConfig:
    law = _require(section, "multiplicative_noise", "law")
    if law not in NOISE_LAWS:
        raise ConfigError(
            "multiplicative_noise.law", f"must be one of {NOISE_LAWS}, got {law!r}"
        )
    path = "multiplicative_noise"
    if law == "gamma":
        shape = _as_number(_require(section, path, "shape"), f"{path}.shape")
        if shape <= 0.0:
            raise ConfigError(f"{path}.shape", "must be positive")
        return NoiseConfig(law=law, shape=shape)
    if law == "normal":
        sigma = _as_number(_require(section, path, "sigma"), f"{path}.sigma")
        if sigma < 0.0:
            raise ConfigError(f"{path}.sigma", "must be non-negative")
        return NoiseConfig(law=law, sigma=sigma)
    if law == "uniform":
        width = _as_number(_require(section, path, "half_width"), f"{path}.half_width")
        if width <= 0.0:
            raise ConfigError(f"{path}.half_width", "must be positive")
        return NoiseConfig(law=law, half_width=width)
    sigma = _as_number(_require(section, path, "sigma"), f"{path}.sigma")
    corr = _as_number(_require(section, path, "corr_length"), f"{path}.corr_length")
    if sigma <= 0.0:
        raise ConfigError(f"{path}.sigma", "must be positive")
    if corr <= 0.0:
        raise ConfigError(f"{path}.corr_length", "must be positive")
    return NoiseConfig(law=law, sigma=sigma, corr_length=corr)
