"""Deterministic on-disk formats for fields, matrices, and run artifacts.

All text output uses ``repr(float)`` (shortest round-trip form), so the
same field always serializes to the same bytes regardless of platform.
Rasters are 8-bit grayscale PNGs with a plain-text sidecar recording the
affine value scale, making the quantization reversible up to 1/255 of the
value range.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import scipy.sparse
from PIL import Image

from .grids import Grid, GridField, field_from_matrix

__all__ = [
    "write_field_csv",
    "read_field_csv",
    "write_field_raster",
    "read_field_raster",
    "write_coordinate_matrix",
    "write_posterior_csv",
    "write_cross_section_csv",
    "write_manifest",
    "sha256_file",
]


def _fmt(value: float) -> str:
    return repr(float(value))


def write_field_csv(field: GridField, path: str | Path) -> Path:
    """Write a field as CSV, one line per grid row, no header."""
    path = Path(path)
    mat = field.as_matrix()
    lines = [",".join(_fmt(v) for v in row) for row in mat]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_field_csv(path: str | Path, hx: float = 1.0, hy: float = 1.0) -> GridField:
    """Read a field written by `write_field_csv` back onto a fresh grid."""
    mat = np.loadtxt(path, delimiter=",", ndmin=2)
    ny, nx = mat.shape
    return field_from_matrix(Grid(nx=nx, ny=ny, hx=hx, hy=hy), mat)


def write_field_raster(field: GridField, path: str | Path) -> Path:
    """Write an 8-bit grayscale PNG plus a ``.scale.txt`` sidecar.

    Pixels encode ``round(255 * (value - lo) / (hi - lo))``; a constant
    field maps to mid-gray with an explicitly zero span in the sidecar.
    """
    path = Path(path)
    mat = field.as_matrix()
    lo = float(mat.min())
    hi = float(mat.max())
    if hi > lo:
        scaled = np.round(255.0 * (mat - lo) / (hi - lo))
    else:
        scaled = np.full(mat.shape, 128.0)
    img = Image.fromarray(scaled.astype(np.uint8), mode="L")
    img.save(path, format="PNG")
    sidecar = path.with_name(path.name + ".scale.txt")
    sidecar.write_text(f"min {_fmt(lo)}\nmax {_fmt(hi)}\n")
    return path


def read_field_raster(path: str | Path, hx: float = 1.0, hy: float = 1.0) -> GridField:
    """Invert `write_field_raster` up to the 8-bit quantization step."""
    path = Path(path)
    img = np.asarray(Image.open(path).convert("L"), dtype=float)
    sidecar = path.with_name(path.name + ".scale.txt")
    scale = dict(line.split(maxsplit=1) for line in sidecar.read_text().splitlines())
    lo = float(scale["min"])
    hi = float(scale["max"])
    mat = lo + (hi - lo) * img / 255.0 if hi > lo else np.full(img.shape, lo)
    ny, nx = mat.shape
    return field_from_matrix(Grid(nx=nx, ny=ny, hx=hx, hy=hy), mat)


def write_coordinate_matrix(matrix, path: str | Path) -> Path:
    """Write a sparse or dense matrix as ``row col value`` triplet lines.

    Zero entries of sparse input are skipped; triplets are sorted by
    ``(row, col)`` so the output is deterministic.
    """
    path = Path(path)
    if scipy.sparse.issparse(matrix):
        coo = matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        triplets = zip(coo.row[order], coo.col[order], coo.data[order])
    else:
        dense = np.asarray(matrix, dtype=float)
        rows, cols = np.nonzero(dense)
        triplets = zip(rows, cols, dense[rows, cols])
    lines = [f"{r} {c} {_fmt(v)}" for r, c, v in triplets]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_posterior_csv(
    path: str | Path,
    estimate: GridField,
    pointwise_std: GridField | None,
) -> Path:
    """Per-node table ``index,map,std``; std column empty when unavailable."""
    path = Path(path)
    lines = ["index,map,std"]
    stds = pointwise_std.values if pointwise_std is not None else None
    for idx, val in enumerate(estimate.values):
        std_txt = _fmt(stds[idx]) if stds is not None else ""
        lines.append(f"{idx},{_fmt(val)},{std_txt}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_cross_section_csv(
    path: str | Path,
    truth: np.ndarray,
    estimate: np.ndarray,
    lower: np.ndarray | None,
    upper: np.ndarray | None,
) -> Path:
    """Profile table ``x_index,truth,map,lower,upper`` along one grid row."""
    path = Path(path)
    lines = ["x_index,truth,map,lower,upper"]
    for i in range(len(truth)):
        lo_txt = _fmt(lower[i]) if lower is not None else ""
        hi_txt = _fmt(upper[i]) if upper is not None else ""
        lines.append(f"{i},{_fmt(truth[i])},{_fmt(estimate[i])},{lo_txt},{hi_txt}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_manifest(manifest: dict, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
