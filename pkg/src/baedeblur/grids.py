"""Rectangular pixel grids and scalar fields living on them.

A grid is an ``nx`` by ``ny`` lattice of pixel nodes with spacings ``hx``
and ``hy``.  Fields are stored flat in row-major order: node ``(i, j)``
maps to index ``j * nx + i``, so grid row ``j`` occupies the contiguous
slice ``[j * nx, (j + 1) * nx)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Grid",
    "GridField",
    "PhantomBlock",
    "DEFAULT_PHANTOM_BLOCKS",
    "make_grid",
    "make_field",
    "constant_field",
    "field_from_matrix",
    "cross_section",
    "value_range",
    "block_phantom",
    "default_phantom",
]


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular lattice of pixel nodes."""

    nx: int
    ny: int
    hx: float = 1.0
    hy: float = 1.0

    def __post_init__(self) -> None:
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if not (self.hx > 0.0 and self.hy > 0.0):
            raise ValueError("grid spacings must be positive")

    @property
    def num_nodes(self) -> int:
        return self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int]:
        """Matrix shape ``(ny, nx)`` of the field seen as an image."""
        return (self.ny, self.nx)

    def node_index(self, i: int, j: int) -> int:
        """Flat index of node ``(i, j)``; row-major with x fastest."""
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise IndexError(f"node ({i}, {j}) outside grid")
        return j * self.nx + i

    def node_coords(self) -> np.ndarray:
        """Physical ``(x, y)`` positions of all nodes, shape ``(n, 2)``."""
        idx = np.arange(self.num_nodes)
        return np.column_stack(((idx % self.nx) * self.hx, (idx // self.nx) * self.hy))


@dataclass(frozen=True)
class GridField:
    """Immutable scalar field over a grid, stored flat in node order."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.num_nodes,):
            raise ValueError(
                f"field length {vals.shape} does not match grid with "
                f"{self.grid.num_nodes} nodes"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def as_matrix(self) -> np.ndarray:
        """Read-only ``(ny, nx)`` view; entry ``[j, i]`` is node ``(i, j)``."""
        return self.values.reshape(self.grid.shape)


@dataclass(frozen=True)
class PhantomBlock:
    """Axis-aligned rectangle in unit-square coordinates with a fill value.

    Corners are fractions of the domain, so the same block list describes
    the same shape on grids of any resolution.
    """

    x0: float
    y0: float
    x1: float
    y1: float
    value: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x0 < self.x1 <= 1.0 and 0.0 <= self.y0 < self.y1 <= 1.0):
            raise ValueError("block corners must satisfy 0 <= lo < hi <= 1")


# Two well-separated square inclusions of opposite sign on a zero background.
DEFAULT_PHANTOM_BLOCKS: tuple[PhantomBlock, ...] = (
    PhantomBlock(0.16, 0.16, 0.44, 0.44, 1.0),
    PhantomBlock(0.56, 0.56, 0.84, 0.84, -1.0),
)


def make_grid(nx: int, ny: int, hx: float = 1.0, hy: float = 1.0) -> Grid:
    """Build a validated grid."""
    return Grid(nx=nx, ny=ny, hx=hx, hy=hy)


def make_field(grid: Grid, values: np.ndarray) -> GridField:
    """Wrap flat ``values`` as a field on ``grid``."""
    return GridField(grid=grid, values=np.asarray(values, dtype=float))


def constant_field(grid: Grid, value: float) -> GridField:
    """Field equal to ``value`` at every node."""
    return GridField(grid=grid, values=np.full(grid.num_nodes, float(value)))


def field_from_matrix(grid: Grid, matrix: np.ndarray) -> GridField:
    """Build a field from its ``(ny, nx)`` image representation."""
    mat = np.asarray(matrix, dtype=float)
    if mat.shape != grid.shape:
        raise ValueError(f"matrix shape {mat.shape} does not match grid {grid.shape}")
    return GridField(grid=grid, values=mat.reshape(-1))


def cross_section(field: GridField, row: int) -> np.ndarray:
    """Values along grid row ``row``, i.e. fixed ``j`` and ``i = 0..nx-1``."""
    grid = field.grid
    if not (0 <= row < grid.ny):
        raise IndexError(f"row {row} outside grid with ny={grid.ny}")
    return field.values[row * grid.nx : (row + 1) * grid.nx].copy()


def value_range(field: GridField) -> float:
    """Spread ``max - min`` of the field values."""
    return float(np.max(field.values) - np.min(field.values))


def block_phantom(grid: Grid, blocks: tuple[PhantomBlock, ...]) -> GridField:
    """Piecewise-constant phantom from rectangles in unit-square coordinates.

    A pixel belongs to a block when its center ``((i+0.5)/nx, (j+0.5)/ny)``
    falls inside the rectangle; later blocks overwrite earlier ones.
    Background is zero.
    """
    cx = (np.arange(grid.nx) + 0.5) / grid.nx
    cy = (np.arange(grid.ny) + 0.5) / grid.ny
    img = np.zeros(grid.shape)
    for blk in blocks:
        in_x = (cx >= blk.x0) & (cx < blk.x1)
        in_y = (cy >= blk.y0) & (cy < blk.y1)
        img[np.ix_(in_y, in_x)] = blk.value
    return field_from_matrix(grid, img)


def default_phantom(grid: Grid) -> GridField:
    """Standard two-block test image used throughout the experiments."""
    return block_phantom(grid, DEFAULT_PHANTOM_BLOCKS)
