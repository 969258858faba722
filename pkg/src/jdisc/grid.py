"""Discretization of the unit disc: cell lattice, grid functions, boundary samples.

The disc is covered by a uniform Cartesian lattice over [-1,1]^2; a cell
belongs to the grid iff its center lies strictly inside the unit circle.
Cells are never clipped -- the staircase error at the rim is first order
and all downstream tolerances are sized for it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

ARC_1 = 1  # {e^{i theta}: 0 < theta < pi/2}
ARC_2 = 2  # {e^{i theta}: pi/2 < theta < pi}
ARC_3 = 3  # {e^{i theta}: pi < theta < 2 pi}


@dataclass(frozen=True)
class DiscGrid:
    """Uniform cell lattice covering the unit disc.

    cells are the centers t_k (complex, row-major order, |t_k| < 1);
    every cell has area h^2.
    """

    n: int
    h: float
    cells: np.ndarray  # complex128, shape (ncells,)

    @property
    def ncells(self) -> int:
        return self.cells.size

    @property
    def cell_area(self) -> float:
        return self.h * self.h

    @property
    def total_area(self) -> float:
        return self.ncells * self.cell_area


def build_grid(n: int) -> DiscGrid:
    """Build the lattice with n cells per axis (n >= 8, even).

    Ordering is row-major over (iy, ix), bottom row first, so operator
    matrices built on top of it are reproducible bit-for-bit.
    """
    if n < 8 or n % 2 != 0:
        raise InvalidArgumentError(f"grid size must be even and >= 8, got {n}")
    h = 2.0 / n
    axis = -1.0 + h * (np.arange(n) + 0.5)
    xx, yy = np.meshgrid(axis, axis)  # yy varies along rows
    centers = (xx + 1j * yy).ravel()
    inside = np.abs(centers) < 1.0
    cells = np.ascontiguousarray(centers[inside])
    return DiscGrid(n=n, h=h, cells=cells)


@dataclass(frozen=True)
class GridFunction:
    """Complex values per cell; channels >= 1 are stacked along axis 1.

    values has shape (ncells,) for a single channel or (ncells, channels).
    """

    grid: DiscGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape[0] != self.grid.ncells:
            raise InvalidArgumentError(
                f"value count {v.shape[0]} != cell count {self.grid.ncells}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("grid function has non-finite values")
        object.__setattr__(self, "values", v)

    @property
    def channels(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def channel(self, j: int) -> np.ndarray:
        return self.values if self.values.ndim == 1 else self.values[:, j]


def lp_norm(f: GridFunction | np.ndarray, p: float, grid: DiscGrid | None = None) -> float:
    """Discrete L^p norm (sum |f|^p h^2)^(1/p).

    Multichannel input is reduced to a pointwise Euclidean magnitude
    across channels first.  Accepts a raw value array when grid is given.
    """
    if p < 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    if isinstance(f, GridFunction):
        grid, vals = f.grid, f.values
    else:
        if grid is None:
            raise InvalidArgumentError("grid required for raw arrays")
        vals = np.asarray(f)
    mag = np.abs(vals) if vals.ndim == 1 else np.sqrt(
        np.sum(np.abs(vals) ** 2, axis=1))
    if np.isinf(p):
        return float(mag.max(initial=0.0))
    return float((np.sum(mag ** p) * grid.cell_area) ** (1.0 / p))


@dataclass(frozen=True)
class BoundaryTrace:
    """Counterclockwise samples on the unit circle, tagged by arc.

    Sample angles are offset by half a step so the corner points 1, i, -1
    are never hit.  values is optional, shape (m,) or (m, channels).
    """

    m: int
    points: np.ndarray  # complex128 on |z| = 1
    arcs: np.ndarray    # int, ARC_1 / ARC_2 / ARC_3
    thetas: np.ndarray
    values: np.ndarray | None = field(default=None)

    def with_values(self, values: np.ndarray) -> "BoundaryTrace":
        v = np.asarray(values, dtype=np.complex128)
        if v.shape[0] != self.m:
            raise InvalidArgumentError("trace value count mismatch")
        return BoundaryTrace(self.m, self.points, self.arcs, self.thetas, v)


def boundary_trace(m: int) -> BoundaryTrace:
    """Sample the circle at theta_j = 2 pi (j + 1/2) / m (m >= 16, mult. of 4)."""
    if m < 16 or m % 4 != 0:
        raise InvalidArgumentError(f"boundary sample count must be >= 16 and divisible by 4, got {m}")
    thetas = 2.0 * np.pi * (np.arange(m) + 0.5) / m
    points = np.exp(1j * thetas)
    arcs = np.full(m, ARC_3, dtype=np.int64)
    arcs[thetas < np.pi] = ARC_2
    arcs[thetas < np.pi / 2] = ARC_1
    return BoundaryTrace(m=m, points=points, arcs=arcs, thetas=thetas)
