"""Cauchy-Green transform T and Beurling transform S on the disc.

Both operators are discretized with exact per-cell kernel integrals
(see jdisc.kernels): the quadrature absorbs the kernel singularity with
no special-casing beyond the symmetry zero on the self cell, and the
principal value of S is realized structurally rather than by excision.

Applications stream over row blocks of the dense weight matrix, so the
matrix-free path and an explicitly built OperatorMatrix run the exact
same arithmetic (bit-for-bit equal results).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, ResourceLimitError
from .grid import DiscGrid, GridFunction

# Row blocking keeps numpy kernel temporaries around 64 MB.
_PAIR_BLOCK = 4_000_000

# Default cap on a single dense operator matrix.
DEFAULT_MEMORY_CAP = 2 * 1024 ** 3

_CORNER_EPS = 1e-12


def _rows_per_block(ncells: int) -> int:
    return max(1, _PAIR_BLOCK // max(1, ncells))


def perturb_off_lattice(evals: np.ndarray, grid: DiscGrid) -> np.ndarray:
    """Nudge evaluation points off cell edges/corners by 1e-12 * h.

    The closed-form edge integrals are singular exactly on the lattice
    lines; a half-machine-size shift is below every tolerance used here.
    """
    evals = np.asarray(evals, dtype=np.complex128).copy()
    h = grid.h
    for part in (evals.real, evals.imag):
        frac = (part + 1.0) / h
        dist = np.abs(frac - np.round(frac)) * h
        on_line = dist < _CORNER_EPS * h
        part[on_line] += _CORNER_EPS * h
    return evals


def weight_blocks(grid: DiscGrid, evals: np.ndarray, kind: str):
    """Yield (row_slice, W_block) with (Tf)(zeta_j) ~ sum_k W[j,k] f(t_k)."""
    if kind not in ("T", "S"):
        raise InvalidArgumentError(f"kind must be 'T' or 'S', got {kind!r}")
    evals = perturb_off_lattice(evals, grid)
    step = _rows_per_block(grid.ncells)
    scale = -1.0 / np.pi
    for lo in range(0, evals.size, step):
        sl = slice(lo, min(lo + step, evals.size))
        i1, i2 = kernels.cell_integrals(
            grid.cells, grid.h, evals[sl], want_i2=(kind == "S"))
        yield sl, scale * (i1 if kind == "T" else i2)


def cauchy_green(f: GridFunction, evals: np.ndarray) -> np.ndarray:
    """(Tf)(zeta) = -(1/pi) int_D f(t) dA(t) / (t - zeta), any zeta in C.

    Returns shape (len(evals),) or (len(evals), channels).
    """
    evals = np.atleast_1d(np.asarray(evals, dtype=np.complex128))
    out_shape = (evals.size,) if f.values.ndim == 1 else (evals.size, f.channels)
    out = np.empty(out_shape, dtype=np.complex128)
    for sl, w in weight_blocks(f.grid, evals, "T"):
        out[sl] = w @ f.values
    return out


def beurling(f: GridFunction) -> GridFunction:
    """(Sf)(t_j) = -(1/pi) p.v. int_D f(t) dA(t) / (t - t_j)^2 at cell centers."""
    out = np.empty_like(f.values)
    for sl, w in weight_blocks(f.grid, f.grid.cells, "S"):
        out[sl] = w @ f.values
    return GridFunction(f.grid, out)


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense precomputed weights for T or S at fixed evaluation points."""

    grid: DiscGrid
    evals: np.ndarray
    weights: np.ndarray  # (len(evals), ncells) complex
    kind: str

    def apply(self, f: GridFunction | np.ndarray) -> np.ndarray:
        vals = f.values if isinstance(f, GridFunction) else np.asarray(f)
        out_shape = (self.evals.size,) + vals.shape[1:]
        out = np.empty(out_shape, dtype=np.complex128)
        # Same row blocking as the matrix-free path, so results match it
        # bit-for-bit.
        step = _rows_per_block(self.grid.ncells)
        for lo in range(0, self.evals.size, step):
            sl = slice(lo, min(lo + step, self.evals.size))
            out[sl] = self.weights[sl] @ vals
        return out


def build_operator_matrix(grid: DiscGrid, evals: np.ndarray, kind: str,
                          memory_cap: int = DEFAULT_MEMORY_CAP) -> OperatorMatrix:
    """Precompute the dense weight matrix (reused across solver iterations)."""
    evals = np.atleast_1d(np.asarray(evals, dtype=np.complex128))
    need = 16 * evals.size * grid.ncells
    if need > memory_cap:
        raise ResourceLimitError(
            f"operator matrix needs {need / 1e9:.2f} GB > cap "
            f"{memory_cap / 1e9:.2f} GB; lower the grid size n or raise the cap")
    w = np.empty((evals.size, grid.ncells), dtype=np.complex128)
    for sl, block in weight_blocks(grid, evals, kind):
        w[sl] = block
    return OperatorMatrix(grid=grid, evals=evals, weights=w, kind=kind)
