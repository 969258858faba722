"""Shared fixtures: grids, workspaces, and solved discs reused across files.

The workspaces are expensive (dense operator matrices), so everything is
session-scoped; tests must not mutate them.
"""
import time

import numpy as np
import pytest

from jdisc import (ConformalMap, SolverWorkspace, boundary_trace, build_grid,
                   builtin_field, solve_disc)
from jdisc.grid import GridFunction
from jdisc.verify import diagnose


def smooth_bump(grid):
    """Deterministic two-lobe bump supported in |t| < 0.7."""
    t = grid.cells
    f = ((1.0 + 0.5j) * np.exp(-np.abs(t - 0.2 + 0.1j) ** 2 / 0.05)
         - 0.7 * np.exp(-np.abs(t + 0.3j) ** 2 / 0.08))
    return GridFunction(grid, f * np.exp(-(np.abs(t) / 0.68) ** 16))


def random_bumps(grid, count, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        vals = np.zeros(grid.ncells, dtype=np.complex128)
        for _ in range(3):
            c = rng.normal() + 1j * rng.normal()
            z_i = 0.4 * (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1))
            vals += c * np.exp(-np.abs(grid.cells - z_i) ** 2
                               / rng.uniform(0.1, 0.25) ** 2)
        vals *= np.exp(-(np.abs(grid.cells) / 0.68) ** 16)
        out.append(GridFunction(grid, vals))
    return out


@pytest.fixture(scope="session")
def grid32():
    return build_grid(32)


@pytest.fixture(scope="session")
def grid64():
    return build_grid(64)


@pytest.fixture(scope="session")
def trace256():
    return boundary_trace(256)


@pytest.fixture(scope="session")
def cmap():
    return ConformalMap()


@pytest.fixture(scope="session")
def ws32(grid32, trace256, cmap):
    return SolverWorkspace(grid32, trace256, cmap)


@pytest.fixture(scope="session")
def ws64_timed(grid64, trace256, cmap):
    t0 = time.perf_counter()
    ws = SolverWorkspace(grid64, trace256, cmap)
    return ws, time.perf_counter() - t0


@pytest.fixture(scope="session")
def ws64(ws64_timed):
    return ws64_timed[0]


@pytest.fixture(scope="session")
def diag_field():
    return builtin_field("diag_bump", dimension=2, amplitude=0.5,
                         center=(0.5j, ()), radius=0.2)


@pytest.fixture(scope="session")
def zero_field():
    return builtin_field("zero", dimension=2)


@pytest.fixture(scope="session")
def sol32(ws32, diag_field):
    sol = solve_disc(diag_field, 0.5j, [0.0], ws32)
    diagnose(sol, diag_field)
    return sol


@pytest.fixture(scope="session")
def sol64_timed(ws64_timed, diag_field):
    ws, t_build = ws64_timed
    t0 = time.perf_counter()
    sol = solve_disc(diag_field, 0.5j, [0.0], ws)
    diagnose(sol, diag_field)
    return sol, t_build + (time.perf_counter() - t0)


@pytest.fixture(scope="session")
def sol64(sol64_timed):
    return sol64_timed[0]


@pytest.fixture(scope="session")
def trivial32(ws32, zero_field):
    sol = solve_disc(zero_field, 0.5j, [0.0], ws32)
    diagnose(sol, zero_field)
    return sol
