import numpy as np
import pytest

from jdisc import boundary_trace, build_grid
from jdisc.errors import InvalidArgumentError
from jdisc.grid import ARC_1, ARC_2, ARC_3, GridFunction, lp_norm


def test_centers_inside_disc():
    for n in (8, 32):
        grid = build_grid(n)
        assert np.all(np.abs(grid.cells) < 1.0)
        assert grid.h == pytest.approx(2.0 / n)


def test_total_area_approaches_pi():
    grid = build_grid(64)
    assert abs(grid.total_area - np.pi) / np.pi <= 0.05
    finer = build_grid(128)
    assert abs(finer.total_area - np.pi) < abs(grid.total_area - np.pi)


def test_build_grid_rejects_bad_n():
    with pytest.raises(InvalidArgumentError):
        build_grid(7)
    with pytest.raises(InvalidArgumentError):
        build_grid(6)


def test_row_major_deterministic():
    a, b = build_grid(16), build_grid(16)
    assert np.array_equal(a.cells, b.cells)
    # bottom row first, x increasing within a row
    assert a.cells[0].imag == a.cells[1].imag
    assert a.cells[1].real > a.cells[0].real


def test_lp_norm_basics(grid32):
    zero = GridFunction(grid32, np.zeros(grid32.ncells, dtype=complex))
    assert lp_norm(zero, 2.0) == 0.0
    ones = GridFunction(grid32, np.ones(grid32.ncells, dtype=complex))
    assert lp_norm(ones, 2.0) == pytest.approx(np.sqrt(np.pi), rel=0.03)
    c = 2.0 - 1.5j
    const = GridFunction(grid32, np.full(grid32.ncells, c))
    assert lp_norm(const, 3.0) == pytest.approx(
        abs(c) * grid32.total_area ** (1.0 / 3.0))


def test_lp_norm_homogeneous_triangle(grid32):
    rng = np.random.default_rng(5)
    f = rng.normal(size=grid32.ncells) + 1j * rng.normal(size=grid32.ncells)
    g = rng.normal(size=grid32.ncells) + 1j * rng.normal(size=grid32.ncells)
    for p in (1.0, 2.0, 2.2):
        assert lp_norm(3.0 * f, p, grid32) == pytest.approx(
            3.0 * lp_norm(f, p, grid32))
        assert lp_norm(f + g, p, grid32) <= \
            lp_norm(f, p, grid32) + lp_norm(g, p, grid32) + 1e-12


def test_lp_norm_multichannel(grid32):
    f = np.ones((grid32.ncells, 2), dtype=complex)
    # Euclidean reduction across channels: magnitude sqrt(2) pointwise.
    assert lp_norm(f, 2.0, grid32) == pytest.approx(
        np.sqrt(2.0 * grid32.total_area))


def test_lp_norm_rejects_small_p(grid32):
    with pytest.raises(InvalidArgumentError):
        lp_norm(np.ones(grid32.ncells), 0.5, grid32)


def test_boundary_trace_arcs():
    tr = boundary_trace(16)
    assert np.sum(tr.arcs == ARC_1) == 4
    assert np.sum(tr.arcs == ARC_2) == 4
    assert np.sum(tr.arcs == ARC_3) == 8
    for corner in (1.0, 1j, -1.0):
        assert np.min(np.abs(tr.points - corner)) > 1e-3


def test_boundary_trace_label_switch_points():
    tr = boundary_trace(64)
    switches = np.nonzero(np.diff(tr.arcs))[0]
    # labels change exactly at theta = pi/2 and pi
    assert np.all(tr.thetas[switches] < np.array([np.pi / 2, np.pi]))
    assert np.all(tr.thetas[switches + 1] > np.array([np.pi / 2, np.pi]))


def test_boundary_trace_rejects_bad_m():
    with pytest.raises(InvalidArgumentError):
        boundary_trace(12)
    with pytest.raises(InvalidArgumentError):
        boundary_trace(18)


def test_grid_function_validation(grid32):
    with pytest.raises(InvalidArgumentError):
        GridFunction(grid32, np.ones(3))
    bad = np.ones(grid32.ncells)
    bad[0] = np.nan
    with pytest.raises(InvalidArgumentError):
        GridFunction(grid32, bad)
