import numpy as np
import pytest

from jdisc import boundary_trace
from jdisc.errors import InvalidArgumentError
from jdisc.grid import ARC_1, ARC_2, ARC_3, GridFunction
from jdisc.weights import (boundary_violation, build_weighted_matrices,
                           weight_R, weight_R_prime, weight_X, weighted_cg,
                           weighted_beurling)

from conftest import smooth_bump, random_bumps


def test_r_at_zero():
    assert weight_R(0.0) == pytest.approx(np.exp(0.75j * np.pi), abs=1e-12)


def test_r_vanishes_at_marked_points():
    for zeta in (1.0, -1.0, 1j):
        assert abs(weight_R(zeta)) <= 1e-12


def test_r_branch_continuity():
    # max jump along |zeta| = 0.99 halves (at least) as sampling doubles
    jumps = []
    for m in (2000, 4000, 8000):
        z = 0.99 * np.exp(2j * np.pi * np.arange(m) / m)
        r = weight_R(z)
        jumps.append(np.max(np.abs(np.diff(np.append(r, r[0])))))
    assert jumps[1] < jumps[0] and jumps[2] < jumps[1]
    assert jumps[2] < 0.02


def test_r_prime_is_derivative():
    eps = 1e-7
    for zeta in (0.3 + 0.2j, -0.4 + 0.1j, 0.2 - 0.5j):
        fd = (weight_R(zeta + eps) - weight_R(zeta - eps)) / (2 * eps)
        assert abs(fd - weight_R_prime(zeta)) <= 1e-5


def test_x_arc_arguments(trace256):
    x = weight_X(trace256.points)
    for arc, want in ((ARC_1, 0.75 * np.pi), (ARC_2, 0.25 * np.pi),
                      (ARC_3, 0.0)):
        args = np.angle(x[trace256.arcs == arc])
        dev = np.abs(np.mod(args - want + np.pi / 2, np.pi) - np.pi / 2)
        assert np.max(dev) <= 1e-8


def test_x_on_gamma3_real(trace256):
    x = weight_X(trace256.points)
    g3 = x[trace256.arcs == ARC_3]
    assert np.max(np.abs(g3.imag)) <= 1e-8 * np.max(np.abs(g3))


def test_x_fourth_power_real(trace256):
    x = weight_X(trace256.points)
    assert np.max(np.abs((x ** 4).imag)) <= 1e-8 * np.max(np.abs(x) ** 4)


def test_weighted_cg_of_zero(grid32):
    zero = GridFunction(grid32, np.zeros(grid32.ncells, dtype=complex))
    for j in (1, 2):
        vals = weighted_cg(j, zero, np.array([0.2 + 0.1j, 0.9j]))
        assert np.all(vals == 0)


def test_weighted_cg_rejects_exterior(grid32):
    f = smooth_bump(grid32)
    with pytest.raises(InvalidArgumentError):
        weighted_cg(1, f, np.array([2.0 + 0j]))


def test_t1_boundary_real_part(grid64, trace256):
    for f in random_bumps(grid64, 2, seed=3):
        vals = weighted_cg(1, f, trace256.points)
        assert np.max(np.abs(vals.real)) <= 2e-2 * max(np.max(np.abs(vals)), 1e-30)


def test_t2_boundary_condition_gamma1(grid64, trace256):
    for f in random_bumps(grid64, 2, seed=4):
        vals = weighted_cg(2, f, trace256.points)
        g1 = vals[trace256.arcs == ARC_1]
        assert np.max(np.abs(((1 + 1j) * g1).imag)) <= \
            2e-2 * max(np.max(np.abs(vals)), 1e-30)


def test_weighted_beurling_of_zero(grid32):
    zero = GridFunction(grid32, np.zeros(grid32.ncells, dtype=complex))
    for j in (1, 2):
        assert np.all(weighted_beurling(j, zero).values == 0)


def test_weighted_beurling_matches_fd(grid32):
    f = smooth_bump(grid32)
    eps = 1e-5
    inner = np.abs(grid32.cells) < 0.7
    pts = grid32.cells[inner][::29]
    for j in (1, 2):
        sf = weighted_beurling(j, f).values[inner][::29]
        fd = 0.5 * ((weighted_cg(j, f, pts + eps)
                     - weighted_cg(j, f, pts - eps)) / (2 * eps)
                    - 1j * (weighted_cg(j, f, pts + 1j * eps)
                            - weighted_cg(j, f, pts - 1j * eps)) / (2 * eps))
        assert np.linalg.norm(fd - sf) / np.linalg.norm(sf) <= 5e-2


def test_weighted_matrices_match_streamed(grid32):
    f = smooth_bump(grid32)
    for j in (1, 2):
        mats = build_weighted_matrices(grid32, j, grid32.cells)
        assert np.allclose(mats.apply_t(f.values),
                           weighted_cg(j, f, grid32.cells), atol=1e-12)
        assert np.allclose(mats.apply_s(f.values),
                           weighted_beurling(j, f).values, atol=1e-12)


def test_boundary_violation_trivia(trace256):
    zero = trace256.with_values(np.zeros(trace256.m, dtype=complex))
    assert boundary_violation(zero, "T1") == 0.0
    const_i = trace256.with_values(np.full(trace256.m, 1j))
    assert boundary_violation(const_i, "T1") <= 1e-14
    const_1 = trace256.with_values(np.ones(trace256.m, dtype=complex))
    assert boundary_violation(const_1, "T1") == pytest.approx(1.0)


def test_boundary_violation_of_x(trace256):
    x_tr = trace256.with_values(weight_X(trace256.points))
    assert boundary_violation(x_tr, "T2") <= 1e-8
