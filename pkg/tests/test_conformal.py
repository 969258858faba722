import numpy as np
import pytest

from jdisc import build_grid, boundary_trace
from jdisc.conformal import ConformalMap, TriangleGeometry, VERTICES
from jdisc.errors import InvalidArgumentError
from jdisc.grid import ARC_3, lp_norm
from jdisc.weights import delta_power


def independent_phi0(cmap):
    """Phi(0) by a single high-order rule instead of graded panels.

    The s^4 substitutions make the integrands smooth, so one
    Gauss-Legendre rule of order 600 resolves them to machine precision
    independently of the panel layout the production code uses.
    """
    x, w = np.polynomial.legendre.leggauss(600)
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    s4 = s ** 4
    jac = 4.0 * s ** 3
    # t = -1 + s^4 along [-1, 0]
    vals = (delta_power(s4 - 2.0, 1.0, -0.75) * delta_power(s4, -1.0, -0.75)
            * delta_power(-1.0 + s4 - 1j, 1j, -0.5)) * jac
    sigma_a = np.sum(ws * vals)
    # t = 1 - s^4 along [0, 1]
    vals = (delta_power(-s4, 1.0, -0.75) * delta_power(2.0 - s4, -1.0, -0.75)
            * delta_power(1.0 - s4 - 1j, 1j, -0.5)) * jac
    sigma_b = np.sum(ws * vals)
    c = 2.0 / (sigma_a + sigma_b)
    return -1.0 + c * sigma_a


def test_vertex_normalization(cmap):
    for v in VERTICES:
        assert abs(cmap.phi(v) - v) <= 1e-6


def test_phi_at_zero_imaginary(cmap):
    val = cmap.phi(0.0)
    assert abs(val.real) <= 1e-6
    assert 0.0 < val.imag < 1.0
    assert abs(val - independent_phi0(cmap)) <= 1e-6


def test_gamma3_maps_to_bottom_side(cmap, trace256):
    pts = trace256.points[trace256.arcs == ARC_3]
    assert np.max(np.abs(cmap.phi(pts).imag)) <= 1e-4


def test_phi_image_in_closed_triangle(cmap, grid32):
    assert np.max(TriangleGeometry.distance(cmap.phi_grid(grid32))) == 0.0


def test_phi_rejects_exterior(cmap):
    with pytest.raises(InvalidArgumentError):
        cmap.phi(1.5 + 0j)


def test_phi_prime_corner_exponent(cmap):
    vals = []
    for r in (1e-2, 1e-4):
        vals.append(abs(cmap.phi_prime(np.complex128(1.0 - r))))
    measured = np.log(vals[1] / vals[0]) / np.log(1e-4 / 1e-2)
    assert measured == pytest.approx(-0.75, rel=0.05)


def test_phi_prime_lp_norm_stable(cmap):
    norms = []
    for n in (64, 128):
        grid = build_grid(n)
        norms.append(lp_norm(cmap.phi_prime(grid.cells), 2.2, grid))
    assert abs(norms[1] - norms[0]) / norms[0] <= 0.05


def test_phi_prime_direction_constant_on_gamma3(cmap):
    theta = np.linspace(1.05 * np.pi, 1.95 * np.pi, 400)
    zeta = np.exp(1j * theta)
    # d/dtheta Phi = i zeta Phi'; its argument is constant along a side
    args = np.unwrap(np.angle(1j * zeta * cmap.phi_prime(zeta)))
    assert np.max(np.abs(np.diff(args))) <= 1e-3


def test_phi_prime_rejects_prevertex(cmap):
    with pytest.raises(InvalidArgumentError):
        cmap.phi_prime(np.complex128(1.0))


def test_phi_inverse_roundtrip(cmap):
    for zeta in (0.3 + 0.1j, -0.5 + 0.2j, 0.0, 0.7 - 0.4j):
        z = cmap.phi(zeta)
        assert abs(cmap.phi_inverse(z) - zeta) <= 1e-6


def test_phi_inverse_vertices(cmap):
    assert cmap.phi_inverse(1.0 + 0j) == 1.0 + 0j


def test_phi_inverse_symmetry_axis(cmap):
    zeta = cmap.phi_inverse(0.5j)
    assert abs(zeta.real) <= 1e-6
    assert 0.0 < zeta.imag < 1.0


def test_phi_inverse_rejects_exterior(cmap):
    with pytest.raises(InvalidArgumentError):
        cmap.phi_inverse(2.0 + 0j)


def test_psi_interior_is_inverse(cmap):
    for z in (0.2 + 0.3j, 0.5j, -0.4 + 0.1j):
        assert abs(cmap.psi(z, 0.5j) - cmap.phi_inverse(z)) <= 1e-12


def test_psi_segment_exit(cmap):
    # segment [i/2, 2] leaves the triangle at 2/3 + i/3
    got = cmap.psi(2.0, 0.5j)
    assert abs(got - cmap.phi_inverse(2.0 / 3.0 + 1j / 3.0)) <= 1e-8


def test_psi_boundary_continuity(cmap):
    z = 0.25 + 0.75j  # on the right side x + y = 1
    inner = cmap.psi(z, 0.5j)
    outer = cmap.psi(z + 1e-12 * (1 + 1j), 0.5j)
    assert abs(inner - outer) <= 1e-8


def test_psi_requires_interior_z0(cmap):
    with pytest.raises(InvalidArgumentError):
        cmap.psi(0.2 + 0.2j, 2.0 + 0j)


def test_triangle_geometry():
    assert TriangleGeometry.area == 1.0
    assert TriangleGeometry.contains(np.complex128(0.5j))
    assert not TriangleGeometry.contains(np.complex128(2.0 + 0j))
    assert TriangleGeometry.distance(np.complex128(2.0 + 0j)) == \
        pytest.approx(1.0)
    exit_pt = TriangleGeometry.exit_point(0.5j, 2.0 + 0j)
    assert exit_pt == pytest.approx(2.0 / 3.0 + 1j / 3.0)
