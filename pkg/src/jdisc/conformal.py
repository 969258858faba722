"""The triangle, the disc-to-triangle conformal map, and the retraction Psi.

The target is the open triangle {0 < Im z < 1 - |Re z|} with vertices
-1, 1, i and unit area.  The map Phi is represented explicitly in
Schwarz-Christoffel form with prevertices equal to the vertices:

    Phi'(zeta) = c (zeta-1)^{-3/4} (zeta+1)^{-3/4} (zeta-i)^{-1/2}

with the same exterior-ray branch discipline as the weight R, and
Phi(zeta) = Phi(-1) + c * integral along a path inside the closed disc.
The constant c is calibrated from Phi(1) = 1; Phi(i) = i then comes out
of the quadrature and is checked by the verification suite.

Segment integrals use the substitution tau = 1 - sigma^4, which removes
the algebraic endpoint singularities at the prevertices exactly, plus
dyadically graded Gauss-Legendre panels toward sigma = 0 for evaluation
points that come close to (but do not hit) a vertex.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, NumericError
from .grid import DiscGrid, build_grid
from .weights import delta_power as _delta_power

VERTICES = (-1.0 + 0j, 1.0 + 0j, 1j)

# Outward unit normals and offsets of the three sides (n . z <= b inside).
_SIDES = (
    ((0.0, -1.0), 0.0),                       # bottom [-1, 1]
    ((1.0 / np.sqrt(2), 1.0 / np.sqrt(2)), 1.0 / np.sqrt(2)),   # right [1, i]
    ((-1.0 / np.sqrt(2), 1.0 / np.sqrt(2)), 1.0 / np.sqrt(2)),  # left [i, -1]
)

_SEGMENTS = ((-1.0 + 0j, 1.0 + 0j), (1.0 + 0j, 1j), (1j, -1.0 + 0j))


class TriangleGeometry:
    """Convex geometry of the target triangle (area exactly 1)."""

    vertices = VERTICES
    area = 1.0

    @staticmethod
    def contains(z, tol: float = 0.0):
        z = np.asarray(z, dtype=np.complex128)
        ok = np.ones(z.shape, dtype=bool)
        for (nx, ny), b in _SIDES:
            ok &= nx * z.real + ny * z.imag <= b + tol
        return ok

    @staticmethod
    def _segment_distance(z, a: complex, b: complex):
        d = b - a
        t = np.clip(((z - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
        return np.abs(z - (a + t * d))

    @classmethod
    def boundary_distance(cls, z):
        """Distance to the triangle boundary (from either side)."""
        z = np.asarray(z, dtype=np.complex128)
        return np.min([cls._segment_distance(z, a, b) for a, b in _SEGMENTS],
                      axis=0)

    @classmethod
    def distance(cls, z):
        """Distance to the closed triangle; 0 for interior points."""
        z = np.asarray(z, dtype=np.complex128)
        d = cls.boundary_distance(z)
        return np.where(cls.contains(z), 0.0, d)

    @staticmethod
    def exit_point(z0: complex, z: complex) -> complex:
        """Unique intersection of the segment [z0, z] with the boundary.

        Requires z0 strictly inside and z outside the closed triangle.
        """
        d = z - z0
        s_min = np.inf
        for (nx, ny), b in _SIDES:
            nd = nx * d.real + ny * d.imag
            if nd > 0.0:
                s = (b - (nx * z0.real + ny * z0.imag)) / nd
                if 0.0 <= s < s_min:
                    s_min = s
        if not np.isfinite(s_min) or s_min > 1.0 + 1e-12:
            raise NumericError("segment does not exit the triangle")
        return z0 + min(s_min, 1.0) * d


def _graded_gl_nodes(levels: int = 14, order: int = 16):
    """GL nodes/weights on [0,1], panels graded dyadically toward 0."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = [0.0] + [2.0 ** (-k) for k in range(levels, -1, -1)]
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes.append(mid + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


class ConformalMap:
    """Phi: disc -> triangle, with derivative, inverse, and retraction."""

    def __init__(self, seed_grid_n: int = 32):
        self._sigma, self._wsigma = _graded_gl_nodes()
        # Segment 0 -> zeta via tau = 1 - sigma^4 (endpoint substitution).
        self._tau = 1.0 - self._sigma ** 4
        self._wtau = self._wsigma * 4.0 * self._sigma ** 3
        sigma_a = self._int_minus1_to_0()
        sigma_b = complex(self._segment_integral(np.array([1.0 + 0j]))[0])
        self.c = 2.0 / (sigma_a + sigma_b)
        self.phi0 = -1.0 + self.c * sigma_a
        self.triangle = TriangleGeometry()
        self._grid_cache: dict[int, np.ndarray] = {}
        seeds = build_grid(seed_grid_n).cells
        self._seed_points = seeds
        self._seed_images = self.phi(seeds)

    # -- Schwarz-Christoffel integrand ------------------------------------

    @staticmethod
    def _sc_from_deltas(d_p1, d_m1, d_i):
        """SC product from precomputed zeta - 1, zeta + 1, zeta - i.

        Taking the deltas as inputs lets quadrature rules form them
        without catastrophic cancellation right at a prevertex.
        """
        return (_delta_power(d_p1, 1.0, -0.75)
                * _delta_power(d_m1, -1.0, -0.75)
                * _delta_power(d_i, 1j, -0.5))

    @classmethod
    def sc_product(cls, z):
        """The derivative without the constant c."""
        z = np.asarray(z, dtype=np.complex128)
        return cls._sc_from_deltas(z - 1.0, z + 1.0, z - 1j)

    def phi_prime(self, z):
        """Closed-form Phi'(zeta); diverges at the prevertices."""
        z = np.asarray(z, dtype=np.complex128)
        if np.any(np.min(np.abs(z[..., None] - np.array(VERTICES)), axis=-1)
                  < 1e-14):
            raise InvalidArgumentError("Phi' is infinite at the prevertices")
        return self.c * self.sc_product(z)

    def _int_minus1_to_0(self) -> complex:
        # t = -1 + s^4 kills the (t+1)^{-3/4} endpoint singularity.
        s4 = self._sigma ** 4
        vals = self._sc_from_deltas(s4 - 2.0, s4, -1.0 + s4 - 1j)
        vals *= 4.0 * self._sigma ** 3
        return complex(np.sum(self._wsigma * vals))

    def _segment_integral(self, zeta: np.ndarray) -> np.ndarray:
        """int_0^zeta of the SC product along the straight segment.

        Parametrized by tau = 1 - sigma^4; the factor deltas are formed as
        (zeta - v) - zeta sigma^4 so they stay exact when zeta is a vertex.
        """
        shrink = -(self._sigma ** 4)[None, :] * zeta[:, None]
        d_p1 = (zeta - 1.0)[:, None] + shrink
        d_m1 = (zeta + 1.0)[:, None] + shrink
        d_i = (zeta - 1j)[:, None] + shrink
        vals = self._sc_from_deltas(d_p1, d_m1, d_i)
        return (vals @ self._wtau) * zeta

    # -- map, inverse, retraction -----------------------------------------

    def phi(self, z):
        """Phi(zeta) for zeta in the closed disc (scalar or array)."""
        scalar = np.isscalar(z) or np.ndim(z) == 0
        zeta = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
        if np.any(np.abs(zeta) > 1.0 + 1e-10):
            raise InvalidArgumentError("Phi is defined on the closed disc only")
        r = np.abs(zeta)
        zeta = np.where(r > 1.0, zeta / np.maximum(r, 1.0), zeta)
        out = self.phi0 + self.c * self._segment_integral(zeta)
        out = out.reshape(np.shape(z)) if not scalar else out
        return complex(out[0]) if scalar else out

    def phi_grid(self, grid: DiscGrid) -> np.ndarray:
        cached = self._grid_cache.get(grid.n)
        if cached is None:
            cached = self.phi(grid.cells)
            self._grid_cache[grid.n] = cached
        return cached

    def phi_inverse(self, z, tol: float = 1e-8, max_iter: int = 100):
        """Newton inversion seeded from the cached grid image."""
        scalar = np.isscalar(z) or np.ndim(z) == 0
        zs = np.atleast_1d(np.asarray(z, dtype=np.complex128)).ravel()
        if np.any(TriangleGeometry.distance(zs) > 1e-10):
            raise InvalidArgumentError("phi_inverse requires points of the closed triangle")
        out = np.empty_like(zs)
        for i, target in enumerate(zs):
            out[i] = self._invert_one(complex(target), tol, max_iter)
        return complex(out[0]) if scalar else out.reshape(np.shape(z))

    def _invert_one(self, target: complex, tol: float, max_iter: int) -> complex:
        for v in VERTICES:
            if abs(target - v) < 1e-12:
                return v
        k = int(np.argmin(np.abs(self._seed_images - target)))
        zeta = complex(self._seed_points[k])
        err = abs(self.phi(zeta) - target)
        for _ in range(max_iter):
            if err <= tol:
                return zeta
            step = -(self.phi(zeta) - target) / self.phi_prime(np.complex128(zeta))
            lam = 1.0
            for _ in range(25):
                cand = zeta + lam * complex(step)
                if abs(cand) > 1.0:
                    cand /= abs(cand)
                cand_err = abs(self.phi(cand) - target)
                if cand_err < err:
                    zeta, err = cand, cand_err
                    break
                lam *= 0.5
            else:
                # Newton stalled: bisect toward the best seed neighbor.
                zeta, err = self._bisect_fallback(zeta, target, err)
        if err <= tol:
            return zeta
        raise NumericError(
            f"phi_inverse failed to reach {tol:.1e} (residual {err:.2e})")

    def _bisect_fallback(self, zeta: complex, target: complex, err: float):
        best, best_err = zeta, err
        span = 0.25
        for _ in range(40):
            for d in (1, -1, 1j, -1j, 1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j):
                cand = best + span * d * 0.1
                if abs(cand) > 1.0:
                    cand /= abs(cand)
                e = abs(self.phi(cand) - target)
                if e < best_err:
                    best, best_err = cand, e
            span *= 0.5
            if best_err < err * 0.5:
                break
        return best, best_err

    def psi(self, z: complex, z0: complex) -> complex:
        """Retraction of the plane onto the closed disc through Phi^{-1}.

        Points of the closed triangle map by Phi^{-1}; exterior points
        first project to the unique exit of the segment [z0, z].
        """
        z0 = complex(z0)
        if TriangleGeometry.distance(z0) > 0.0 or \
                TriangleGeometry.boundary_distance(np.complex128(z0)) < 1e-12:
            raise InvalidArgumentError("z0 must lie strictly inside the triangle")
        z = complex(z)
        if TriangleGeometry.distance(np.complex128(z)) <= 1e-10:
            return complex(self.phi_inverse(self._clamp_to_triangle(z)))
        exit_pt = TriangleGeometry.exit_point(z0, z)
        return complex(self.phi_inverse(self._clamp_to_triangle(exit_pt)))

    @staticmethod
    def _clamp_to_triangle(z: complex) -> complex:
        """Pull a point within 1e-10 slack exactly into the closed triangle."""
        if TriangleGeometry.contains(np.complex128(z)):
            return z
        x, y = z.real, z.imag
        y = max(y, 0.0)
        over_r = (x + y - 1.0) / 2.0
        if over_r > 0:
            x, y = x - over_r, y - over_r
        over_l = (-x + y - 1.0) / 2.0
        if over_l > 0:
            x, y = x + over_l, y - over_l
        return complex(x, max(y, 0.0))
