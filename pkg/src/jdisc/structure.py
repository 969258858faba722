"""Matrix fields A(Z), conversion from real J fields, and test fixtures.

Real coordinates are ordered (x1, y1, ..., xn, yn), so the standard
structure J_st is block-diagonal with 2x2 rotation blocks and acts as
multiplication by i on the complexified vector.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .conformal import TriangleGeometry
from .errors import (InconsistentStructureError, InvalidArgumentError,
                     InvalidStructureError)

_ANTILINEAR_TOL = 1e-8


def j_standard(n: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n))
    for k in range(n):
        j[2 * k, 2 * k + 1] = -1.0
        j[2 * k + 1, 2 * k] = 1.0
    return j


def complex_to_real_vector(v: np.ndarray) -> np.ndarray:
    out = np.empty(2 * v.size)
    out[0::2] = v.real
    out[1::2] = v.imag
    return out


def real_to_complex_vector(x: np.ndarray) -> np.ndarray:
    return x[0::2] + 1j * x[1::2]


def real_matrix_of_antilinear(a: np.ndarray) -> np.ndarray:
    """Real 2n x 2n matrix of the anti-linear map v -> A conj(v)."""
    n = a.shape[0]
    m = np.empty((2 * n, 2 * n))
    for k in range(n):
        ek = np.zeros(n, dtype=np.complex128)
        ek[k] = 1.0
        m[:, 2 * k] = complex_to_real_vector(a @ ek)        # image of x_k
        m[:, 2 * k + 1] = complex_to_real_vector(a @ (-1j * ek))  # of y_k
    return m


@dataclass(frozen=True)
class RealJField:
    """Pointwise real 2n x 2n almost complex structure J(Z), J^2 = -I."""

    n: int
    evaluator: Callable[[np.ndarray], np.ndarray]  # Z in C^n -> (2n, 2n)

    def __call__(self, point: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(np.asarray(point)), dtype=float)


def a_from_j(jfield: RealJField, point: np.ndarray) -> np.ndarray:
    """Complex matrix A of J at a point.

    A represents the anti-linear operator (J_st + J)^{-1} (J_st - J); the
    taming of J is equivalent to spectral norm of A below 1.
    """
    jmat = jfield(point)
    n = jfield.n
    jst = j_standard(n)
    if np.linalg.norm(jmat @ jmat + np.eye(2 * n)) > 1e-8:
        raise InconsistentStructureError("J^2 != -I at the sample point")
    b = np.linalg.solve(jst + jmat, jst - jmat)
    if np.linalg.norm(b @ jst + jst @ b) > _ANTILINEAR_TOL * max(1.0, np.linalg.norm(b)):
        raise InconsistentStructureError(
            "extracted operator is not anti-linear; J is inconsistent")
    a = np.empty((n, n), dtype=np.complex128)
    for k in range(n):
        ek = np.zeros(n, dtype=np.complex128)
        ek[k] = 1.0
        a[:, k] = real_to_complex_vector(b @ complex_to_real_vector(ek))
    return a


def j_from_a(a: np.ndarray) -> np.ndarray:
    """Inverse of a_from_j: the tamed J with complex matrix A (||A|| < 1)."""
    a = np.asarray(a, dtype=np.complex128)
    if np.linalg.norm(a, 2) >= 1.0:
        raise InvalidArgumentError("complex matrix must have spectral norm < 1")
    n = a.shape[0]
    b = real_matrix_of_antilinear(a)
    jst = j_standard(n)
    return jst @ (np.eye(2 * n) - b) @ np.linalg.inv(np.eye(2 * n) + b)


@dataclass(frozen=True)
class StructureField:
    """Continuous matrix field A(Z) with declared support and norm bound.

    A vanishes for z outside the closed triangle and for |w - w_center|
    beyond w_radius (the cylinder is unbounded in w, but every fixture
    lives near its target point, which keeps probing finite).
    """

    dimension: int
    evaluator: Callable[[complex, np.ndarray], np.ndarray]
    norm_bound: float
    w_center: np.ndarray = field(default_factory=lambda: np.zeros(0))
    w_radius: float = 1.0
    name: str = "custom"

    def __call__(self, z: complex, w: np.ndarray) -> np.ndarray:
        return np.asarray(self.evaluator(complex(z), np.asarray(w)),
                          dtype=np.complex128)

    def evaluate_cells(self, z_vals: np.ndarray, w_vals: np.ndarray) -> np.ndarray:
        """Stacked A at per-cell points; w_vals has shape (ncells, n-1)."""
        out = np.empty((z_vals.size, self.dimension, self.dimension),
                       dtype=np.complex128)
        for k in range(z_vals.size):
            out[k] = self(z_vals[k], w_vals[k])
        return out


def _smoothstep(x: np.ndarray | float) -> np.ndarray | float:
    """Quintic smoothstep: 0 for x <= 0, 1 for x >= 1, C^2 in between."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0)


_EDGE_CUTOFF_WIDTH = 0.05


def _bump_profile(dist: float, radius: float) -> float:
    """1 on the inner half of the radius, smoothly 0 at the radius."""
    return float(_smoothstep(2.0 - 2.0 * dist / radius))


def _triangle_cutoff(z: complex) -> float:
    """Smooth factor forcing support inside the closed triangle."""
    if not TriangleGeometry.contains(np.complex128(z)):
        return 0.0
    depth = float(TriangleGeometry.boundary_distance(np.complex128(z)))
    return float(_smoothstep(depth / _EDGE_CUTOFF_WIDTH))


def _mixing_matrix(n: int) -> np.ndarray:
    """Unitary cyclic shift: off-diagonal for n >= 2, spectral norm 1."""
    return np.roll(np.eye(n), 1, axis=0).astype(np.complex128)


def builtin_field(name: str, dimension: int = 1, amplitude: float = 0.5,
                  center: tuple[complex, tuple] = (0.5j, ()),
                  radius: float = 0.2) -> StructureField:
    """Built-in cutoff-shaped fixtures: zero, diag_bump, coupled_bump."""
    if dimension < 1:
        raise InvalidArgumentError("dimension must be >= 1")
    if name == "zero":
        def zero_eval(z, w, _n=dimension):
            return np.zeros((_n, _n), dtype=np.complex128)
        return StructureField(dimension=dimension, evaluator=zero_eval,
                              norm_bound=0.0,
                              w_center=np.zeros(dimension - 1), name="zero")

    if not 0.0 <= amplitude < 1.0:
        raise InvalidArgumentError(
            f"amplitude must be in [0, 1), got {amplitude}")
    z_c = complex(center[0])
    w_c = np.asarray(center[1], dtype=np.complex128)
    if w_c.size == 0:
        w_c = np.zeros(dimension - 1, dtype=np.complex128)
    if w_c.size != dimension - 1:
        raise InvalidArgumentError("w center has wrong dimension")
    if name == "diag_bump":
        mix = np.eye(dimension, dtype=np.complex128)
    elif name == "coupled_bump":
        if dimension < 2:
            raise InvalidArgumentError("coupled_bump needs dimension >= 2")
        mix = _mixing_matrix(dimension)
    else:
        raise InvalidArgumentError(f"unknown builtin field {name!r}")

    def bump_eval(z, w, _amp=amplitude, _zc=z_c, _wc=w_c, _rho=radius, _mix=mix):
        dist = np.sqrt(abs(z - _zc) ** 2 + np.sum(np.abs(w - _wc) ** 2))
        chi = _bump_profile(dist, _rho) * _triangle_cutoff(z)
        return _amp * chi * _mix

    return StructureField(dimension=dimension, evaluator=bump_eval,
                          norm_bound=amplitude, w_center=w_c,
                          w_radius=radius, name=name)


def validate_structure(a_field: StructureField, probe_z: np.ndarray,
                       n_random_w: int = 32, seed: int = 0) -> float:
    """Max spectral norm over probe points; raises on norm/support violations.

    probe_z should cover the grid image points; w is sampled uniformly in
    the declared radius around the declared center plus the center itself.
    """
    rng = np.random.default_rng(seed)
    nw = a_field.dimension - 1
    w_samples = [a_field.w_center]
    for _ in range(n_random_w if nw > 0 else 0):
        d = rng.normal(size=nw) + 1j * rng.normal(size=nw)
        r = rng.uniform(0.0, a_field.w_radius)
        nrm = np.linalg.norm(d)
        w_samples.append(a_field.w_center + (r / nrm) * d if nrm > 0 else a_field.w_center)
    worst = 0.0
    for z in probe_z:
        for w in w_samples:
            nrm = np.linalg.norm(a_field(z, w), 2)
            worst = max(worst, float(nrm))
            if TriangleGeometry.distance(np.complex128(z)) > 1e-12 and nrm > 1e-12:
                raise InvalidStructureError(
                    f"A does not vanish outside the cylinder (z={z})")
    if worst >= 1.0 - 1e-6:
        raise InvalidStructureError(
            f"measured norm {worst:.6f} violates the bound a < 1")
    # Support check outside the triangle regardless of probe coverage.
    outside = np.array([2.0 + 0j, -2.0 + 0j, 1.0 + 1.0j, -0.5 - 0.3j])
    for z in outside:
        if np.linalg.norm(a_field(z, a_field.w_center), 2) > 1e-12:
            raise InvalidStructureError("A does not vanish outside the cylinder")
    return worst
