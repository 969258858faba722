"""Weights R and X and the weighted operators T_1, T_2, S_1, S_2.

The weighted Cauchy-Green transform is

    T_Q f(zeta) = Q(zeta) * ( T(f/Q)(zeta)
                              + zeta^{-1} * conj(T(f/Q)(1/conj(zeta))) )

with Q = zeta - 1 (j=1) or Q = R (j=2).  The reflected term is carried
as its own exact per-cell integral

    J1(cell, zeta) = int_cell dA(t) / (conj(t) zeta - 1)
                   = conj(I1(cell, 1/conj(zeta))) / zeta,

and S_j = d/dzeta T_j differentiates both kernels analytically (never by
finite differences):

    J2 = dJ1/dzeta = -conj(I1(eta) + eta I2(eta)) / zeta^2,  eta = 1/conj(zeta).

Each fractional-power factor of R carries a branch cut along the ray
pointing radially outward from the disc at its marked point, so R is
continuous on the closed disc; the global phase is pinned by
R(0) = exp(3 pi i / 4).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .cauchy import DEFAULT_MEMORY_CAP, _rows_per_block, perturb_off_lattice
from .errors import InvalidArgumentError, ResourceLimitError
from .grid import ARC_1, ARC_2, ARC_3, BoundaryTrace, DiscGrid, GridFunction

_ZERO_EPS = 1e-13
_MARKED_EPS = 1e-14


def delta_power(delta, z0: complex, alpha: float):
    """delta^alpha with the cut along the ray from z0 radially outward.

    delta stands for z - z0 with z0 on the unit circle, so the cut avoids
    the closed disc.  Quadrature code passes delta formed exactly.
    """
    delta = np.asarray(delta, dtype=np.complex128)
    phi0 = np.angle(z0)
    # angle measured so its jump sits at direction phi0 from z0 (outward)
    w = -delta * np.exp(-1j * phi0)
    theta = phi0 - np.pi + np.angle(w)
    return np.abs(delta) ** alpha * np.exp(1j * alpha * theta)


def branch_power(z, z0: complex, alpha: float):
    """(z - z0)^alpha with the exterior-ray branch cut (see delta_power)."""
    return delta_power(np.asarray(z, dtype=np.complex128) - z0, z0, alpha)


def _r_product(z):
    return (branch_power(z, 1.0, 0.25)
            * branch_power(z, -1.0, 0.25)
            * branch_power(z, 1j, 0.5))


# Global phase pinned by R(0) = exp(3 pi i / 4).
_R_PHASE = np.exp(0.75j * np.pi) / _r_product(np.complex128(0.0))


def weight_R(z):
    """The weight R(zeta); exactly 0 at the marked points 1, -1, i."""
    return _R_PHASE * _r_product(z)


def weight_R_prime(z):
    """R'(zeta) = R * (1/4/(z-1) + 1/4/(z+1) + 1/2/(z-i))."""
    z = np.asarray(z, dtype=np.complex128)
    return weight_R(z) * (0.25 / (z - 1.0) + 0.25 / (z + 1.0) + 0.5 / (z - 1j))


def weight_X(z):
    """X(zeta) = R(zeta)/sqrt(zeta) on the unit circle.

    sqrt uses the branch cut along the positive real line with
    sqrt(-1) = i; arg X is constant on each of the three arcs (mod pi).
    """
    scalar = np.isscalar(z) or np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if np.any(np.abs(np.abs(z) - 1.0) > 1e-10):
        raise InvalidArgumentError("X is defined on the unit circle only")
    if np.any(np.min(np.abs(z[:, None] - np.array([1.0, -1.0, 1j])), axis=1)
              < _MARKED_EPS):
        raise InvalidArgumentError("X is undefined at the marked points 1, -1, i")
    theta = np.mod(np.angle(z), 2.0 * np.pi)
    sqrt_z = np.exp(0.5j * theta)
    out = weight_R(z) / sqrt_z
    return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class WeightSpec:
    """One of the two admissible weights with its marked-point data."""

    kind: str  # "Q1" or "Q2"

    def q(self, z):
        z = np.asarray(z, dtype=np.complex128)
        return z - 1.0 if self.kind == "Q1" else weight_R(z)

    def q_prime(self, z):
        z = np.asarray(z, dtype=np.complex128)
        if self.kind == "Q1":
            return np.ones_like(z)
        return weight_R_prime(z)

    @property
    def marked_points(self):
        return ((1.0,), (0.25,)) if self.kind == "Q1" else \
            ((1.0, -1.0, 1j), (0.25, 0.25, 0.5))


def weight_spec(j: int) -> WeightSpec:
    if j not in (1, 2):
        raise InvalidArgumentError(f"weight index must be 1 or 2, got {j}")
    return WeightSpec("Q1" if j == 1 else "Q2")


def _reflected_kernels(grid: DiscGrid, zeta: np.ndarray, want_i2: bool):
    """J1 (and J2) blocks at the given evaluation points."""
    n = grid.ncells
    j1 = np.empty((zeta.size, n), dtype=np.complex128)
    j2 = np.empty((zeta.size, n), dtype=np.complex128) if want_i2 else None
    nz = np.abs(zeta) > _ZERO_EPS
    if nz.any():
        zt = zeta[nz]
        eta = perturb_off_lattice(1.0 / np.conj(zt), grid)
        i1r, i2r = kernels.cell_integrals(grid.cells, grid.h, eta, want_i2)
        j1[nz] = np.conj(i1r) / zt[:, None]
        if want_i2:
            j2[nz] = -np.conj(i1r + eta[:, None] * i2r) / (zt ** 2)[:, None]
    if (~nz).any():
        # Removable singularity at zeta = 0: J1 -> -h^2, J2 -> -conj(t_k) h^2.
        j1[~nz] = -grid.cell_area
        if want_i2:
            j2[~nz] = -np.conj(grid.cells)[None, :] * grid.cell_area
    return j1, j2


def weighted_blocks(grid: DiscGrid, evals: np.ndarray, spec: WeightSpec, op: str):
    """Yield (row_slice, Wa, Wb) acting on g = f / Q(cells):

    (T_Q f)(zeta_j) = sum_k Wa[j,k] g_k + Wb[j,k] conj(g_k)   (op "T")
    and likewise with the differentiated kernels for op "S".
    """
    if op not in ("T", "S"):
        raise InvalidArgumentError(f"op must be 'T' or 'S', got {op!r}")
    evals = perturb_off_lattice(evals, grid)
    want_i2 = op == "S"
    scale = -1.0 / np.pi
    step = _rows_per_block(grid.ncells)
    for lo in range(0, evals.size, step):
        zeta = evals[lo:lo + step]
        i1, i2 = kernels.cell_integrals(grid.cells, grid.h, zeta, want_i2)
        j1, j2 = _reflected_kernels(grid, zeta, want_i2)
        qz = spec.q(zeta)[:, None]
        if op == "T":
            wa = scale * qz * i1
            wb = scale * qz * j1
        else:
            qpz = spec.q_prime(zeta)[:, None]
            wa = scale * (qpz * i1 + qz * i2)
            wb = scale * (qpz * j1 + qz * j2)
        yield slice(lo, lo + zeta.size), wa, wb


def _apply_streamed(grid: DiscGrid, evals: np.ndarray, spec: WeightSpec,
                    op: str, values: np.ndarray) -> np.ndarray:
    g = values / (spec.q(grid.cells) if values.ndim == 1
                  else spec.q(grid.cells)[:, None])
    gc = np.conj(g)
    out = np.empty((evals.size,) + values.shape[1:], dtype=np.complex128)
    for sl, wa, wb in weighted_blocks(grid, evals, spec, op):
        out[sl] = wa @ g + wb @ gc
    return out


def _check_closed_disc(evals: np.ndarray):
    if np.any(np.abs(evals) > 1.0 + 1e-10):
        raise InvalidArgumentError("weighted transforms are evaluated on the closed disc only")


def weighted_cg(j: int, f: GridFunction, evals) -> np.ndarray:
    """T_j f at points of the closed disc."""
    evals = np.atleast_1d(np.asarray(evals, dtype=np.complex128))
    _check_closed_disc(evals)
    return _apply_streamed(f.grid, evals, weight_spec(j), "T", f.values)


def weighted_beurling(j: int, f: GridFunction) -> GridFunction:
    """S_j f = d/dzeta T_j f at the grid cells (principal value)."""
    out = _apply_streamed(f.grid, f.grid.cells, weight_spec(j), "S", f.values)
    return GridFunction(f.grid, out)


def weighted_beurling_multi(grid: DiscGrid, jobs) -> list[np.ndarray]:
    """Apply S_j for several (j, values) jobs in one kernel sweep.

    The O(cells^2) kernel blocks are shared across jobs, which matters at
    large n where the matrices are never stored.
    """
    specs = [weight_spec(j) for j, _ in jobs]
    gs = [vals / specs[i].q(grid.cells) for i, (_, vals) in enumerate(jobs)]
    outs = [np.empty(grid.ncells, dtype=np.complex128) for _ in jobs]
    evals = perturb_off_lattice(grid.cells, grid)
    step = _rows_per_block(grid.ncells)
    scale = -1.0 / np.pi
    for lo in range(0, evals.size, step):
        zeta = evals[lo:lo + step]
        i1, i2 = kernels.cell_integrals(grid.cells, grid.h, zeta, True)
        j1, j2 = _reflected_kernels(grid, zeta, True)
        for i, spec in enumerate(specs):
            qz = spec.q(zeta)[:, None]
            qpz = spec.q_prime(zeta)[:, None]
            wa = scale * (qpz * i1 + qz * i2)
            wb = scale * (qpz * j1 + qz * j2)
            outs[i][lo:lo + zeta.size] = wa @ gs[i] + wb @ np.conj(gs[i])
    return outs


@dataclass(frozen=True)
class WeightedMatrices:
    """Dense T_j / S_j weights at fixed evaluation points, built once.

    Matrices act on g = f / Q(cells); apply_* fold that quotient in.
    """

    grid: DiscGrid
    spec: WeightSpec
    evals: np.ndarray
    t_a: np.ndarray | None
    t_b: np.ndarray | None
    s_a: np.ndarray | None
    s_b: np.ndarray | None

    def _quotient(self, values: np.ndarray) -> np.ndarray:
        q = self.spec.q(self.grid.cells)
        return values / (q if values.ndim == 1 else q[:, None])

    def apply_t(self, values: np.ndarray) -> np.ndarray:
        g = self._quotient(values)
        return self.t_a @ g + self.t_b @ np.conj(g)

    def apply_s(self, values: np.ndarray) -> np.ndarray:
        g = self._quotient(values)
        return self.s_a @ g + self.s_b @ np.conj(g)


def build_weighted_matrices(grid: DiscGrid, j: int, evals,
                            ops: tuple[str, ...] = ("T", "S"),
                            memory_cap: int = DEFAULT_MEMORY_CAP) -> WeightedMatrices:
    evals = np.atleast_1d(np.asarray(evals, dtype=np.complex128))
    _check_closed_disc(evals)
    need = 16 * evals.size * grid.ncells * 2 * len(ops)
    if need > memory_cap:
        raise ResourceLimitError(
            f"weighted matrices need {need / 1e9:.2f} GB > cap "
            f"{memory_cap / 1e9:.2f} GB; lower n or stream instead")
    spec = weight_spec(j)
    mats = {}
    for op in ops:
        wa = np.empty((evals.size, grid.ncells), dtype=np.complex128)
        wb = np.empty_like(wa)
        for sl, ba, bb in weighted_blocks(grid, evals, spec, op):
            wa[sl] = ba
            wb[sl] = bb
        mats[op] = (wa, wb)
    ta, tb = mats.get("T", (None, None))
    sa, sb = mats.get("S", (None, None))
    return WeightedMatrices(grid=grid, spec=spec, evals=evals,
                            t_a=ta, t_b=tb, s_a=sa, s_b=sb)


_ARC_ROTATION = {ARC_1: 1.0 + 1j, ARC_2: 1.0 - 1j, ARC_3: 1.0 + 0j}


def boundary_violation(trace: BoundaryTrace, kind: str) -> float:
    """Deviation of boundary values from the prescribed lines.

    kind "T1": values must be purely imaginary (max |Re g|).
    kind "T2": per-arc rotated imaginary parts, c = 1+i on arc 1, 1-i on
    arc 2, 1 on arc 3.  Normalized by max(1, sup |g|).
    """
    if trace.values is None:
        raise InvalidArgumentError("trace carries no values")
    g = trace.values
    if kind == "T1":
        dev = np.abs(g.real)
    elif kind == "T2":
        rot = np.array([_ARC_ROTATION[a] for a in trace.arcs])
        dev = np.abs((rot * g).imag)
    else:
        raise InvalidArgumentError(f"kind must be 'T1' or 'T2', got {kind!r}")
    return float(dev.max(initial=0.0) / max(1.0, np.abs(g).max(initial=0.0)))
