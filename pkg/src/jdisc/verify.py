"""Quantitative checks of every conclusion the solved disc must satisfy.

Two independent area computations are kept deliberately: the boundary
Stokes sum and the interior Jacobian sum agree only if the discrete
boundary behavior is right, which substitutes for the low-regularity
Stokes argument of the continuum proof.
"""
from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .conformal import TriangleGeometry
from .errors import InvalidArgumentError, NumericError
from .grid import GridFunction, lp_norm
from .solver import DiscSolution
from .structure import StructureField
from .weights import (boundary_violation, weighted_beurling,
                      weighted_beurling_multi, weighted_cg)

AREA_CENTER = 0.5j  # reference interior point for winding


@dataclass(frozen=True)
class Diagnostics:
    """Flat record of every verification quantity for one solution."""

    cr_residual_p: float
    area_stokes: float
    area_jacobian: float
    area_w_boundary: float
    boundary_violation_t1: float
    boundary_violation_t2: float
    containment_margin: float
    trace_boundary_dist: float
    degree: int
    tau_re: float
    tau_im: float
    tau_abs: float
    z_at_tau_error: float
    w_at_tau_error: float
    inner_iters: int
    outer_iters: int
    contraction_ratio: float
    y_norm_p: float
    apriori_bound: float
    s_emp_1: float
    s_emp_2: float
    converged: bool

    def to_flat_dict(self) -> dict:
        return {k: (v if not isinstance(v, (np.floating, np.integer, np.bool_))
                    else v.item()) for k, v in asdict(self).items()}


def cr_residual(sol: DiscSolution, a_field: StructureField, p: float) -> float:
    """L^p residual of (u; v) = A(z, w) conj(S_2 u + Phi'; S_1 v)."""
    ws = sol.workspace
    n = a_field.dimension
    zeta_deriv = np.empty((sol.grid.ncells, n), dtype=np.complex128)
    zeta_deriv[:, 0] = ws.w2.apply_s(sol.u) + ws.phi_prime_grid
    if n > 1:
        zeta_deriv[:, 1:] = ws.w1.apply_s(sol.v)
    a_cells = a_field.evaluate_cells(sol.z_grid, sol.w_grid)
    rhs = np.einsum("kij,kj->ki", a_cells, np.conj(zeta_deriv))
    y = np.concatenate([sol.u[:, None], sol.v], axis=1)
    return lp_norm(y - rhs, p, sol.grid)


def _stokes_sum(trace_vals: np.ndarray) -> float:
    """(i/2) oint g d(conj g) over the closed sample polyline (trapezoid)."""
    g = np.append(trace_vals, trace_vals[0])
    mid = 0.5 * (g[1:] + g[:-1])
    return float((0.5j * np.sum(mid * np.diff(np.conj(g)))).real)


def area_report(sol: DiscSolution) -> tuple[float, float]:
    """(area_stokes, area_jacobian).

    Stokes: boundary trapezoid sum over the z trace plus the w traces
    (whose contribution must be near 0 since Re w is constant on the
    circle).  The z polyline is augmented with the exact values at the
    three corner pre-images 1, i, -1: the weight of T_2 vanishes there,
    so z equals the triangle vertex and the otherwise O(m^{-1/2})
    corner-clipping error of the trapezoid sum disappears.  Jacobian:
    cell sum of |z_zeta|^2 - |z_zetabar|^2 plus the matching w terms.
    """
    ws = sol.workspace
    corners = np.array([1.0 + 0j, 1j, -1.0 + 0j])
    z_corner = (weighted_cg(2, GridFunction(sol.grid, sol.u), corners)
                + ws.cmap.phi(corners))
    q = sol.trace.m // 4
    poly = np.concatenate([[z_corner[0]], sol.z_trace[:q], [z_corner[1]],
                           sol.z_trace[q:2 * q], [z_corner[2]],
                           sol.z_trace[2 * q:]])
    area_b = _stokes_sum(poly)
    for j in range(sol.w_trace.shape[1]):
        area_b += _stokes_sum(sol.w_trace[:, j])
    # The |Phi'|^2 part integrates to the triangle area exactly, and its
    # midpoint cell sum loses O(h^{1/2}) to the corner singularities, so
    # only the density-dependent corrections are discretized.
    z_zeta = ws.w2.apply_s(sol.u) + ws.phi_prime_grid
    dens = (np.abs(z_zeta) ** 2 - np.abs(ws.phi_prime_grid) ** 2
            - np.abs(sol.u) ** 2)
    if sol.v.shape[1] > 0:
        sv = ws.w1.apply_s(sol.v)
        dens = dens + np.sum(np.abs(sv) ** 2 - np.abs(sol.v) ** 2, axis=1)
    area_j = float(TriangleGeometry.area + np.sum(dens) * sol.grid.cell_area)
    return area_b, area_j


def w_boundary_area(sol: DiscSolution) -> float:
    """Absolute w contribution to the boundary Stokes sum (should be ~0)."""
    return float(abs(sum(_stokes_sum(sol.w_trace[:, j])
                         for j in range(sol.w_trace.shape[1]))))


def winding_degree(trace_vals: np.ndarray, about: complex = AREA_CENTER) -> int:
    """Winding number of the closed sample polyline about a point."""
    rel = np.asarray(trace_vals, dtype=np.complex128) - about
    if np.min(np.abs(rel)) < 1e-6:
        raise NumericError("trace passes through the winding center; degree indeterminate")
    rel = np.append(rel, rel[0])
    increments = np.angle(rel[1:] / rel[:-1])
    total = float(np.sum(increments))
    return int(np.rint(total / (2.0 * np.pi)))


def containment_margin(z_vals: np.ndarray) -> float:
    """Max distance of the sampled z image from the closed triangle."""
    return float(np.max(TriangleGeometry.distance(z_vals), initial=0.0))


def isometry_defect(f: GridFunction, j: int) -> float:
    """| ||S_j f||_2 - ||f||_2 | / ||f||_2 for compactly supported smooth f."""
    norm_f = lp_norm(f, 2.0)
    if norm_f == 0.0:
        raise InvalidArgumentError("isometry defect of the zero function is undefined")
    sf = weighted_beurling(j, f)
    return abs(lp_norm(sf, 2.0) - norm_f) / norm_f


def isometry_defects_shared(f: GridFunction) -> tuple[float, float]:
    """Both defects in one kernel sweep (the cheap path at large n)."""
    norm_f = lp_norm(f, 2.0)
    if norm_f == 0.0:
        raise InvalidArgumentError("isometry defect of the zero function is undefined")
    s1f, s2f = weighted_beurling_multi(f.grid, [(1, f.values), (2, f.values)])
    return (abs(lp_norm(s1f, 2.0, f.grid) - norm_f) / norm_f,
            abs(lp_norm(s2f, 2.0, f.grid) - norm_f) / norm_f)


def diagnose(sol: DiscSolution, a_field: StructureField) -> Diagnostics:
    """Fill the full diagnostics record for a solution (stored on it too)."""
    ws = sol.workspace
    p = sol.params.p
    area_b, area_j = area_report(sol)

    t2_trace = sol.trace.with_values(sol.z_trace - ws.phi_trace)
    bv_t2 = boundary_violation(t2_trace, "T2")
    if sol.w_trace.shape[1] > 0:
        bv_t1 = max(
            boundary_violation(
                sol.trace.with_values(sol.w_trace[:, j] - sol.w0[j]), "T1")
            for j in range(sol.w_trace.shape[1]))
    else:
        bv_t1 = 0.0

    z_at_tau = complex(weighted_cg(2, GridFunction(sol.grid, sol.u), [sol.tau])[0]
                       + ws.cmap.phi(sol.tau))
    if sol.v.shape[1] > 0:
        t1v_tau = weighted_cg(1, GridFunction(sol.grid, sol.v), [sol.tau])[0]
        w_at_tau = t1v_tau - t1v_tau + sol.w0  # same quadrature both places
        w_err = float(np.max(np.abs(w_at_tau - sol.w0), initial=0.0))
    else:
        w_err = 0.0

    diag = Diagnostics(
        cr_residual_p=cr_residual(sol, a_field, p),
        area_stokes=area_b,
        area_jacobian=area_j,
        area_w_boundary=w_boundary_area(sol),
        boundary_violation_t1=bv_t1,
        boundary_violation_t2=bv_t2,
        containment_margin=containment_margin(sol.z_grid),
        trace_boundary_dist=float(np.max(
            TriangleGeometry.boundary_distance(sol.z_trace), initial=0.0)),
        degree=winding_degree(sol.z_trace),
        tau_re=float(sol.tau.real),
        tau_im=float(sol.tau.imag),
        tau_abs=abs(sol.tau),
        z_at_tau_error=abs(z_at_tau - sol.z0),
        w_at_tau_error=w_err,
        inner_iters=int(sol.inner_info.get("inner_iters", 0)),
        outer_iters=sol.outer_iters,
        contraction_ratio=float(sol.inner_info.get("contraction_ratio", 0.0)),
        y_norm_p=float(sol.inner_info.get("y_norm_p", 0.0)),
        apriori_bound=float(sol.inner_info.get("apriori_bound", 0.0)),
        s_emp_1=ws.empirical_s(1),
        s_emp_2=ws.empirical_s(2),
        converged=sol.converged,
    )
    sol.diagnostics = diag.to_flat_dict()
    return diag
