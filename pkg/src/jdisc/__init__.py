"""Numerical construction of pseudoholomorphic discs in the triangular cylinder.

Given a continuous matrix field A with sup norm below 1, supported in the
cylinder over the unit-area triangle, the solver produces a disc through
a prescribed point with boundary on the cylinder side and symplectic
area 1, together with a verification suite for the operator identities
the construction relies on.
"""
from .cauchy import beurling, build_operator_matrix, cauchy_green
from .conformal import ConformalMap, TriangleGeometry
from .grid import (BoundaryTrace, DiscGrid, GridFunction, boundary_trace,
                   build_grid, lp_norm)
from .kernels import BACKEND as KERNEL_BACKEND
from .solver import (DiscSolution, SolverParams, SolverWorkspace,
                     assemble_disc, solve_disc, solve_inner, update_tau)
from .structure import (RealJField, StructureField, a_from_j, builtin_field,
                        j_from_a, validate_structure)
from .verify import Diagnostics, diagnose, isometry_defect, winding_degree
from .weights import (boundary_violation, weight_R, weight_X, weighted_beurling,
                      weighted_cg)

__version__ = "0.1.0"
