"""Pure numpy evaluation of the per-cell kernel integrals.

For a square cell C of width h centered at t_k and an evaluation point
zeta, the two primitives are

    I1 = int_C dA(t) / (t - zeta)
    I2 = p.v. int_C dA(t) / (t - zeta)^2

both reduced to contour integrals over the four cell edges, on which
conj(t) is affine in t, so each edge contributes elementary terms with a
single complex log.  The log of the endpoint quotient is taken with the
principal branch, which is correct because an evaluation point off the
edge subtends less than pi.

When zeta lies strictly inside the cell the contour identity picks up a
residue and I1 needs the correction -pi*conj(zeta - t_k); at the exact
center both integrals vanish by symmetry and the formulas return 0.
"""
import numpy as np

_SELF_EPS = 1e-14


def cell_integrals(cells, h, evals, want_i2=True):
    """Return (I1, I2) matrices of shape (len(evals), len(cells)).

    I2 is None when want_i2 is false.  Evaluation points must not lie on
    a cell edge or corner (callers perturb them beforehand).
    """
    cells = np.asarray(cells, dtype=np.complex128)
    evals = np.asarray(evals, dtype=np.complex128)
    hh = 0.5 * h
    d = evals[:, None] - cells[None, :]

    corners = (
        complex(-hh, -hh), complex(hh, -hh), complex(hh, hh), complex(-hh, hh))
    # (u1, u2, alpha, beta): conj(u) = alpha*u + beta on the edge u1 -> u2
    edges = (
        (corners[0], corners[1], 1.0, complex(0.0, 2.0 * hh)),
        (corners[1], corners[2], -1.0, complex(2.0 * hh, 0.0)),
        (corners[2], corners[3], 1.0, complex(0.0, -2.0 * hh)),
        (corners[3], corners[0], -1.0, complex(-2.0 * hh, 0.0)),
    )

    acc1 = np.zeros(d.shape, dtype=np.complex128)
    acc2 = np.zeros(d.shape, dtype=np.complex128) if want_i2 else None
    for u1, u2, alpha, beta in edges:
        w1 = u1 - d
        w2 = u2 - d
        log_q = np.log(w2 / w1)
        lin = alpha * d + beta
        acc1 += lin * log_q
        if want_i2:
            acc2 += alpha * log_q - lin * (1.0 / w2 - 1.0 / w1)

    half_i = -0.5j  # 1/(2i)
    i1 = half_i * acc1
    inside = (np.abs(d.real) < hh) & (np.abs(d.imag) < hh)
    if inside.any():
        i1[inside] -= np.pi * np.conj(d[inside])
    self_cell = np.abs(d) < _SELF_EPS * h
    if self_cell.any():
        i1[self_cell] = 0.0

    if not want_i2:
        return i1, None
    i2 = half_i * acc2
    if self_cell.any():
        i2[self_cell] = 0.0
    return i1, i2
