"""Kernel backend selection.

The compiled Cython core is used when it imported cleanly; otherwise the
numpy fallback takes over.  Set JDISC_KERNELS=numpy (or =c) to force a
backend; forcing the compiled one raises if it is unavailable.
"""
import os

from . import _np_kernels

_choice = os.environ.get("JDISC_KERNELS", "auto").lower()

_cy = None
if _choice in ("auto", "c"):
    try:
        from . import _cy_kernels as _cy
    except ImportError:
        if _choice == "c":
            raise
        _cy = None

BACKEND = "c" if _cy is not None else "numpy"
cell_integrals = (_cy or _np_kernels).cell_integrals

numpy_cell_integrals = _np_kernels.cell_integrals
compiled_cell_integrals = _cy.cell_integrals if _cy is not None else None
