"""Build script: compiles the Cython kernel core when possible.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here downgrades to a pure-Python build
instead of aborting the install.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/jdisc/kernels/_cy_kernels.pyx",
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": 3,
        },
    )
    include_dirs = [numpy.get_include()]
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"jdisc: skipping Cython extension ({exc}); "
          "falling back to pure numpy kernels", file=sys.stderr)
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
