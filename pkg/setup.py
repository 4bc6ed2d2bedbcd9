"""Build script: compiles the optional Cython quadrature core.

The extension is best-effort — if compilation is impossible the install still
succeeds and the package falls back to the pure-numpy engine at import time.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - cython is a build requirement
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "stablekern._ckern",
        sources=["src/stablekern/_ckern.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
