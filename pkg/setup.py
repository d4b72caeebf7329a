"""Build script with an optional Cython speedup extension.

The compiled kernel is a pure accelerator: if Cython or a C compiler is
unavailable the package installs anyway and falls back to the NumPy
implementation at import time.
"""

import os

from setuptools import setup

_PYX = "src/slpplan/simplex/_kernels.pyx"

ext_modules = []
try:
    if not os.path.exists(_PYX):
        raise ImportError
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "slpplan.simplex._kernels",
                [_PYX],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
