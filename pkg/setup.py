"""Build hook for the optional compiled kernels.

When Cython or a C compiler is unavailable the package still installs and
``feyninv.kernels`` falls back to the pure-Python implementation.
"""

import os

import numpy
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("FEYNINV_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "feyninv._ckernels",
                    ["src/feyninv/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
