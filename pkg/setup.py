"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure-NumPy
fallback is selected at import time); the extension accelerates the
per-entry posterior and quadrature kernels that dominate fixed-point
and rate-search workloads.  Set DBP_SKIP_EXTENSION=1 to force a
pure-Python install.
"""

import os

from setuptools import Extension, setup


def extension_modules():
    if os.environ.get("DBP_SKIP_EXTENSION"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "dbp._kernels",
        ["src/dbp/_kernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"}, quiet=True)


setup(ext_modules=extension_modules())
