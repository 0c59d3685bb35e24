import os
import sys

from setuptools import setup

ext_modules = []
if not os.environ.get("FRACHJ_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        openmp = [] if sys.platform == "darwin" else ["-fopenmp"]
        ext_modules = cythonize(
            [
                Extension(
                    "frachj._kernels",
                    ["src/frachj/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"] + openmp,
                    extra_link_args=openmp,
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # pure-Python fallback in frachj._kernels_py is used at import time
        ext_modules = []

setup(ext_modules=ext_modules)
