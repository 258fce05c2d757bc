"""Build script: compiles the optional Cython stepping kernels.

The package works without the extension (a NumPy fallback is selected at
import time); the build silently degrades to pure Python when Cython or a
C compiler is unavailable.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    import numpy as np

    extensions = cythonize(
        [
            Extension(
                "cohstate._kernels",
                ["src/cohstate/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
