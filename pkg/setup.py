"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure NumPy fallback is selected
at import time), so a failed compile downgrades to a warning instead of
aborting the install.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [
            Extension(
                name="dlqr._kernels",
                sources=["src/dlqr/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
            "language_level": "3",
        },
    )
except ImportError:
    import warnings

    warnings.warn("Cython not available; building without the compiled kernels")
    extensions = []

setup(ext_modules=extensions)
