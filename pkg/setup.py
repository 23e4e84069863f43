"""Build script for the optional compiled ray-cast kernel.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes rendering much faster.
"""
import os

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "voxflow._kernels._native",
                sources=["src/voxflow/_kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                # -ffp-contract=off keeps the compiled kernel arithmetic
                # bit-compatible with the numpy fallback (no FMA fusion).
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    if os.environ.get("VOXFLOW_REQUIRE_NATIVE"):
        raise

setup(ext_modules=ext_modules)
