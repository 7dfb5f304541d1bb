"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (a pure numpy twin of every kernel
is selected at import time), so a failed extension build only costs speed.
"""
import sys

from setuptools import Extension, setup


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError as exc:
        sys.stderr.write(f"markerdec: skipping Cython extension ({exc})\n")
        return []
    ext = Extension(
        "markerdec._speedups",
        ["src/markerdec/_speedups.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions())
