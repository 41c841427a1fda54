"""Builds the optional compiled core; the package works without it."""
from setuptools import setup

try:
    import numpy  # noqa: F401
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("wcprox._ckernels", ["src/wcprox/_ckernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
