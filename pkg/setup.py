"""Build script: compiles the optional fast kernel extension.

The package works without the extension (a pure-Python twin of the kernels
is selected at import time), so a missing compiler or Cython only costs
speed, not functionality.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/coderel/_ckern.pyx"],
        compiler_directives={"language_level": "3"},
    )
    include_dirs = [numpy.get_include()]
except ImportError:
    ext_modules = []
    include_dirs = []

setup(ext_modules=ext_modules, include_dirs=include_dirs)
