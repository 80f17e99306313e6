"""Build script: compiles the fast trajectory kernel when Cython is available.

The package works without the extension (a pure-Python kernel is selected at
import time), so a missing compiler or Cython only costs speed, not features.
Set EQLEARN_SKIP_EXT=1 to force a pure-Python build.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("EQLEARN_SKIP_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "eqlearn._kernel",
                    ["src/eqlearn/_kernel.pyx"],
                    # no -ffast-math: the Python fallback and the compiled
                    # kernel must produce bit-identical IEEE results
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
