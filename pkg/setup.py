"""Build script.

The shooting integrator has a compiled (Cython) core; if Cython or a C
compiler is unavailable the package falls back to the pure-Python kernel
selected at import time, so the extension is strictly optional.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "nlscouple._kernels.shoot_cy",
                ["src/nlscouple/_kernels/shoot_cy.pyx"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
