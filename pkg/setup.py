import os

from setuptools import setup

ext_modules = []
if os.environ.get("CORRDYN_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "corrdyn._kernels_cy",
                    ["src/corrdyn/_kernels_cy.pyx"],
                    # no FP contraction: the compiled kernels must stay
                    # bit-identical to the pure-Python backend
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
