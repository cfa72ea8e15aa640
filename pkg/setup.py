import os

from setuptools import Extension, setup

# The compiled kernels are optional: if Cython (or a C compiler) is not
# available the package falls back to the pure-Python implementations at
# import time.  Set SUFFIXSWEEP_PURE=1 to skip the extension build entirely.
ext_modules = []
if os.environ.get("SUFFIXSWEEP_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "suffixsweep.kernels._fast",
                    ["src/suffixsweep/kernels/_fast.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
