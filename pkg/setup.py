"""Build script for the compiled kernel extension.

The package works without the extension (a pure numpy fallback is selected at
import time), but the Monte Carlo ARL runs are an order of magnitude faster
with it. Build in place with:

    python setup.py build_ext --inplace
"""

from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "betachart._backend._corekernels",
        ["src/betachart/_backend/_corekernels.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(extensions, language_level=3),
)
