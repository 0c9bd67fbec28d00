"""Build script for the optional compiled CSR kernels.

The package works without the extension (a numpy/scipy fallback is selected
at import time), so the extension is marked optional: a missing compiler
degrades performance, not functionality.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "hgbench.kernels._csr_cy",
                ["src/hgbench/kernels/_csr_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # keep mul+add unfused so results match the fallback bit for bit
                extra_compile_args=["-O3", "-ffp-contract=off"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
