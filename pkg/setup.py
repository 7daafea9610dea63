"""Build script for the compiled augmentation kernels.

The extension is optional: if it fails to build (no compiler, no Cython),
the package falls back to the numpy reference kernels at import time.
`-ffp-contract=off` keeps the C float arithmetic identical to numpy's
(no FMA contraction), which the byte-equality tests between the two
backends rely on.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    extensions = [
        Extension(
            "weathergauge.augment.kernels._core",
            ["src/weathergauge/augment/kernels/_core.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3", "-ffp-contract=off"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
    ]
    ext_modules = cythonize(
        extensions, compiler_directives={"language_level": 3, "embedsignature": True}
    )

setup(ext_modules=ext_modules)
