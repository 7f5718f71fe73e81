import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # pure-Python install; the package falls back to the NumPy kernels
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "fracadi._kernels._core",
                ["src/fracadi/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                # -ffp-contract=off: results must stay bitwise identical to
                # the NumPy fallback, so FMA contraction is disabled
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
