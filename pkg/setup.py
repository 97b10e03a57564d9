"""Build script for the optional compiled edge-kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time), so a failed compile only costs speed.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "ccbcut._edgeops",
                ["src/ccbcut/_edgeops.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-env dependent
    import sys

    print(f"ccbcut: skipping compiled kernels ({exc}); "
          "the pure-numpy fallback will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
