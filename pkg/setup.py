"""Build script: compiles the optional Cython kernels.

The package works without the extension (a pure-Python fallback is selected
at import time), so a missing compiler or Cython must not fail the install.
"""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    extra = [] if sys.platform == "win32" else ["-O3"]
    ext_modules = cythonize(
        [
            Extension(
                "flowlens.kernels._ckernels",
                ["src/flowlens/kernels/_ckernels.pyx"],
                extra_compile_args=extra,
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build machine
    print(f"flowlens: skipping compiled kernels ({exc}); using pure-Python fallback")

setup(ext_modules=ext_modules)
