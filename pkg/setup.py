"""Build script: compiles the optional Cython evolution kernel.

The package works without the extension (a NumPy fallback is selected at
import time), so compilation failures only cost speed, not functionality.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - depends on toolchain
            print(f"WARNING: C extension build failed ({exc}); "
                  "qsfolio will use the pure-NumPy evolution loop.",
                  file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - depends on toolchain
            print(f"WARNING: building {ext.name} failed ({exc}); "
                  "qsfolio will use the pure-NumPy evolution loop.",
                  file=sys.stderr)


def extensions():
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "qsfolio._native._evolve",
        sources=["src/qsfolio/_native/_evolve.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=["-O3"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
