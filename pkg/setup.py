"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so a failed extension build only costs speed.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible; fall back to pure Python otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler or toolchain missing
            print(f"warning: compiled kernels skipped ({exc}); "
                  "using pure-Python fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "using pure-Python fallback")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "patchforge._kernels",
        ["src/patchforge/_kernels.pyx"],
        # -ffp-contract=off: no FMA contraction, keeps the compiled kernels
        # bit-identical to the NumPy fallback and the naive reference.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level="3")


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
