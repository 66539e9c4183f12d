"""Build script for the optional compiled kernel extension.

The package works without it (a pure-Python backend is selected at import
time); building it just makes the hot loops fast:

    python setup.py build_ext --inplace

Compiled with -ffp-contract=off so the float recursion stays bit-identical
to the pure backend (no FMA contraction).
"""

from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Degrade to the pure backend instead of failing the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing
            print(f"[fsolink] skipping compiled kernels ({exc}); pure backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"[fsolink] skipping {ext.name} ({exc}); pure backend will be used")


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("[fsolink] Cython not available; compiled kernels not built")
        return []
    from setuptools import Extension

    ext = Extension(
        "fsolink._kernels._core",
        ["src/fsolink/_kernels/_core.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
