"""Build the optional compiled kernel.

If Cython or a C compiler is unavailable the package still installs and
``logdiff.kernels`` falls back to the numpy implementation.
"""
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"compiled kernel not built ({exc}); using the pure-Python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            warnings.warn(f"compiled kernel {ext.name} not built ({exc}); using the pure-Python backend")


try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("logdiff._kernels", ["src/logdiff/_kernels.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": OptionalBuildExt})
