"""Build script.

The package is pure Python except for one optional Cython extension,
collidersim._trials, which accelerates the fixed-precision trial loop.
The extension is strictly optional: if Cython or a C compiler is missing
the build falls back to the pure interpreter kernel with identical
semantics (collidersim/_trials_py.py).
"""

import os
import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Skip the extension instead of failing the whole install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            warnings.warn("skipping compiled kernel: %s" % exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn("skipping compiled kernel %s: %s" % (ext.name, exc))


def extensions():
    if os.environ.get("COLLIDERSIM_NO_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    try:
        return cythonize(
            [
                Extension(
                    "collidersim._trials",
                    ["src/collidersim/_trials.pyx"],
                    extra_compile_args=["-O2"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:
        warnings.warn("cythonize failed, continuing without compiled kernel: %s" % exc)
        return []


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
