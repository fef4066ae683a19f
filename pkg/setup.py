"""Build script for the optional compiled statevector kernels.

The package works without the extension: qforecast.backend falls back to
pure-numpy kernels when the compiled module is missing. Set
QFORECAST_SKIP_EXTENSION=1 to skip the build on purpose.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, warn and continue if not."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            print(f"warning: compiled kernels skipped ({exc}); "
                  "falling back to pure-python backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: building {ext.name} failed ({exc}); "
                  "falling back to pure-python backend")


def extensions():
    if os.environ.get("QFORECAST_SKIP_EXTENSION"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available; compiled kernels skipped")
        return []
    return cythonize(
        [Extension("qforecast._kernels", ["src/qforecast/_kernels.pyx"])],
        language_level=3,
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
