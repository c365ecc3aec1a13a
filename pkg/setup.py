"""Build script for the optional compiled interpreter core.

The package works without the extension: mutrace.runner falls back to the
pure-Python evaluator when the compiled module is absent, so a failed
extension build degrades to a warning instead of a hard install failure.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            "warning: building the compiled interpreter core failed (%s); "
            "mutrace will use the pure-Python evaluator" % exc,
            file=sys.stderr,
        )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print(
            "warning: Cython not available; skipping the compiled "
            "interpreter core",
            file=sys.stderr,
        )
        return []
    ext = Extension(
        "mutrace.runner._interp_cy",
        ["src/mutrace/runner/_interp_cy.pyx"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
