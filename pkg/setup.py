"""Build hook for the optional compiled enumeration kernel.

The package is pure Python unless Cython and a C toolchain are present, in
which case ``mlapd._opt_core`` is compiled.  Any build failure is swallowed —
the pure-Python kernel is semantically identical, so the extension is a
speedup, never a requirement.  Set MLAPD_NO_EXT=1 to skip the attempt.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


def _extensions():
    if os.environ.get("MLAPD_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(["src/mlapd/_opt_core.pyx"], language_level=3)


class OptionalBuildExt(build_ext):
    """Try to compile; on any failure keep going with pure Python."""

    def run(self):
        try:
            super().run()
        except Exception as exc:
            print(f"skipping compiled kernel ({exc}); pure-Python fallback in use")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"skipping {ext.name} ({exc}); pure-Python fallback in use")


setup(ext_modules=_extensions(), cmdclass={"build_ext": OptionalBuildExt})
