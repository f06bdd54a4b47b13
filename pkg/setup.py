"""Build script: compiles the optional C extension for the mapping-search kernel.

The package works without the extension (a pure-Python implementation of the
same algorithm is selected at import time), so a failed compile is not fatal
for source checkouts -- but under pip the build is expected to succeed.
"""
from setuptools import setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        ["src/drskit/metrics/_matchcore.pyx"],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    ),
)
