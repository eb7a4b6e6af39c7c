"""Builds the optional compiled kernel lane.

The package works without it (a pure NumPy fallback is selected at import),
so the extension is marked optional: a failed compile degrades, it does not
break the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "teleograsp._kernels._fast",
                ["src/teleograsp/_kernels/_fast.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
