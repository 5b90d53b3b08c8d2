"""Build hook for the optional Cython kernels.

If Cython or a C compiler is missing the package installs without the
extension and falls back to ``midlayer._kernels_py`` at import time.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "midlayer._ckernels",
                ["src/midlayer/_ckernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
