"""Build the optional Cython kernel; the package falls back to numpy without it."""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("IONCASIMIR_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext = Extension(
            "ioncasimir._ckernels",
            ["src/ioncasimir/_ckernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3"],
        )
        ext_modules = cythonize([ext], compiler_directives={"language_level": 3})

setup(ext_modules=ext_modules)
