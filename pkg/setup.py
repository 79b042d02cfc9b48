"""Build script: compiles the optional training kernel extension.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here degrades to a pure-Python install.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("POLARISCOPE_SKIP_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/polariscope/kernels/_sgns.pyx"],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
        for ext in ext_modules:
            ext.include_dirs.append(np.get_include())
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
