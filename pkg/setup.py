"""Build the optional Cython integrator kernel.

The package works without it (a pure-Python kernel is selected at import
time); building the extension just makes long lattice integrations fast.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("blochclock._verlet", ["src/blochclock/_verlet.pyx"])],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
