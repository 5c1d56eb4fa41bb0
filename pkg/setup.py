"""Build script: compiles the optional n-gram scoring kernel when Cython is
available. The package falls back to the pure-Python kernel at import time,
so a failed or skipped extension build is not an error."""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "explicitation.ngram._kernel_cy",
                ["src/explicitation/ngram/_kernel_cy.pyx"],
                language="c++",
                optional=True,
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
