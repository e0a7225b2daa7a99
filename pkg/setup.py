from setuptools import Extension, setup

# The compiled split-scan kernel is optional: if Cython or a C compiler is
# missing, the package falls back to the numpy implementation at import time.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "betaforest._split_cy",
                ["src/betaforest/_split_cy.pyx"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
