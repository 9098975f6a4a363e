import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # No Cython at build time: install pure-Python only, the package falls
    # back to the numpy permanent kernel at import.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "lightmatter._kernels._permanent_cy",
                ["src/lightmatter/_kernels/_permanent_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
