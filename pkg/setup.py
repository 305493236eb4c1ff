import numpy
from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "ptrabi._kernels._cyloop",
                ["src/ptrabi/_kernels/_cyloop.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # no Cython: install pure-Python only; the package falls back at import
    extensions = []

setup(ext_modules=extensions)
