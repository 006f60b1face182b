import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "pencilph._kernels._sylvester_c",
                ["src/pencilph/_kernels/_sylvester_c.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # Pure-Python fallback backend is always available; the compiled kernel
    # is an optional accelerator.
    ext_modules = []

setup(ext_modules=ext_modules)
