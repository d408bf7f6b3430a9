from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [Extension("arborp._kernels", ["src/arborp/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    ),
)
