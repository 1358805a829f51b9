import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# no -ffast-math and no contraction: the compiled kernels must agree bit for
# bit with the numpy fallback
extensions = [
    Extension(
        "srbb._kernels",
        ["src/srbb/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
