import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "restricted_mg1._ckernels",
        ["src/restricted_mg1/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        # no contraction: results must match the pure-Python kernels bit for bit
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
