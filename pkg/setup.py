import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "lexnet._kernel",
        ["src/lexnet/_kernel.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
        language="c++",
        # a failed compile leaves the pure-Python kernel in charge
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
