import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "posefill.neural._kernels",
        sources=["src/posefill/neural/_kernels.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
]

if cythonize is not None:
    # Without Cython the package still installs; posefill.neural falls back
    # to the numpy kernels at import time.
    setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
else:
    setup()
