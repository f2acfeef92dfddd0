import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("LEDIFLOW_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "lediflow._ckernels",
                    ["src/lediflow/_ckernels.pyx"],
                    include_dirs=[np.get_include(), "src/lediflow"],
                    depends=["src/lediflow/_silu.h"],
                    extra_compile_args=["-O3", "-march=native", "-fno-math-errno", "-fno-trapping-math"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
