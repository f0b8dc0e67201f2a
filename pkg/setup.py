"""Build script: compiles the Cython overlap/basis kernels when Cython is
available. The package works without the extension (pure-numpy fallback
selected at import), so a failed extension build is not fatal for
source installs."""

from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "lgpairs._kernels",
                ["src/lgpairs/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
