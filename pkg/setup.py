from setuptools import Extension, setup

# The compiled kernel is optional: the package falls back to a pure-Python
# implementation at import time if the extension is unavailable.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "twistdescent._f2core",
                ["src/twistdescent/_f2core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
