from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "tgnnlab.engine._core",
        ["src/tgnnlab/engine/_core.pyx"],
        extra_compile_args=["-O3"],
    ),
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}),
)
