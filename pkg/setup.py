from setuptools import Extension, setup
from Cython.Build import cythonize

# -O3 but no -ffast-math / -march=native: the simulation kernels must keep
# strict IEEE semantics so that compiled and pure-numpy backends agree.
extensions = [
    Extension(
        "oppsched._speedups",
        ["src/oppsched/_speedups.pyx"],
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
)
