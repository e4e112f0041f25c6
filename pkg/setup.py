# Builds the compiled kernel extension. `pip install -e . --no-build-isolation`
# compiles in place; if the extension is unavailable at runtime the package
# falls back to the pure-Python kernels automatically.
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "motrack._speedups",
    sources=["src/motrack/_speedups.pyx"],
    # -ffp-contract=off: forbid FMA contraction so the compiled kernels are
    # bit-identical to the pure-Python reference (same IEEE op sequence).
    extra_compile_args=["-O2", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level=3))
