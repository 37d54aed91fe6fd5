"""Builds the optional Cython edge-detection core.

The package works without it: shanshui.canny falls back to the numpy
kernels when the extension is missing.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/shanshui/canny/_speedups.pyx",
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        # FP contraction off: the compiled kernels must be bit-identical
        # to the numpy fallback.
        ext.extra_compile_args = ["-O2", "-ffp-contract=off"]
except Exception as exc:  # pragma: no cover - build-env dependent
    print(f"shanshui: skipping compiled edge kernels ({exc})")
    ext_modules = []

setup(ext_modules=ext_modules)
