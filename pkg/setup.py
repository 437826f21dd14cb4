"""Extension build hook; pure metadata lives in pyproject.toml.

Builds the compiled edit distance kernel when Cython and a C compiler
are available. Any build failure degrades to the pure-Python fallback
rather than failing the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("pkgvet.distance._speedups", ["src/pkgvet/distance/_speedups.pyx"])],
        language_level=3,
    )
except Exception as exc:  # noqa: BLE001 - degrade, never block install
    print(f"skipping compiled kernel ({exc}); using pure-Python fallback")

setup(ext_modules=ext_modules)
