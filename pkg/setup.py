from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("robustnet._kernels._fast", ["src/robustnet/_kernels/_fast.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython at build time: the pure backend in robustnet._kernels._slow
    # is selected at import and the package stays fully functional.
    extensions = []

setup(ext_modules=extensions)
