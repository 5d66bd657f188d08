from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the numpy pivot kernel is used
    ext_modules = []
else:
    import numpy as np

    ext_modules = cythonize(
        [Extension("otsbm.optcore._pivot", ["src/otsbm/optcore/_pivot.pyx"],
                   include_dirs=[np.get_include()], extra_compile_args=["-O3"])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
