"""Build hook for the optional compiled DTW kernel.

The package works without the extension: signal_math falls back to a pure
Python dynamic program when the compiled module is absent or when
IMPUTEAUDIT_PURE_PYTHON=1 is set.  Building the kernel just makes the
alignment loops run at C speed.
"""

from setuptools import Extension, setup

try:
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "imputeaudit.signal_math._dtw_kernel",
                ["src/imputeaudit/signal_math/_dtw_kernel.pyx"],
                include_dirs=[np.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
