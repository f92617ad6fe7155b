"""Select the compiled integrand kernel, falling back to numpy.

Set ``IONCASIMIR_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py.lifshitz_local

if os.environ.get("IONCASIMIR_PURE_PYTHON") != "1":
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        _impl = _ckernels.lifshitz_local

__all__ = ["BACKEND", "lifshitz_local"]


def lifshitz_local(s, u0, alpha, eps1, eps2, eps3, d_over_L):
    """Dispatch to the selected backend; see ``_kernels_py.lifshitz_local``."""
    c = lambda a: np.ascontiguousarray(a, dtype=np.float64)
    return np.asarray(_impl(c(s), c(u0), c(alpha), c(eps1), c(eps2), c(eps3), float(d_over_L)))
