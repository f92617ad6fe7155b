# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Matsubara-order integrand; same contract as ``_kernels_py.lifshitz_local``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, log1p

cdef double EXP_GUARD = 700.0


cdef inline double gexp(double x) nogil:
    if x > EXP_GUARD:
        return 0.0
    return exp(-x)


def lifshitz_local(double[::1] s, double[::1] u0, double[::1] alpha, double[::1] eps1,
                   double[::1] eps2, double[::1] eps3, double d_over_L):
    cdef Py_ssize_t nb = u0.shape[0], m = s.shape[0], i, j
    out_arr = np.empty((nb, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double u, y, y2, a, e1, e2, e3, k1, k2, r1s, r1p, rs, rp, E, r2s, r2p, ex
    with nogil:
        for i in range(nb):
            a = alpha[i]
            e1 = eps1[i]
            e2 = eps2[i]
            e3 = eps3[i]
            for j in range(m):
                u = u0[i] + s[j]
                y = 0.5 * u
                y2 = y * y
                k1 = sqrt(y2 + (e1 - e3) * a)
                k2 = sqrt(y2 + (e2 - e3) * a)
                r1s = (e3 - e1) * a / ((y + k1) * (y + k1))
                r1p = (e1 * y - e3 * k1) / (e1 * y + e3 * k1)
                rs = (e3 - e2) * a / ((y + k2) * (y + k2))
                rp = (e2 * y - e3 * k2) / (e2 * y + e3 * k2)
                E = gexp(2.0 * k2 * d_over_L)
                r2s = rs * (1.0 - E) / (1.0 - rs * rs * E)
                r2p = rp * (1.0 - E) / (1.0 - rp * rp * E)
                ex = exp(-u)
                out[i, j] = u * (log1p(-r1s * r2s * ex) + log1p(-r1p * r2p * ex))
    return out_arr
