"""Numpy implementation of the Matsubara-order integrand (fallback for the Cython kernel)."""
import numpy as np

EXP_GUARD = 700.0


def _gexp(x):
    return np.where(x > EXP_GUARD, 0.0, np.exp(-np.minimum(x, EXP_GUARD)))


def lifshitz_local(s, u0, alpha, eps1, eps2, eps3, d_over_L):
    """Integrand ``u [log(1 - r1s r2s e^-u) + log(1 - r1p r2p e^-u)]`` for many orders.

    Parameters
    ----------
    s : ndarray, shape (m,)
        Offsets ``u - u0``.
    u0, alpha, eps1, eps2, eps3 : ndarray, shape (nb,)
        Per-order lower limits ``2 sqrt(eps3) xi L/c``, ``(xi L/c)^2`` and
        permittivities of silica, metal and water.
    d_over_L : float
        Slab thickness over separation.

    Returns
    -------
    ndarray, shape (nb, m)
    """
    u = u0[:, None] + s[None, :]
    y = 0.5 * u
    y2 = y * y
    a = alpha[:, None]
    e1, e2, e3 = eps1[:, None], eps2[:, None], eps3[:, None]
    k1 = np.sqrt(y2 + (e1 - e3) * a)
    k2 = np.sqrt(y2 + (e2 - e3) * a)
    r1s = (e3 - e1) * a / (y + k1) ** 2
    r1p = (e1 * y - e3 * k1) / (e1 * y + e3 * k1)
    rs = (e3 - e2) * a / (y + k2) ** 2
    rp = (e2 * y - e3 * k2) / (e2 * y + e3 * k2)
    E = _gexp(2.0 * k2 * d_over_L)
    r2s = rs * (1.0 - E) / (1.0 - rs * rs * E)
    r2p = rp * (1.0 - E) / (1.0 - rp * rp * E)
    ex = np.exp(-u)
    return u * (np.log1p(-r1s * r2s * ex) + np.log1p(-r1p * r2p * ex))
