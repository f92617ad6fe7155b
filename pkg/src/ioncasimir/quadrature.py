"""Batched Gauss-Kronrod quadrature on a finite window with panel doubling.

Every Lifshitz integrand here is integrated over ``[x0, x0 + width]`` in a
variable in which the integrand decays like ``exp(-x)``. The window is split
into uniform panels in ``t`` with ``x = x0 + width t^grading``; a grading of 2
smooths square-root and logarithmic behaviour at the lower end. Each panel is
integrated with the 15-point Kronrod rule and the embedded 7-point Gauss rule
gives the error estimate. Rows that miss the tolerance are recomputed with
twice as many panels.
"""
import numpy as np

__all__ = ["ConvergenceError", "gk15_nodes", "panel_rule", "integrate_rows"]


class ConvergenceError(RuntimeError):
    """Quadrature or a series did not converge.

    Attributes
    ----------
    estimate : float or ndarray
        Best value reached.
    error : float or ndarray
        Error estimate of ``estimate``.
    where : str
        Human-readable location of the failure (Matsubara order, k range).
    """

    def __init__(self, message, estimate=None, error=None, where=""):
        super().__init__(message if not where else f"{message} ({where})")
        self.estimate = estimate
        self.error = error
        self.where = where


_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def gk15_nodes():
    """Nodes on [-1, 1] with Kronrod and embedded Gauss weights (Gauss zero off-rule)."""
    x = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
    wk = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
    wg = np.zeros(15)
    # Gauss nodes are the odd-indexed Kronrod nodes (1, 3, ..., 13)
    wg[1::2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[-2::-1]])
    return x, wk, wg


_X, _WK, _WG15 = gk15_nodes()


def panel_rule(panels, width=40.0, grading=1.0):
    """Nodes ``s`` in ``[0, width]`` and Kronrod/Gauss weights for the graded panels.

    Returns
    -------
    s, wk, wg : ndarray, shape (panels, 15)
        Offsets from the window start and weights including the Jacobian.
    """
    edges = np.linspace(0.0, 1.0, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    h = 0.5 * (b - a)
    t = 0.5 * (a + b) + h * _X[None, :]
    s = width * t**grading
    jac = width * grading * t ** (grading - 1.0) * h
    return s, jac * _WK[None, :], jac * _WG15[None, :]


def integrate_rows(f, nrows, width=40.0, grading=1.0, rel_tol=1e-10, abs_tol=0.0,
                   start_panels=8, max_panels=1024, labels=None):
    """Integrate many integrands over ``[0, width]`` in the shifted variable.

    Parameters
    ----------
    f : callable
        ``f(rows, s)`` returns an array ``(len(rows), s.size)`` of integrand
        values for the selected row indices at the offsets ``s``.
    nrows : int
        Number of integrands.
    width, grading : float
        Window width and panel grading exponent.
    rel_tol, abs_tol : float
        A row converges when its error estimate is below
        ``max(abs_tol, rel_tol |value|)``.
    start_panels, max_panels : int
        Initial and largest panel counts.
    labels : sequence, optional
        Row labels used in failure diagnostics.

    Returns
    -------
    values, errors : ndarray
    panels : ndarray of int
        Panel count at which each row converged.

    Raises
    ------
    ConvergenceError
        If rows remain unconverged at ``max_panels``.
    """
    values = np.zeros(nrows)
    errors = np.full(nrows, np.inf)
    used = np.zeros(nrows, dtype=int)
    active = np.arange(nrows)
    panels = start_panels
    while active.size:
        s, wk, wg = panel_rule(panels, width, grading)
        vals = np.asarray(f(active, s.ravel()), dtype=float).reshape(active.size, panels, 15)
        if not np.all(np.isfinite(vals)):
            bad = active[~np.all(np.isfinite(vals.reshape(active.size, -1)), axis=1)]
            where = f"row {labels[bad[0]] if labels is not None else bad[0]}"
            raise ConvergenceError("integrand is not finite", where=where)
        k_sum = np.einsum("rpq,pq->rp", vals, wk)
        g_sum = np.einsum("rpq,pq->rp", vals, wg)
        val = k_sum.sum(axis=1)
        err = np.abs(k_sum - g_sum).sum(axis=1)
        values[active], errors[active], used[active] = val, err, panels
        ok = err <= np.maximum(abs_tol, rel_tol * np.abs(val))
        active = active[~ok]
        if active.size and panels >= max_panels:
            i = active[0]
            lab = labels[i] if labels is not None else i
            # locate the panel with the largest local error
            worst = int(np.argmax(np.abs(k_sum - g_sum)[np.flatnonzero(~ok)[0]]))
            lo, hi = width * (worst / panels) ** grading, width * ((worst + 1) / panels) ** grading
            raise ConvergenceError(
                f"quadrature did not converge with {panels} panels",
                estimate=values[active], error=errors[active],
                where=f"row {lab}, offset [{lo:.3g}, {hi:.3g}]",
            )
        panels *= 2
    return values, errors, used
