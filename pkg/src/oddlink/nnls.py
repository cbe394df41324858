import numpy as np

__all__ = ["nnls"]


def nnls(A, b, max_iter=None, tol=None):
    """
    Solve ``argmin_x || Ax - b ||_2`` for ``x >= 0``.

    Lawson-Hanson active set method: variables move from the active
    (clamped at zero) set to the passive set one at a time, picking the
    largest positive component of the negative gradient, and the passive
    least-squares solution is pulled back toward feasibility whenever a
    passive variable would go negative.

    Parameters
    ----------
    A : ndarray, shape (m, n)
    b : ndarray, shape (m,)
    max_iter : int, optional
        Defaults to ``3 * n``.
    tol : float, optional
        Dual feasibility tolerance; defaults to ``10 * eps * ||A||_1 * max(m, n)``.

    Returns
    -------
    x : ndarray
    rnorm : float
        The residual ``|| Ax - b ||_2``.
    """
    A = np.asarray_chkfinite(A, dtype=np.float64)
    b = np.asarray_chkfinite(b, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("expected matrix")
    if b.ndim != 1:
        raise ValueError("expected vector")
    m, n = A.shape
    if m != b.shape[0]:
        raise ValueError("incompatible dimensions")
    if max_iter is None:
        max_iter = 3 * n
    if tol is None:
        tol = 10 * np.finfo(float).eps * np.abs(A).sum(axis=0).max(initial=0) * max(m, n)

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ (b - A @ x)
    it = 0
    while not passive.all() and (w[~passive] > tol).any():
        j = np.flatnonzero(~passive)[np.argmax(w[~passive])]
        passive[j] = True
        while True:
            it += 1
            if it > max_iter:
                raise RuntimeError("too many iterations")
            z = np.zeros(n)
            z[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if (z[passive] > 0).all():
                x = z
                break
            neg = passive & (z <= 0)
            step = np.min(x[neg] / (x[neg] - z[neg]))
            x = x + step * (z - x)
            passive &= x > tol
            x[~passive] = 0.0
        w = A.T @ (b - A @ x)
    return x, float(np.linalg.norm(A @ x - b))
