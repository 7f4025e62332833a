"""Inner-loop kernels with an optional numba backend.

Set ``QRBACKWARD_DISABLE_NUMBA=1`` before import to force the pure-numpy
implementations (useful for debugging and for platforms without numba).
"""

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("QRBACKWARD_DISABLE_NUMBA", "0") not in ("1", "true", "yes")


def optional_njit(*args, **kwargs):
    def decorator(func):
        if USE_NUMBA:
            return njit(*args, **kwargs)(func)
        return func

    return decorator


def _thomas_numpy(lower, diag, upper, rhs):
    """Thomas algorithm; the row sweep is vectorized over trailing rhs columns.

    ``lower[0]`` and ``upper[-1]`` are ignored.
    """
    n = diag.shape[0]
    c = np.empty(n)
    d = np.array(rhs, dtype=float, copy=True)
    c[0] = upper[0] / diag[0] if n > 1 else 0.0
    d[0] = d[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * c[i - 1]
        if i < n - 1:
            c[i] = upper[i] / denom
        d[i] = (d[i] - lower[i] * d[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        d[i] = d[i] - c[i] * d[i + 1]
    return d


@optional_njit(cache=True)
def _thomas_loop(lower, diag, upper, rhs):
    n = diag.shape[0]
    c = np.empty(n)
    x = np.empty(n)
    c[0] = upper[0] / diag[0] if n > 1 else 0.0
    x[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * c[i - 1]
        if i < n - 1:
            c[i] = upper[i] / denom
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / denom
    for i in range(n - 2, -1, -1):
        x[i] = x[i] - c[i] * x[i + 1]
    return x


def thomas_solve(lower, diag, upper, rhs):
    """Solve a tridiagonal system ``A x = rhs``.

    Parameters
    ----------
    lower, diag, upper : ndarray, shape (n,)
        Sub-, main and super-diagonal. ``lower[0]`` and ``upper[-1]`` are unused.
    rhs : ndarray, shape (n,) or (n, k)
        Right-hand side(s).

    Returns
    -------
    ndarray
        Solution with the shape of ``rhs``.
    """
    lower = np.ascontiguousarray(lower, dtype=float)
    diag = np.ascontiguousarray(diag, dtype=float)
    upper = np.ascontiguousarray(upper, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.ndim == 1 and USE_NUMBA:
        return _thomas_loop(lower, diag, upper, np.ascontiguousarray(rhs))
    return _thomas_numpy(lower, diag, upper, rhs)


@optional_njit(cache=True)
def _windowed_logistic_sum(values):
    total = 0.0
    for i in range(values.shape[0]):
        w = values[i]
        if 0.0 <= w <= 1.0:
            total += abs(w * (1.0 - w))
    return total


def windowed_logistic_sum(values):
    """Sum of ``|w (1 - w)|`` over the entries with ``0 <= w <= 1``."""
    values = np.ascontiguousarray(values, dtype=float)
    if USE_NUMBA:
        return float(_windowed_logistic_sum(values))
    inside = values[(values >= 0.0) & (values <= 1.0)]
    return float(np.sum(np.abs(inside * (1.0 - inside))))
