"""Hot numeric kernels: numba-jitted loops with a pure-numpy fallback.

The backend is chosen once at import time. Setting ``ORDERTAIL_NO_NUMBA=1``
(or any value other than ``0``/empty) forces the numpy path; otherwise numba
is used when importable. Both backends execute the same floating-point
operations in the same order, so results are bit-identical and the flag can
only affect speed (tests assert exact equality).

Kernels operate on C-contiguous float64 arrays. ``benchmarks/bench_kernels.py``
times the two backends against each other.
"""

import os

import numpy as np

_FLAG = os.environ.get("ORDERTAIL_NO_NUMBA", "").strip()
_NUMBA_REQUESTED = _FLAG in ("", "0")

if _NUMBA_REQUESTED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a hard dependency
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False


def active_backend():
    """Name of the backend the dispatchers use ('numba' or 'numpy')."""
    return "numba" if NUMBA_ENABLED else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations
#
# Accumulation is deliberately sequential over the small axis (one fused
# multiply-add per weight, in index order) so it matches the jitted loops
# bit for bit.
# ---------------------------------------------------------------------------


def weighted_sums_numpy(x, c):
    """Descending-sort each row of ``x`` and dot with ``c``."""
    s = np.sort(x, axis=1)[:, ::-1]
    out = np.zeros(x.shape[0])
    for j in range(x.shape[1]):
        out += s[:, j] * c[j]
    return out


def weighted_sums_varying_c0_numpy(x, c0, rest):
    """Like :func:`weighted_sums_numpy` with a per-row weight on the maximum."""
    s = np.sort(x, axis=1)[:, ::-1]
    out = s[:, 0] * c0
    for j in range(1, x.shape[1]):
        out += s[:, j] * rest[j - 1]
    return out


def fgm_density_numpy(u, subset_index, subset_offset, theta):
    """Evaluate the FGM copula density 1 + sum_J theta_J prod_j (1-2u_j).

    Subsets are encoded as ``subset_index[subset_offset[k]:subset_offset[k+1]]``
    for coefficient ``theta[k]``.
    """
    dens = np.ones(u.shape[0])
    for k in range(theta.shape[0]):
        term = np.full(u.shape[0], theta[k])
        for p in range(subset_offset[k], subset_offset[k + 1]):
            term = term * (1.0 - 2.0 * u[:, subset_index[p]])
        dens += term
    return dens


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True)
    def _weighted_sums_numba(x, c):
        m, n = x.shape
        out = np.empty(m)
        buf = np.empty(n)
        for r in range(m):
            for j in range(n):
                buf[j] = x[r, j]
            for j in range(1, n):
                key = buf[j]
                k = j - 1
                while k >= 0 and buf[k] > key:
                    buf[k + 1] = buf[k]
                    k -= 1
                buf[k + 1] = key
            acc = 0.0
            for j in range(n):
                acc += buf[n - 1 - j] * c[j]
            out[r] = acc
        return out

    @njit(cache=True)
    def _weighted_sums_varying_c0_numba(x, c0, rest):
        m, n = x.shape
        out = np.empty(m)
        buf = np.empty(n)
        for r in range(m):
            for j in range(n):
                buf[j] = x[r, j]
            for j in range(1, n):
                key = buf[j]
                k = j - 1
                while k >= 0 and buf[k] > key:
                    buf[k + 1] = buf[k]
                    k -= 1
                buf[k + 1] = key
            acc = buf[n - 1] * c0[r]
            for j in range(1, n):
                acc += buf[n - 1 - j] * rest[j - 1]
            out[r] = acc
        return out

    @njit(cache=True)
    def _fgm_density_numba(u, subset_index, subset_offset, theta):
        m = u.shape[0]
        dens = np.ones(m)
        for r in range(m):
            acc = 1.0
            for k in range(theta.shape[0]):
                term = theta[k]
                for p in range(subset_offset[k], subset_offset[k + 1]):
                    term = term * (1.0 - 2.0 * u[r, subset_index[p]])
                acc += term
            dens[r] = acc
        return dens


# ---------------------------------------------------------------------------
# dispatchers
# ---------------------------------------------------------------------------


def _c_f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def weighted_sums(x, c):
    """Batch weighted order-statistic sums.

    Rows of ``x`` are sorted in descending order and dotted with the weight
    vector ``c`` (c[0] multiplies the row maximum). Returns shape (m,).
    """
    x = _c_f64(x)
    c = _c_f64(c)
    if x.ndim != 2 or c.shape != (x.shape[1],):
        raise ValueError("x must be (m, n) and c must have length n")
    if NUMBA_ENABLED:
        return _weighted_sums_numba(x, c)
    return weighted_sums_numpy(x, c)


def weighted_sums_varying_c0(x, c0, rest):
    """Weighted order-statistic sums with a per-row random weight on the max."""
    x = _c_f64(x)
    c0 = _c_f64(c0)
    rest = _c_f64(rest)
    if x.ndim != 2 or c0.shape != (x.shape[0],) or rest.shape != (x.shape[1] - 1,):
        raise ValueError("shape mismatch: x (m,n), c0 (m,), rest (n-1,)")
    if NUMBA_ENABLED:
        return _weighted_sums_varying_c0_numba(x, c0, rest)
    return weighted_sums_varying_c0_numpy(x, c0, rest)


def fgm_density(u, subset_index, subset_offset, theta):
    """FGM copula density on the unit cube for encoded subsets."""
    u = _c_f64(u)
    subset_index = np.ascontiguousarray(subset_index, dtype=np.int64)
    subset_offset = np.ascontiguousarray(subset_offset, dtype=np.int64)
    theta = _c_f64(theta)
    if NUMBA_ENABLED:
        return _fgm_density_numba(u, subset_index, subset_offset, theta)
    return fgm_density_numpy(u, subset_index, subset_offset, theta)


def encode_subsets(subsets, thetas):
    """Flatten ``subsets`` (iterables of column indices) for the kernels."""
    index = []
    offset = [0]
    for s in subsets:
        index.extend(int(j) for j in s)
        offset.append(len(index))
    return (
        np.asarray(index, dtype=np.int64),
        np.asarray(offset, dtype=np.int64),
        np.asarray(list(thetas), dtype=np.float64),
    )
