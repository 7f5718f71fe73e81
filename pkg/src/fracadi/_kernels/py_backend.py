"""NumPy reference implementations of the hot kernels.

Every routine here must stay floating-point identical to the compiled kernels
in ``_core.pyx``: same per-element expressions, same evaluation order, same
accumulation scheme.  Keep the two files in sync.
"""

from __future__ import annotations

import numpy as np

_PIVOT_RTOL = 1e-14


def compact_x(v):
    """Compact average along x: (v[m-1] + 10 v[m] + v[m+1]) / 12, boundaries copied."""
    out = v.copy()
    out[1:-1, :] = (v[:-2, :] + 10.0 * v[1:-1, :] + v[2:, :]) / 12.0
    return out


def compact_y(v):
    out = v.copy()
    out[:, 1:-1] = (v[:, :-2] + 10.0 * v[:, 1:-1] + v[:, 2:]) / 12.0
    return out


def second_diff_x(v, hx):
    """Second difference along x; output rows m = 0 and m = mx are set to zero."""
    out = np.zeros_like(v)
    out[1:-1, :] = (v[2:, :] - 2.0 * v[1:-1, :] + v[:-2, :]) / (hx * hx)
    return out


def second_diff_y(v, hy):
    out = np.zeros_like(v)
    out[:, 1:-1] = (v[:, 2:] - 2.0 * v[:, 1:-1] + v[:, :-2]) / (hy * hy)
    return out


def weighted_compact_sum(fields, coeffs):
    """Kahan-compensated sum over k of coeffs[k] * Hy(Hx(fields[k])), k ascending."""
    total = np.zeros_like(fields[0])
    comp = np.zeros_like(total)
    for k in range(len(coeffs)):
        term = coeffs[k] * compact_y(compact_x(fields[k]))
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def thomas_solve_many(sub, diag, sup, rhs):
    """Solve the tridiagonal system (sub, diag, sup) for every column of rhs.

    No pivoting; intended for strictly diagonally dominant systems.  Raises
    ZeroDivisionError on a vanishing pivot (signals a non-dominant system).
    """
    n = len(diag)
    cp = np.empty(n - 1) if n > 1 else np.empty(0)
    dp = np.empty_like(rhs)

    den = diag[0]
    scale = abs(diag[0]) + (abs(sup[0]) if n > 1 else 0.0)
    if not np.isfinite(den) or abs(den) <= _PIVOT_RTOL * scale:
        raise ZeroDivisionError(f"near-zero pivot at row 0: {den!r}")
    if n > 1:
        cp[0] = sup[0] / den
    dp[0, :] = rhs[0, :] / den
    for j in range(1, n):
        den = diag[j] - sub[j - 1] * cp[j - 1]
        scale = abs(diag[j]) + abs(sub[j - 1]) + (abs(sup[j]) if j < n - 1 else 0.0)
        if not np.isfinite(den) or abs(den) <= _PIVOT_RTOL * scale:
            raise ZeroDivisionError(f"near-zero pivot at row {j}: {den!r}")
        if j < n - 1:
            cp[j] = sup[j] / den
        dp[j, :] = (rhs[j, :] - sub[j - 1] * dp[j - 1, :]) / den
    for j in range(n - 2, -1, -1):
        dp[j, :] = dp[j, :] - cp[j] * dp[j + 1, :]
    return dp
