"""Pure-Python implementation of the batched scattering kernel.

Mirrors :mod:`eomnet._kernels` (Cython) call for call; used when the
compiled module is unavailable.
"""

from __future__ import annotations

import numpy as np

from .errors import SingularMatrixError
from .linalg import PIVOT_RTOL, lu_factor, lu_substitute


def scattering_stack(m, sqrt_gamma, omegas) -> np.ndarray:
    """U(w) = S (M - i w I)^-1 S - I for every w, with S = diag(sqrt_gamma).

    Returns a complex array of shape ``(len(omegas), n, n)``.
    """
    m_rows = np.asarray(m, dtype=complex).tolist()
    s = [float(x) for x in sqrt_gamma]
    n = len(s)
    ws = [float(w) for w in omegas]
    out = np.empty((len(ws), n, n), dtype=complex)
    rhs = [[s[j] if i == j else 0.0 for j in range(n)] for i in range(n)]
    for k, w in enumerate(ws):
        a = [list(row) for row in m_rows]
        for i in range(n):
            a[i][i] -= 1j * w
        try:
            lu, perm = lu_factor(a)
        except SingularMatrixError as exc:
            raise SingularMatrixError(exc.column, index=k) from None
        x = lu_substitute(lu, perm, rhs)
        for i in range(n):
            si = s[i]
            xi = x[i]
            for j in range(n):
                xi[j] *= si
            xi[i] -= 1.0
        out[k] = x
    return out


__all__ = ["scattering_stack", "PIVOT_RTOL"]
