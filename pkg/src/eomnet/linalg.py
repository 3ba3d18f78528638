"""Small dense complex linear algebra in plain Python.

Everything here works on matrices of a handful of rows (the largest network
in use is 5x5), so the routines favour clarity over blocking or vectorisation.
Inputs may be nested sequences or numpy arrays; results come back as numpy
arrays.

This module doubles as the pure-Python fallback for the compiled sweep
kernel, see :mod:`eomnet._pykernels`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, SingularMatrixError

#: pivots below ``PIVOT_RTOL * max|a|`` are treated as zero
PIVOT_RTOL = 1e-14

_EPS = np.finfo(float).eps


def as_rows(a) -> list[list[complex]]:
    """Copy ``a`` into a list of complex rows, checking shape and finiteness."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr.tolist()


def _max_abs(rows: list[list[complex]]) -> float:
    return max((abs(x) for row in rows for x in row), default=0.0)


def lu_factor(a) -> tuple[list[list[complex]], list[int]]:
    """LU factorisation with partial pivoting by largest modulus.

    Returns ``(lu, perm)`` where ``lu`` packs the unit-lower factor below the
    diagonal and the upper factor on and above it, and row ``i`` of ``lu``
    came from row ``perm[i]`` of ``a``.

    Raises:
        SingularMatrixError: if a pivot falls below ``PIVOT_RTOL * max|a|``.
    """
    lu = a if isinstance(a, list) else as_rows(a)
    lu = [list(row) for row in lu]
    n = len(lu)
    if any(len(row) != n for row in lu):
        raise ValueError("lu_factor needs a square matrix")
    perm = list(range(n))
    threshold = PIVOT_RTOL * _max_abs(lu)
    for k in range(n):
        p = max(range(k, n), key=lambda r: abs(lu[r][k]))
        piv = lu[p][k]
        if piv == 0 or abs(piv) < threshold:
            raise SingularMatrixError(k)
        if p != k:
            lu[k], lu[p] = lu[p], lu[k]
            perm[k], perm[p] = perm[p], perm[k]
        row_k = lu[k]
        for r in range(k + 1, n):
            row_r = lu[r]
            f = row_r[k] / piv
            if f == 0:
                row_r[k] = 0j
                continue
            row_r[k] = f
            for c in range(k + 1, n):
                row_r[c] -= f * row_k[c]
    return lu, perm


def lu_substitute(lu: list[list[complex]], perm: list[int], b: list[list[complex]]) -> list[list[complex]]:
    """Solve ``A X = B`` given the packed factors of ``A`` (B as rows)."""
    n = len(lu)
    ncol = len(b[0])
    x = [list(b[perm[i]]) for i in range(n)]
    for i in range(n):
        row = lu[i]
        xi = x[i]
        for k in range(i):
            f = row[k]
            if f != 0:
                xk = x[k]
                for c in range(ncol):
                    xi[c] -= f * xk[c]
    for i in range(n - 1, -1, -1):
        row = lu[i]
        xi = x[i]
        for k in range(i + 1, n):
            f = row[k]
            if f != 0:
                xk = x[k]
                for c in range(ncol):
                    xi[c] -= f * xk[c]
        d = row[i]
        for c in range(ncol):
            xi[c] /= d
    return x


def lu_solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    ``b`` may be a vector or a matrix; the result has the same shape.
    """
    b_arr = np.asarray(b, dtype=complex)
    rows = as_rows(a)
    if len(rows) != b_arr.shape[0]:
        raise ValueError(f"shape mismatch: a is {len(rows)}x{len(rows[0])}, b has {b_arr.shape[0]} rows")
    lu, perm = lu_factor(rows)
    x = lu_substitute(lu, perm, as_rows(b_arr))
    return np.array(x, dtype=complex).reshape(b_arr.shape)


def inverse(a) -> np.ndarray:
    n = np.shape(a)[0]
    return lu_solve(a, np.eye(n, dtype=complex))


def det(a) -> complex:
    """Determinant via LU; an exactly singular pivot gives 0."""
    rows = as_rows(a)
    try:
        lu, perm = lu_factor(rows)
    except SingularMatrixError:
        return 0j
    d = 1 + 0j
    for i, row in enumerate(lu):
        d *= row[i]
    # parity of the permutation
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign * d


@dataclass(frozen=True)
class Polynomial:
    """Complex polynomial, coefficients in ascending degree."""

    coeffs: tuple[complex, ...]

    def __post_init__(self):
        c = [complex(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [0j]
        if not all(cmath.isfinite(x) for x in c):
            raise ValueError("polynomial has non-finite coefficients")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def monic(self) -> "Polynomial":
        lead = self.coeffs[-1]
        if lead == 0:
            raise ValueError("zero polynomial has no monic form")
        return Polynomial(tuple(c / lead for c in self.coeffs))

    def __call__(self, z: complex) -> complex:
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def rounding_bound(self, z: complex) -> float:
        """Bound on the rounding error of Horner evaluation at ``z``."""
        r = abs(z)
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * r + abs(c)
        return 4 * len(self.coeffs) * _EPS * acc


def char_poly(a) -> Polynomial:
    """det(lambda I - a) by the Faddeev-LeVerrier recurrence (monic)."""
    rows = as_rows(a)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("char_poly needs a square matrix")
    coeffs = [0j] * (n + 1)
    coeffs[n] = 1 + 0j
    # am holds a @ M_{k-1}; M_0 = 0
    am = [[0j] * n for _ in range(n)]
    for k in range(1, n + 1):
        mk = am
        for i in range(n):
            mk[i][i] += coeffs[n - k + 1]
        am = _matmul(rows, mk)
        trace = sum(am[i][i] for i in range(n))
        coeffs[n - k] = -trace / k
    return Polynomial(tuple(coeffs))


def _matmul(a: list[list[complex]], b: list[list[complex]]) -> list[list[complex]]:
    n, m, p = len(a), len(b), len(b[0])
    out = [[0j] * p for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for k in range(m):
            f = ai[k]
            if f != 0:
                bk = b[k]
                for j in range(p):
                    oi[j] += f * bk[j]
    return out


_ANGLE_OFFSET = (math.sqrt(5.0) - 1.0) / 2.0


def poly_roots(p: Polynomial | Sequence[complex], tol: float = 1e-12, max_iter: int = 500) -> list[complex]:
    """All complex roots by Durand-Kerner (Weierstrass) iteration.

    Starting points sit on a circle of radius ``1 + max|c_k / c_n|`` at an
    irrational angular offset. Iteration stops once every update is below
    ``tol`` (scaled by ``max(1, |z|)``) or once every residual is at the
    rounding floor of Horner evaluation; the latter is what terminates on
    multiple roots, where updates stall near sqrt(eps).

    Raises:
        ConvergenceError: after ``max_iter`` sweeps without convergence.
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(tuple(p))
    n = p.degree
    if n < 1:
        raise ValueError("poly_roots needs degree >= 1")
    q = p.monic()
    c = q.coeffs
    if n == 1:
        return [-c[0]]
    radius = 1.0 + max(abs(x) for x in c[:-1])
    z = [radius * cmath.exp(1j * (2 * math.pi * k / n + _ANGLE_OFFSET)) for k in range(n)]

    for _ in range(max_iter):
        worst = 0.0
        for i in range(n):
            zi = z[i]
            den = 1 + 0j
            for j in range(n):
                if j != i:
                    den *= zi - z[j]
            if den == 0:
                # coincident iterates: nudge apart
                z[i] = zi + tol * (1 + abs(zi)) * cmath.exp(1j * _ANGLE_OFFSET * (i + 1))
                worst = math.inf
                continue
            step = q(zi) / den
            z[i] = zi - step
            worst = max(worst, abs(step) / max(1.0, abs(z[i])))
        if worst < tol:
            return z
        if all(abs(q(zi)) <= q.rounding_bound(zi) for zi in z):
            return z
    raise ConvergenceError(
        f"Durand-Kerner did not converge in {max_iter} iterations",
        residuals=[abs(q(zi)) for zi in z],
    )


def _is_triangular(rows: list[list[complex]]) -> bool:
    n = len(rows)
    lower_zero = all(rows[i][j] == 0 for i in range(n) for j in range(i))
    upper_zero = all(rows[i][j] == 0 for i in range(n) for j in range(i + 1, n))
    return lower_zero or upper_zero


def _blocks(rows: list[list[complex]]) -> list[list[int]]:
    """Index sets of the irreducible diagonal blocks (connected components of the nonzero pattern)."""
    n = len(rows)
    seen = [False] * n
    out = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        stack, comp = [start], []
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if not seen[j] and (rows[i][j] != 0 or rows[j][i] != 0):
                    seen[j] = True
                    stack.append(j)
        out.append(sorted(comp))
    return out


def eigenvalues(a) -> list[complex]:
    """Eigenvalues as roots of the characteristic polynomial.

    Sorted by ascending real part (then imaginary part). The matrix is first
    split into decoupled diagonal blocks, each handled on its own, and a
    triangular block returns its diagonal directly. Accuracy degrades to
    about sqrt(eps) for defective or tightly clustered spectra within a block.
    """
    rows = as_rows(a)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("eigenvalues needs a square matrix")
    if n > 16:
        raise ValueError("eigenvalues supports n <= 16")
    if _is_triangular(rows):
        vals = [rows[i][i] for i in range(n)]
    else:
        vals = []
        for idx in _blocks(rows):
            sub = [[rows[i][j] for j in idx] for i in idx]
            if _is_triangular(sub):
                vals.extend(sub[k][k] for k in range(len(idx)))
            else:
                vals.extend(poly_roots(char_poly(sub)))
    return sorted(vals, key=lambda z: (z.real, z.imag))
