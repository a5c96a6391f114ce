"""Constructors and checks for the structured matrices used by the checkers."""

from dataclasses import dataclass

import numpy as np

from .errors import NotSymmetric, PatternViolation, StructureMismatch
from .matfun import Matrix, as_matrix

__all__ = [
    "AntiBidiagonalSpec", "shift_nilpotent", "circulant_from_row",
    "anti_bidiagonal", "anti_bidiagonal_positions", "antipower_pattern_verify",
    "embed_pad_zero", "embed_antidiag", "is_jacobi",
]


@dataclass(frozen=True)
class AntiBidiagonalSpec:
    """Order ``n`` and entries ``a = (a_1, ..., a_n)`` of a symmetric
    anti-bidiagonal matrix."""

    n: int
    a: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        if self.n < 1 or len(a) != self.n:
            raise ValueError(f"need n >= 1 and n entries, got n={self.n}, {len(a)} entries")
        object.__setattr__(self, "a", a)


def shift_nilpotent(n):
    """Ones on the first superdiagonal."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Matrix(np.eye(n, k=1), "upper-triangular")


def circulant_from_row(row):
    """Circulant whose rows are successive cyclic right-shifts of ``row``."""
    row = np.asarray(row, dtype=np.float64).reshape(-1)
    n = row.size
    if n == 0:
        raise ValueError("empty row")
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return Matrix(row[idx], "circulant")


def anti_bidiagonal_positions(n):
    """0-based upper positions ``(i, j)`` holding ``a_n, a_{n-1}, ..., a_1``.

    The entries zig-zag from the corner: ``a_{n-2m}`` sits at
    ``(m, n-1-m)`` and ``a_{n-2m-1}`` at ``(m+1, n-1-m)``.
    """
    pos = []
    for t in range(n):
        m = t // 2
        pos.append((m, n - 1 - m) if t % 2 == 0 else (m + 1, n - 1 - m))
    return pos


def anti_bidiagonal(spec):
    """Symmetric anti-bidiagonal matrix built from ``spec.a``."""
    n = spec.n
    a = np.zeros((n, n))
    for t, (i, j) in enumerate(anti_bidiagonal_positions(n)):
        v = spec.a[n - 1 - t]
        a[i, j] = v
        a[j, i] = v
    return Matrix(a, "anti-bidiagonal")


def _prod(values):
    out = 1.0
    for v in values:
        out *= v
    return out


def antipower_pattern_verify(spec, qmax, zero_atol=1e-12, prod_rtol=1e-10):
    """Check the zero patterns and corner products of anti-bidiagonal powers.

    For ``q = 1..qmax`` (1-based indices):

    * ``A^(2q-1)[i, j] = 0`` when ``2 <= i + j <= n - q + 1``;
    * ``A^(2q)[i, j] = 0`` when ``q + 1 <= j - i <= n - 1``;
    * ``A^(2q-1)[1, n-q+1] = a_n a_{n-1} ... a_{n-2q+2}`` for ``q <= (n+1)//2``;
    * ``A^(2q)[1, 1+q] = a_n a_{n-1} ... a_{n-2q+1}`` for ``q <= n//2``.

    Returns counts of the checks made; raises :class:`PatternViolation`
    at the first failure.
    """
    n = spec.n
    a = anti_bidiagonal(spec).entries
    aa = {k: v for k, v in zip(range(1, n + 1), spec.a)}
    powers = {1: a.copy()}
    for p in range(2, 2 * qmax + 1):
        powers[p] = powers[p - 1] @ a
    zeros = products = 0
    for q in range(1, qmax + 1):
        odd, even = powers[2 * q - 1], powers[2 * q]
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                if 2 <= i + j <= n - q + 1:
                    zeros += 1
                    if abs(odd[i - 1, j - 1]) > zero_atol:
                        raise PatternViolation(2 * q - 1, i, j, odd[i - 1, j - 1], 0.0)
                if q + 1 <= j - i <= n - 1:
                    zeros += 1
                    if abs(even[i - 1, j - 1]) > zero_atol:
                        raise PatternViolation(2 * q, i, j, even[i - 1, j - 1], 0.0)
        if q <= (n + 1) // 2:
            want = _prod(aa[k] for k in range(n - 2 * q + 2, n + 1))
            got = odd[0, n - q]
            products += 1
            if abs(got - want) > prod_rtol * max(abs(want), 1e-300):
                raise PatternViolation(2 * q - 1, 1, n - q + 1, got, want)
        if q <= n // 2:
            want = _prod(aa[k] for k in range(n - 2 * q + 1, n + 1))
            got = even[0, q]
            products += 1
            if abs(got - want) > prod_rtol * max(abs(want), 1e-300):
                raise PatternViolation(2 * q, 1, q + 1, got, want)
    return {"n": n, "qmax": qmax, "zero_checks": zeros, "product_checks": products}


def embed_pad_zero(a):
    """Append one zero row and column; triangular and symmetric tags survive."""
    m = as_matrix(a)
    n = m.n
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = m.entries
    tag = m.structure if m.structure in ("upper-triangular", "symmetric") else "general"
    if m.structure in ("jacobi", "anti-bidiagonal"):
        tag = "symmetric"
    return Matrix(out, tag)


def embed_antidiag(b, odd_pad=False):
    """``[[0, B], [B, 0]]`` for symmetric ``B``, plus a zero row/column if ``odd_pad``."""
    b = np.asarray(b.entries if isinstance(b, Matrix) else b, dtype=np.float64)
    try:
        Matrix(b, "symmetric")
    except StructureMismatch as exc:
        raise NotSymmetric(str(exc)) from exc
    m = b.shape[0]
    size = 2 * m + (1 if odd_pad else 0)
    out = np.zeros((size, size))
    out[:m, m:2 * m] = b
    out[m:2 * m, :m] = b
    return Matrix(out, "symmetric")


def is_jacobi(a):
    """Tridiagonal, symmetric, positive subdiagonal and nonnegative definite."""
    arr = np.asarray(a.entries if isinstance(a, Matrix) else a, dtype=np.float64)
    try:
        Matrix(arr, "jacobi")
    except StructureMismatch:
        return False
    return True
