"""Eigenvalues for the matrix classes the library works with.

There is deliberately no general nonsymmetric eigensolver: triangular
spectra are read off the diagonal, circulant spectra come from a direct
root-of-unity sum, and symmetric matrices use cyclic Jacobi rotations.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NoConvergence, NotSymmetric

__all__ = ["Spectrum", "sym_eigs", "circ_spectrum", "eig2x2_sym",
           "spectral_radius", "diagonal_spectrum", "SYM_RTOL"]

SYM_RTOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by real part, then imaginary part."""

    values: tuple
    method: str

    def __post_init__(self):
        vals = sorted(self.values, key=lambda v: (v.real, v.imag))
        object.__setattr__(self, "values", tuple(vals))

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def is_real(self):
        return all(not isinstance(v, complex) or v.imag == 0 for v in self.values)

    def as_array(self):
        return np.array(self.values)


def _check_symmetric(a, rtol=SYM_RTOL):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if np.abs(a - a.T).max(initial=0.0) > rtol * scale:
        raise NotSymmetric("matrix is not symmetric")
    return a


def sym_eigs(a):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps."""
    a = _check_symmetric(a)
    a = 0.5 * (a + a.T)
    w = _kernels.jacobi_eigvals(a[None, :, :])[0]
    return Spectrum(tuple(float(v) for v in w), "jacobi-rotation")


def diagonal_spectrum(a):
    """Spectrum of a triangular matrix, read off its diagonal."""
    d = np.diagonal(np.asarray(a, dtype=np.float64))
    return Spectrum(tuple(float(v) for v in d), "diagonal-readoff")


def circ_spectrum(row):
    """Eigenvalues ``sum_j w^(kj) a_j`` of the circulant with first row ``row``."""
    row = np.asarray(row, dtype=np.float64).reshape(-1)
    n = row.size
    if n == 0:
        raise ValueError("empty row")
    vals = []
    for k in range(n):
        acc = 0j
        for j in range(n):
            acc += row[j] * np.exp(2j * np.pi * k * j / n)
        vals.append(complex(acc))
    return Spectrum(tuple(vals), "dft")


def eig2x2_sym(a11, a22, b):
    """Closed-form eigenvalues ``(r1, r2)``, ``r1 <= r2``, of ``[[a11, b], [b, a22]]``."""
    mid = 0.5 * (a11 + a22)
    rad = 0.5 * math.hypot(a11 - a22, 2.0 * b)
    return (mid - rad, mid + rad)


def spectral_radius(a, rtol=1e-10, max_iter=10_000):
    """Spectral radius of an entrywise nonnegative matrix.

    Power iteration on ``A + I`` keeps the iterate positive, so the
    Collatz-Wielandt quotients ``((A+I)x)_i / x_i`` bracket the Perron root.
    The upper bracket is returned, which never undershoots it.  Iteration
    stops when the bracket closes to ``rtol`` or, for reducible matrices
    where it cannot close, when both the upper bracket and the Rayleigh
    quotient have settled to ``rtol``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    if np.any(a < 0):
        raise ValueError("matrix must be entrywise nonnegative")
    n = a.shape[0]
    shifted = a + np.eye(n)
    x = np.full(n, 1.0 / math.sqrt(n))
    prev_hi = prev_rq = None
    for _ in range(max_iter):
        y = shifted @ x
        live = x > 0
        q = y[live] / x[live]
        lo, hi = q.min(), q.max()
        rq = float(x @ y)
        x = y / np.linalg.norm(y)
        if hi - lo <= rtol * hi:
            return float(hi - 1.0)
        # reducible matrices never close the bracket; settle on a stable upper bound
        if (prev_hi is not None and abs(hi - prev_hi) <= rtol * hi
                and abs(rq - prev_rq) <= rtol * abs(rq)):
            return float(hi - 1.0)
        prev_hi, prev_rq = hi, rq
    raise NoConvergence(f"power iteration did not converge in {max_iter} steps")
