"""Primary matrix functions evaluated by several independent routes.

:func:`apply_taylor` sums the power series directly and needs no spectral
information, so every other route is tested against it.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import (ComplexSpectrum, ImaginaryResidue, NotAnnihilating,
                     NotTriangular, ParseError,
                     SeriesDivergenceGuard, SpectraOverlap, StructureMismatch)
from .spectra import Spectrum, sym_eigs

__all__ = [
    "STRUCTURES", "Matrix", "SylvesterSolution", "as_matrix", "apply_taylor",
    "apply_newton", "apply_triangular_explicit", "apply_circulant",
    "solve_sylvester", "apply_block_triangular", "apply_companion",
    "companion_matrix", "STRUCT_RTOL",
]

STRUCTURES = ("general", "upper-triangular", "block-upper-triangular",
              "circulant", "symmetric", "anti-bidiagonal", "jacobi")
STRUCT_RTOL = 1e-12
CIRC_IMAG_RTOL = 1e-9
SYLVESTER_GAP = 1e-8
ANNIHILATE_RTOL = 1e-8


def _scale(a):
    return max(1.0, float(np.abs(a).max(initial=0.0)))


def _validate(a, structure, blocks):
    n = a.shape[0]
    if structure == "general":
        return
    if structure == "upper-triangular":
        if np.any(np.tril(a, -1) != 0):
            raise StructureMismatch("nonzero entries below the diagonal")
    elif structure == "block-upper-triangular":
        if blocks is None or len(blocks) != 2 or sum(blocks) != n or min(blocks) < 1:
            raise StructureMismatch(f"bad block sizes {blocks!r} for order {n}")
        if np.any(a[blocks[0]:, :blocks[0]] != 0):
            raise StructureMismatch("nonzero lower-left block")
    elif structure == "circulant":
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        if np.abs(a - a[0][idx]).max(initial=0.0) > STRUCT_RTOL * _scale(a):
            raise StructureMismatch("rows are not cyclic shifts of the first row")
    elif structure in ("symmetric", "anti-bidiagonal", "jacobi"):
        if np.abs(a - a.T).max(initial=0.0) > STRUCT_RTOL * _scale(a):
            raise StructureMismatch("matrix is not symmetric")
        if structure == "anti-bidiagonal":
            s = np.add.outer(np.arange(n), np.arange(n))
            if np.any(a[(s != n - 1) & (s != n)] != 0):
                raise StructureMismatch("entries outside the anti-bidiagonal band")
        if structure == "jacobi":
            if np.any(np.triu(a, 2) != 0) or np.any(np.tril(a, -2) != 0):
                raise StructureMismatch("not tridiagonal")
            if n > 1 and np.any(np.diagonal(a, -1) <= 0):
                raise StructureMismatch("subdiagonal must be positive")
            if min(sym_eigs(a).values) < -1e-9 * _scale(a):
                raise StructureMismatch("not nonnegative definite")
    else:
        raise StructureMismatch(f"unknown structure {structure!r}")


@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense square real matrix with a verified structure tag.

    ``blocks`` is ``(n1, n2)`` for ``block-upper-triangular`` matrices.
    Entries are copied and made read-only.
    """

    entries: np.ndarray
    structure: str = "general"
    blocks: tuple = None

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.float64, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise StructureMismatch(f"expected a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise StructureMismatch("entries must be finite")
        blocks = tuple(int(b) for b in self.blocks) if self.blocks is not None else None
        _validate(a, self.structure, blocks)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self):
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __repr__(self):
        return f"Matrix({self.entries.tolist()!r}, structure={self.structure!r})"

    def to_dict(self):
        d = {"n": self.n, "rows": self.entries.tolist(), "structure": self.structure}
        if self.blocks is not None:
            d["blocks"] = list(self.blocks)
        return d

    @classmethod
    def from_dict(cls, d):
        try:
            rows = d["rows"]
            n = int(d.get("n", len(rows)))
            structure = d.get("structure", "general")
            blocks = d.get("blocks")
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"malformed matrix object: {exc}") from exc
        try:
            a = np.array(rows, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"rows are not a numeric table: {exc}") from exc
        if a.shape != (n, n):
            raise ParseError(f"declared n={n} but rows have shape {a.shape}")
        return cls(a, structure, blocks)


def as_matrix(a, structure=None):
    """Coerce arrays to :class:`Matrix`; a given ``structure`` is validated."""
    if isinstance(a, Matrix):
        if structure is None or structure == a.structure:
            return a
        return Matrix(a.entries, structure)
    return Matrix(np.asarray(a, dtype=np.float64), structure or "general")


def _tagged(entries, like):
    """Result matrix carrying the input's tag when f preserves it."""
    keep = {"upper-triangular": "upper-triangular",
            "block-upper-triangular": "block-upper-triangular",
            "circulant": "circulant", "symmetric": "symmetric",
            "jacobi": "symmetric", "anti-bidiagonal": "symmetric"}
    tag = keep.get(like.structure, "general")
    if tag in ("symmetric", "circulant"):
        try:
            return Matrix(entries, tag)
        except StructureMismatch:
            return Matrix(entries)
    return Matrix(entries, tag, like.blocks if tag == "block-upper-triangular" else None)


def apply_taylor(f, a):
    """``f(A)`` as the power series ``sum a_j A^j``.

    Polynomials use Horner's rule; named functions sum their series until
    a term drops below ``1e-16 (1 + |partial sum|)`` in max-norm, after
    scaling ``A`` by ``2^-s`` so its infinity norm is at most one
    (squaring back for exp/cosh/sinh, double-angle steps for sin/cos).
    """
    m = as_matrix(a)
    poly, named = f.dense
    out, status = _kernels.taylor(poly, named, m.entries[None, :, :])
    if status[0]:
        raise SeriesDivergenceGuard("series terms kept growing")
    return _tagged(out[0], m)


def _real_nodes(spectrum, n):
    vals = spectrum.values if isinstance(spectrum, Spectrum) else tuple(spectrum)
    if len(vals) != n:
        raise ValueError(f"spectrum has {len(vals)} values for a matrix of order {n}")
    out = []
    for v in vals:
        if isinstance(v, complex) or np.iscomplexobj(v):
            if complex(v).imag != 0:
                raise ComplexSpectrum(f"nonreal node {v!r}")
            v = complex(v).real
        out.append(float(v))
    return np.array(sorted(out))


def apply_newton(f, a, spectrum):
    """``f(A)`` from its Newton interpolation form at the eigenvalues.

    ``f[r_1] I + f[r_1, r_2] (A - r_1 I) + ...`` with nodes sorted
    ascending.  The caller supplies the (real) spectrum.
    """
    m = as_matrix(a)
    nodes = _real_nodes(spectrum, m.n)
    poly, named = f.dense
    out = _kernels.newton(poly, named, m.entries[None], nodes[None])
    return _tagged(out[0], m)


def apply_triangular_explicit(f, a):
    """``f(A)`` for upper-triangular ``A`` via sums over increasing index chains.

    Entry ``(i, j)``, ``i < j``, is the sum over ``i < i_1 < ... < i_k < j``
    of ``a_{i i_1} ... a_{i_k j} f[a_ii, a_{i_1 i_1}, ..., a_jj]``.
    """
    arr = np.asarray(a.entries if isinstance(a, Matrix) else a, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NotTriangular("expected a square matrix")
    if np.any(np.tril(arr, -1) != 0):
        raise NotTriangular("nonzero entries below the diagonal")
    m = as_matrix(arr, "upper-triangular")
    poly, named = f.dense
    return Matrix(_kernels.triangular_explicit(poly, named, m.entries[None])[0],
                  "upper-triangular")


def apply_circulant(f, row):
    """First row of ``f(A)`` for the circulant ``A`` with first row ``row``.

    Evaluates ``f`` on the spectrum and transforms back; raises
    :class:`ImaginaryResidue` if the result is not real to
    ``1e-9 (1 + max |f(lambda)|)``.
    """
    row = np.asarray(row, dtype=np.float64).reshape(-1)
    if row.size == 0:
        raise ValueError("empty row")
    poly, named = f.dense
    first, _, fv = _kernels.circulant_rows(poly, named, row[None])
    bound = CIRC_IMAG_RTOL * (1.0 + np.abs(fv).max())
    if np.abs(first.imag).max() >= bound:
        raise ImaginaryResidue(f"imaginary residue {np.abs(first.imag).max():.3g}")
    return [float(v) for v in first[0].real]


@dataclass(frozen=True, eq=False)
class SylvesterSolution:
    X: np.ndarray
    residual: float


def _gepp_solve(k, rhs):
    """Gaussian elimination with partial pivoting; None when singular."""
    k = np.array(k, dtype=np.float64)
    rhs = np.array(rhs, dtype=np.float64)
    n = k.shape[0]
    thresh = 1e-13 * max(1.0, np.abs(k).max(initial=0.0))
    for c in range(n):
        p = c + int(np.argmax(np.abs(k[c:, c])))
        if abs(k[p, c]) <= thresh:
            return None
        if p != c:
            k[[c, p]] = k[[p, c]]
            rhs[[c, p]] = rhs[[p, c]]
        factors = k[c + 1:, c] / k[c, c]
        k[c + 1:, c:] -= np.outer(factors, k[c, c:])
        rhs[c + 1:] -= factors * rhs[c]
    x = np.zeros(n)
    for r in range(n - 1, -1, -1):
        x[r] = (rhs[r] - k[r, r + 1:] @ x[r + 1:]) / k[r, r]
    return x


def _class_spectrum(m):
    if m.structure in ("upper-triangular",):
        return np.diagonal(m.entries).astype(complex)
    if m.structure in ("symmetric", "jacobi", "anti-bidiagonal"):
        return np.array(sym_eigs(m.entries).values, dtype=complex)
    if m.n == 1:
        return np.array([m.entries[0, 0]], dtype=complex)
    if np.all(np.tril(m.entries, -1) == 0):
        return np.diagonal(m.entries).astype(complex)
    return None


def solve_sylvester(a, c, b):
    """Unique ``X`` with ``A X - X C = B`` (Kronecker form, partial pivoting)."""
    ma, mc = as_matrix(a), as_matrix(c)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = ma.n, mc.n
    if b.shape != (n1, n2):
        raise ValueError(f"B has shape {b.shape}, expected {(n1, n2)}")
    sa, sc = _class_spectrum(ma), _class_spectrum(mc)
    if sa is not None and sc is not None:
        gap = np.abs(sa[:, None] - sc[None, :]).min()
        if gap <= SYLVESTER_GAP:
            raise SpectraOverlap(f"spectral gap {gap:.3g} between the diagonal blocks")
    # column-major vec: vec(AX - XC) = (I kron A - C^T kron I) vec(X)
    k = np.kron(np.eye(n2), ma.entries) - np.kron(mc.entries.T, np.eye(n1))
    x = _gepp_solve(k, b.reshape(-1, order="F"))
    if x is None:
        raise SpectraOverlap("Sylvester system is singular to working precision")
    X = x.reshape((n1, n2), order="F")
    residual = float(np.abs(ma.entries @ X - X @ mc.entries - b).max(initial=0.0))
    if residual >= 1e-8 * (1.0 + np.abs(b).max(initial=0.0)):
        raise SpectraOverlap(f"ill-conditioned Sylvester system (residual {residual:.3g})")
    return SylvesterSolution(X, residual)


def apply_block_triangular(f, m, blocks=None):
    """``f(M)`` for ``M = [[A, B], [0, C]]`` with disjoint ``sigma(A)``, ``sigma(C)``.

    Returns ``[[f(A), f(A) X - X f(C)], [0, f(C)]]`` where ``A X - X C = B``.
    """
    if not isinstance(m, Matrix) or m.structure != "block-upper-triangular":
        if blocks is None:
            raise StructureMismatch("block sizes required")
        m = Matrix(np.asarray(m, dtype=np.float64), "block-upper-triangular", blocks)
    n1, _ = m.blocks
    e = m.entries
    a, b, c = e[:n1, :n1], e[:n1, n1:], e[n1:, n1:]
    sol = solve_sylvester(a, c, b)
    fa = apply_taylor(f, a).entries
    fc = apply_taylor(f, c).entries
    out = np.zeros_like(e)
    out[:n1, :n1] = fa
    out[n1:, n1:] = fc
    out[:n1, n1:] = fa @ sol.X - sol.X @ fc
    return Matrix(out, "block-upper-triangular", m.blocks)


def companion_matrix(minpoly):
    """Companion of a monic ascending coefficient list (subdiagonal ones,
    negated coefficients in the last column)."""
    p = np.asarray(minpoly, dtype=np.float64)
    m = p.size - 1
    if m < 1:
        raise ValueError("polynomial must have degree >= 1")
    c = np.zeros((m, m))
    c[np.arange(1, m), np.arange(m - 1)] = 1.0
    c[:, -1] = -p[:-1]
    return c


def apply_companion(f, a, minpoly):
    """``f(A) = sum_j f(C)_{j1} A^(j-1)`` with ``C`` the companion of ``minpoly``.

    ``minpoly`` is ascending and monic and must annihilate ``A`` to
    ``1e-8 (1 + |A|_max^m)``.
    """
    m = as_matrix(a)
    p = np.asarray(minpoly, dtype=np.float64).reshape(-1)
    deg = p.size - 1
    if deg < 1 or deg > m.n:
        raise ValueError(f"polynomial degree {deg} outside 1..{m.n}")
    if p[-1] != 1.0:
        raise ValueError("polynomial must be monic")
    e = m.entries
    resid = np.abs(_kernels.matpoly(p, e[None])[0]).max()
    amax = np.abs(e).max(initial=0.0)
    if resid > ANNIHILATE_RTOL * (1.0 + amax ** deg):
        raise NotAnnihilating(f"|p(A)|_max = {resid:.3g}")
    first = apply_taylor(f, companion_matrix(p)).entries[:, 0]
    out = np.zeros_like(e)
    power = np.eye(m.n)
    for j in range(deg):
        out += first[j] * power
        power = power @ e
    return _tagged(out, m)
