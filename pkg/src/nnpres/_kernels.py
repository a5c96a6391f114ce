"""Hot numeric kernels with a numba path and a batched pure-numpy path.

Every kernel takes an entire function in dense form: ``poly`` holds the
ascending polynomial coefficients and ``named`` holds the weights of
``(exp, sinh, cosh, sin, cos)``.  Batched inputs carry the batch on axis 0.

The backend is chosen at import time.  Set ``NNPRES_DISABLE_NUMBA=1`` (or
call :func:`set_backend`) to force the numpy path.
"""

import math
import os

import numpy as np

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    _HAVE_NUMBA = False

__all__ = [
    "backend", "set_backend", "derivs", "eval_complex", "divdiff_prefix",
    "divdiff", "matpoly", "taylor", "jacobi_eigvals", "newton",
    "triangular_explicit", "circulant_rows", "TERM_RTOL", "MAX_SERIES_TERMS",
]

TERM_RTOL = 1e-16
MAX_SERIES_TERMS = 200
JACOBI_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 50
CONF_RTOL = 1e-9

_FACT = np.array([math.factorial(k) for k in range(171)], dtype=np.float64)


def _env_disabled():
    return os.environ.get("NNPRES_DISABLE_NUMBA", "").strip().lower() in (
        "1", "true", "yes", "on")


_BACKEND = "numba" if (_HAVE_NUMBA and not _env_disabled()) else "numpy"


def backend():
    """Name of the active backend, ``'numba'`` or ``'numpy'``."""
    return _BACKEND


def set_backend(name):
    """Switch the active backend; returns the previous one."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _BACKEND = _BACKEND, name
    return prev


if _HAVE_NUMBA:
    def _jit(fn):
        return numba.njit(cache=True)(fn)

    def _jit_inline(fn):
        # small helpers taking arrays: inlining avoids per-call refcounting
        return numba.njit(cache=True, inline="always")(fn)
else:  # pragma: no cover
    def _jit(fn):
        return fn

    _jit_inline = _jit


# ---------------------------------------------------------------------------
# scalar function evaluation
# ---------------------------------------------------------------------------

def _named_derivs_np(named, x, k):
    """(m, k+1) array of derivatives of the named part at real points x."""
    out = np.zeros((x.shape[0], k + 1))
    if named[0]:
        out += named[0] * np.exp(x)[:, None]
    if named[1] or named[2]:
        sh, ch = np.sinh(x), np.cosh(x)
        for j in range(k + 1):
            even = j % 2 == 0
            out[:, j] += named[1] * (sh if even else ch)
            out[:, j] += named[2] * (ch if even else sh)
    if named[3] or named[4]:
        sn, cs = np.sin(x), np.cos(x)
        cyc_sin = (sn, cs, -sn, -cs)
        cyc_cos = (cs, -sn, -cs, sn)
        for j in range(k + 1):
            out[:, j] += named[3] * cyc_sin[j % 4] + named[4] * cyc_cos[j % 4]
    return out


def _derivs_np(poly, named, x, k):
    x = np.asarray(x, dtype=np.float64)
    out = _named_derivs_np(named, x, k)
    d = poly.shape[0] - 1
    for j in range(min(k, d) + 1):
        # coefficients of the j-th derivative: c_i * i! / (i-j)!
        c = poly[j:] * (_FACT[j:d + 1] / _FACT[:d + 1 - j])
        acc = np.full(x.shape, c[-1])
        for ci in c[-2::-1]:
            acc = acc * x + ci
        out[:, j] += acc
    return out


@_jit
def _deriv_table(poly, k):
    # row j holds the ascending coefficients of the j-th derivative
    d = poly.shape[0] - 1
    c = np.zeros((k + 1, d + 1))
    for j in range(min(k, d) + 1):
        for i in range(j, d + 1):
            c[j, i - j] = poly[i] * (_FACT[i] / _FACT[i - j])
    return c


@_jit_inline
def _point_derivs(c, named, xv, k, buf, r):
    # writes f^(j)(xv), j = 0..k, into buf[r, :k+1].  Indexing the 2-d
    # buffer avoids a refcounted row view per call, and each named term
    # is added inside its own branch so the compiler cannot hoist the
    # transcendental calls into unconditional selects.
    d = c.shape[1] - 1
    for j in range(k + 1):
        acc = 0.0
        for i in range(d - j, -1, -1):
            acc = acc * xv + c[j, i]
        buf[r, j] = acc
    if named[0] != 0.0:
        ex = named[0] * math.exp(xv)
        for j in range(k + 1):
            buf[r, j] += ex
    if named[1] != 0.0 or named[2] != 0.0:
        sh, ch = math.sinh(xv), math.cosh(xv)
        h_even = named[1] * sh + named[2] * ch
        h_odd = named[1] * ch + named[2] * sh
        for j in range(k + 1):
            buf[r, j] += h_odd if j & 1 else h_even
    if named[3] != 0.0 or named[4] != 0.0:
        sn, cs = math.sin(xv), math.cos(xv)
        t0 = named[3] * sn + named[4] * cs
        t1 = named[3] * cs - named[4] * sn
        for j in range(k + 1):
            # derivatives cycle t0, t1, -t0, -t1
            tv = t1 if j & 1 else t0
            buf[r, j] += -tv if j & 2 else tv


@_jit
def _derivs_nb(poly, named, x, k):
    m = x.shape[0]
    out = np.zeros((m, k + 1))
    c = _deriv_table(poly, k)
    for t in range(m):
        _point_derivs(c, named, x[t], k, out, t)
    return out


def derivs(poly, named, x, k):
    """Derivatives ``f^(j)(x_t)`` for ``j = 0..k``; shape ``(len(x), k+1)``."""
    x = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    if _BACKEND == "numba":
        return _derivs_nb(poly, named, x, int(k))
    return _derivs_np(poly, named, x, int(k))


def _eval_complex_np(poly, named, z):
    acc = np.full(z.shape, complex(poly[-1]))
    for c in poly[-2::-1]:
        acc = acc * z + c
    fns = (np.exp, np.sinh, np.cosh, np.sin, np.cos)
    for w, fn in zip(named, fns):
        if w:
            acc = acc + w * fn(z)
    return acc


@_jit
def _eval_complex_nb(poly, named, z):
    m = z.shape[0]
    out = np.empty(m, dtype=np.complex128)
    d = poly.shape[0] - 1
    for t in range(m):
        zv = z[t]
        acc = poly[d] + 0j
        for i in range(d - 1, -1, -1):
            acc = acc * zv + poly[i]
        if named[0] != 0.0:
            acc += named[0] * np.exp(zv)
        if named[1] != 0.0:
            acc += named[1] * np.sinh(zv)
        if named[2] != 0.0:
            acc += named[2] * np.cosh(zv)
        if named[3] != 0.0:
            acc += named[3] * np.sin(zv)
        if named[4] != 0.0:
            acc += named[4] * np.cos(zv)
        out[t] = acc
    return out


def eval_complex(poly, named, z):
    """Values of f at complex points z (1-d)."""
    z = np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)
    if _BACKEND == "numba":
        return _eval_complex_nb(poly, named, z)
    return _eval_complex_np(poly, named, z)


# ---------------------------------------------------------------------------
# divided differences
# ---------------------------------------------------------------------------

def _divdiff_prefix_np(poly, named, nodes):
    nodes = np.sort(nodes, axis=1)
    b, k = nodes.shape
    tau = CONF_RTOL * (1.0 + np.abs(nodes).max(axis=1))
    dv = _derivs_np(poly, named, nodes.reshape(-1), k - 1).reshape(b, k, k)
    out = np.empty((b, k))
    level = dv[:, :, 0].copy()
    out[:, 0] = level[:, 0]
    for d in range(1, k):
        gap = nodes[:, d:] - nodes[:, :k - d]
        conf = gap < tau[:, None]
        safe = np.where(conf, 1.0, gap)
        rec = (level[:, 1:] - level[:, :-1]) / safe
        level = np.where(conf, dv[:, :k - d, d] / _FACT[d], rec)
        out[:, d] = level[:, 0]
    return out


@_jit_inline
def _divdiff_prefix_one(c, named, x, k, out, r, dv, level):
    # x[:k] sorted ascending; writes f[x_0..x_d] into out[r, d].  c is the
    # derivative table for order len(x) - 1; dv and level are scratch.
    tau = CONF_RTOL * (1.0 + max(abs(x[0]), abs(x[k - 1])))
    confluent = False
    for i in range(k - 1):
        if x[i + 1] - x[i] < tau:
            confluent = True
    for i in range(k):
        _point_derivs(c, named, x[i], k - 1 if confluent else 0, dv, i)
        level[i] = dv[i, 0]
    out[r, 0] = level[0]
    for d in range(1, k):
        for i in range(k - d):
            gap = x[i + d] - x[i]
            if gap < tau:
                level[i] = dv[i, d] / _FACT[d]
            else:
                level[i] = (level[i + 1] - level[i]) / gap
        out[r, d] = level[0]


@_jit_inline
def _sort_row(src, t, dst):
    # insertion sort of src[t] into dst; rows hold a handful of entries
    for u in range(src.shape[1]):
        v = src[t, u]
        w = u
        while w > 0 and dst[w - 1] > v:
            dst[w] = dst[w - 1]
            w -= 1
        dst[w] = v


@_jit
def _divdiff_prefix_nb(poly, named, nodes):
    b, k = nodes.shape
    out = np.empty((b, k))
    c = _deriv_table(poly, k - 1)
    dv = np.empty((k, k))
    level = np.empty(k)
    x = np.empty(k)
    for t in range(b):
        _sort_row(nodes, t, x)
        _divdiff_prefix_one(c, named, x, k, out, t, dv, level)
    return out


def divdiff_prefix(poly, named, nodes):
    """All leading divided differences of the sorted node rows.

    ``out[t, d] = f[x_0, ..., x_d]`` with the nodes of row ``t`` sorted.
    """
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    if nodes.ndim == 1:
        nodes = nodes[None, :]
    if _BACKEND == "numba":
        return _divdiff_prefix_nb(poly, named, nodes)
    return _divdiff_prefix_np(poly, named, nodes)


def divdiff(poly, named, nodes):
    """Full-order divided difference of each node row; shape ``(B,)``."""
    return divdiff_prefix(poly, named, nodes)[:, -1]


# ---------------------------------------------------------------------------
# matrix functions via power series
# ---------------------------------------------------------------------------

def _matpoly_np(poly, a):
    b, n, _ = a.shape
    eye = np.eye(n)
    acc = np.broadcast_to(poly[-1] * eye, a.shape).copy()
    for c in poly[-2::-1]:
        acc = acc @ a
        if c:
            acc += c * eye
    return acc


def _maxabs_np(x):
    return np.abs(x).max(axis=(1, 2))


def _series_np(a, which):
    """Power series of exp (which=0), exp splitting (odd/even) or sin/cos.

    Returns (even_part, odd_part, status) with alternating signs for the
    trigonometric case (which=1).
    """
    b, n, _ = a.shape
    eye = np.eye(n)
    term = np.broadcast_to(eye, a.shape).copy()
    even = term.copy()
    odd = np.zeros_like(a)
    grow = np.zeros(b, dtype=np.int64)
    prev = _maxabs_np(term)
    done = np.zeros(b, dtype=bool)
    status = np.zeros(b, dtype=np.int64)
    for j in range(1, 10_000):
        term = term @ a / j
        if which == 1 and j % 2 == 0 and (j // 2) % 2 == 1:
            sgn = -1.0
        elif which == 1 and j % 2 == 1 and ((j - 1) // 2) % 2 == 1:
            sgn = -1.0
        else:
            sgn = 1.0
        tn = _maxabs_np(term)
        active = ~done
        m = active[:, None, None]
        if j % 2 == 0:
            even = np.where(m, even + sgn * term, even)
        else:
            odd = np.where(m, odd + sgn * term, odd)
        part = _maxabs_np(even) + _maxabs_np(odd)
        grow = np.where(tn > prev, grow + 1, 0)
        prev = tn
        status = np.where(active & (grow >= MAX_SERIES_TERMS), 1, status)
        done |= (tn < TERM_RTOL * (1.0 + part)) | (grow >= MAX_SERIES_TERMS)
        if done.all():
            break
    return even, odd, status


def _taylor_np(poly, named, a):
    a = np.asarray(a, dtype=np.float64)
    b, n, _ = a.shape
    out = _matpoly_np(poly, a)
    status = np.zeros(b, dtype=np.int64)
    if not np.any(named):
        return out, status
    norm = np.abs(a).sum(axis=2).max(axis=1)
    s = np.where(norm > 1.0, np.ceil(np.log2(np.maximum(norm, 1.0))), 0.0)
    s = s.astype(np.int64)
    smax = int(s.max())
    eye = np.eye(n)
    scaled = a / (2.0 ** s)[:, None, None]
    if named[0] or named[1] or named[2]:
        ev, od, st = _series_np(scaled, 0)
        status |= st
        ep = ev + od
        em = ev - od
        # squaring recovers exp(+-A); unscaled rows keep their split series
        cosh_direct, sinh_direct = ev, od
        for r in range(smax):
            m = (s > r)[:, None, None]
            ep = np.where(m, ep @ ep, ep)
            em = np.where(m, em @ em, em)
        scaledm = (s > 0)[:, None, None]
        ch = np.where(scaledm, 0.5 * (ep + em), cosh_direct)
        sh = np.where(scaledm, 0.5 * (ep - em), sinh_direct)
        out += named[0] * ep + named[1] * sh + named[2] * ch
    if named[3] or named[4]:
        cs, sn, st = _series_np(scaled, 1)
        status |= st
        for r in range(smax):
            m = (s > r)[:, None, None]
            sn2 = 2.0 * (sn @ cs)
            cs2 = 2.0 * (cs @ cs) - eye
            sn = np.where(m, sn2, sn)
            cs = np.where(m, cs2, cs)
        out += named[3] * sn + named[4] * cs
    return out, status


@_jit
def _mm(x, y):
    n = x.shape[0]
    z = np.zeros((n, n))
    for i in range(n):
        for k in range(n):
            xik = x[i, k]
            if xik != 0.0:
                for j in range(n):
                    z[i, j] += xik * y[k, j]
    return z


@_jit
def _maxabs(x):
    m = 0.0
    n = x.shape[0]
    for i in range(n):
        for j in range(n):
            v = abs(x[i, j])
            if v > m:
                m = v
    return m


@_jit
def _matpoly_one(poly, a):
    n = a.shape[0]
    d = poly.shape[0] - 1
    acc = np.zeros((n, n))
    for i in range(n):
        acc[i, i] = poly[d]
    for c in range(d - 1, -1, -1):
        acc = _mm(acc, a)
        for i in range(n):
            acc[i, i] += poly[c]
    return acc


@_jit
def _series_one(a, trig):
    n = a.shape[0]
    term = np.eye(n)
    even = np.eye(n)
    odd = np.zeros((n, n))
    prev = 1.0
    grow = 0
    status = 0
    j = 1
    while True:
        term = _mm(term, a) / j
        sgn = 1.0
        if trig:
            if j % 2 == 0 and (j // 2) % 2 == 1:
                sgn = -1.0
            elif j % 2 == 1 and ((j - 1) // 2) % 2 == 1:
                sgn = -1.0
        if j % 2 == 0:
            even += sgn * term
        else:
            odd += sgn * term
        tn = _maxabs(term)
        if tn > prev:
            grow += 1
        else:
            grow = 0
        prev = tn
        if grow >= MAX_SERIES_TERMS:
            status = 1
            break
        if tn < TERM_RTOL * (1.0 + _maxabs(even) + _maxabs(odd)):
            break
        j += 1
    return even, odd, status


@_jit
def _taylor_one(poly, named, a, out):
    n = a.shape[0]
    f = _matpoly_one(poly, a)
    status = 0
    if named[0] != 0.0 or named[1] != 0.0 or named[2] != 0.0 or \
            named[3] != 0.0 or named[4] != 0.0:
        norm = 0.0
        for i in range(n):
            rs = 0.0
            for j in range(n):
                rs += abs(a[i, j])
            if rs > norm:
                norm = rs
        s = 0
        if norm > 1.0:
            s = int(math.ceil(math.log2(norm)))
        scaled = a / (2.0 ** s)
        if named[0] != 0.0 or named[1] != 0.0 or named[2] != 0.0:
            ev, od, st = _series_one(scaled, False)
            status |= st
            if s == 0:
                ep = ev + od
                f += named[0] * ep + named[1] * od + named[2] * ev
            else:
                ep = ev + od
                em = ev - od
                for r in range(s):
                    ep = _mm(ep, ep)
                    em = _mm(em, em)
                f += named[0] * ep + named[1] * 0.5 * (ep - em) \
                    + named[2] * 0.5 * (ep + em)
        if named[3] != 0.0 or named[4] != 0.0:
            cs, sn, st = _series_one(scaled, True)
            status |= st
            for r in range(s):
                sn2 = 2.0 * _mm(sn, cs)
                cs2 = 2.0 * _mm(cs, cs)
                for i in range(n):
                    cs2[i, i] -= 1.0
                sn = sn2
                cs = cs2
            f += named[3] * sn + named[4] * cs
    out[:, :] = f
    return status


@_jit
def _taylor_nb(poly, named, a):
    b = a.shape[0]
    out = np.empty_like(a)
    status = np.zeros(b, dtype=np.int64)
    for t in range(b):
        status[t] = _taylor_one(poly, named, np.ascontiguousarray(a[t]), out[t])
    return out, status


def taylor(poly, named, a):
    """Power-series evaluation of f on a batch of matrices.

    Returns ``(values, status)``; ``status[t] == 1`` flags a series whose
    terms kept growing for ``MAX_SERIES_TERMS`` consecutive steps.
    """
    a = np.ascontiguousarray(a, dtype=np.float64)
    if _BACKEND == "numba":
        return _taylor_nb(poly, named, a)
    return _taylor_np(poly, named, a)


def matpoly(poly, a):
    """Horner evaluation of a polynomial on a batch of matrices."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    zero = np.zeros(5)
    return taylor(poly, zero, a)[0]


# ---------------------------------------------------------------------------
# symmetric eigenvalues: cyclic-by-row Jacobi
# ---------------------------------------------------------------------------

def _jacobi_np(a):
    a = np.array(a, dtype=np.float64, copy=True)
    b, n, _ = a.shape
    fro = np.sqrt((a * a).sum(axis=(1, 2)))
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt((a * a)[:, offmask].sum(axis=1))
        if np.all(off <= JACOBI_RTOL * fro):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                nz = apq != 0.0
                if not nz.any():
                    continue
                safe = np.where(nz, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                sgn = np.where(theta >= 0.0, 1.0, -1.0)
                t = sgn / (np.abs(theta) + np.sqrt(1.0 + theta * theta))
                c = np.where(nz, 1.0 / np.sqrt(1.0 + t * t), 1.0)
                s = np.where(nz, t * c, 0.0)
                cc = c[:, None]
                ss = s[:, None]
                colp = a[:, :, p].copy()
                colq = a[:, :, q].copy()
                a[:, :, p] = cc * colp - ss * colq
                a[:, :, q] = ss * colp + cc * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :].copy()
                a[:, p, :] = cc * rowp - ss * rowq
                a[:, q, :] = ss * rowp + cc * rowq
    w = np.sort(np.diagonal(a, axis1=1, axis2=2), axis=1)
    return w


@_jit
def _jacobi_one(a):
    n = a.shape[0]
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += a[i, j] * a[i, j]
    fro = math.sqrt(fro)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j] * a[i, j]
        if math.sqrt(off) <= JACOBI_RTOL * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                sgn = 1.0 if theta >= 0.0 else -1.0
                t = sgn / (abs(theta) + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return np.sort(w)


@_jit
def _jacobi_nb(a):
    b, n, _ = a.shape
    out = np.empty((b, n))
    for t in range(b):
        out[t] = _jacobi_one(a[t].copy())
    return out


def jacobi_eigvals(a):
    """Ascending eigenvalues of a batch of symmetric matrices."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if _BACKEND == "numba":
        return _jacobi_nb(a)
    return _jacobi_np(a)


# ---------------------------------------------------------------------------
# Newton interpolation form, explicit triangular formula, circulants
# ---------------------------------------------------------------------------

def _newton_np(poly, named, a, nodes):
    nodes = np.sort(nodes, axis=1)
    b, n, _ = a.shape
    dd = _divdiff_prefix_np(poly, named, nodes)
    eye = np.eye(n)
    prod = np.broadcast_to(eye, a.shape).copy()
    out = dd[:, 0, None, None] * prod
    for k in range(1, n):
        prod = prod @ (a - nodes[:, k - 1, None, None] * eye)
        out = out + dd[:, k, None, None] * prod
    return out


@_jit
def _newton_nb(poly, named, a, nodes):
    b, n, _ = a.shape
    out = np.empty_like(a)
    dd = np.empty((1, n))
    c = _deriv_table(poly, n - 1)
    dv = np.empty((n, n))
    level = np.empty(n)
    prod = np.empty((n, n))
    nxt = np.empty((n, n))
    x = np.empty(n)
    for t in range(b):
        _sort_row(nodes, t, x)
        _divdiff_prefix_one(c, named, x, n, dd, 0, dv, level)
        for i in range(n):
            for j in range(n):
                prod[i, j] = 1.0 if i == j else 0.0
                out[t, i, j] = dd[0, 0] * prod[i, j]
        for k in range(1, n):
            # prod <- prod (A - x_{k-1} I)
            for i in range(n):
                for j in range(n):
                    acc = -prod[i, j] * x[k - 1]
                    for m in range(n):
                        acc += prod[i, m] * a[t, m, j]
                    nxt[i, j] = acc
            for i in range(n):
                for j in range(n):
                    prod[i, j] = nxt[i, j]
                    out[t, i, j] += dd[0, k] * nxt[i, j]
    return out


def newton(poly, named, a, nodes):
    """Newton-form interpolation ``sum_k f[r_1..r_k] prod_{j<k}(A - r_j I)``."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    nodes = np.ascontiguousarray(nodes, dtype=np.float64)
    if _BACKEND == "numba":
        return _newton_nb(poly, named, a, nodes)
    return _newton_np(poly, named, a, nodes)


def _triangular_np(poly, named, a):
    b, n, _ = a.shape
    out = np.zeros_like(a)
    diag = np.diagonal(a, axis1=1, axis2=2)
    out[:, np.arange(n), np.arange(n)] = _derivs_np(
        poly, named, diag.reshape(-1), 0)[:, 0].reshape(b, n)
    for i in range(n):
        for j in range(i + 1, n):
            inner = list(range(i + 1, j))
            total = np.zeros(b)
            for mask in range(1 << len(inner)):
                chain = [i] + [inner[t] for t in range(len(inner))
                               if mask >> t & 1] + [j]
                coef = np.ones(b)
                for u, v in zip(chain[:-1], chain[1:]):
                    coef = coef * a[:, u, v]
                live = coef != 0.0
                if not live.any():
                    continue
                dd = np.zeros(b)
                dd[live] = _divdiff_prefix_np(
                    poly, named, diag[live][:, chain])[:, -1]
                total += coef * dd
            out[:, i, j] = total
    return out


@_jit
def _triangular_nb(poly, named, a):
    b, n, _ = a.shape
    out = np.zeros_like(a)
    c = _deriv_table(poly, n - 1)
    dd = np.empty((1, n))
    dv = np.empty((n, n))
    level = np.empty(n)
    chain = np.empty(n, dtype=np.int64)
    xs = np.empty(n)
    for t in range(b):
        for i in range(n):
            _point_derivs(c, named, a[t, i, i], 0, dv, 0)
            out[t, i, i] = dv[0, 0]
        for i in range(n):
            for j in range(i + 1, n):
                m = j - i - 1
                total = 0.0
                for mask in range(1 << m):
                    length = 0
                    chain[length] = i
                    length += 1
                    for u in range(m):
                        if (mask >> u) & 1:
                            chain[length] = i + 1 + u
                            length += 1
                    chain[length] = j
                    length += 1
                    coef = 1.0
                    for u in range(length - 1):
                        coef *= a[t, chain[u], chain[u + 1]]
                    if coef == 0.0:
                        continue
                    # insertion sort of the chain's diagonal entries
                    for u in range(length):
                        v = a[t, chain[u], chain[u]]
                        w = u
                        while w > 0 and xs[w - 1] > v:
                            xs[w] = xs[w - 1]
                            w -= 1
                        xs[w] = v
                    _divdiff_prefix_one(c, named, xs, length, dd, 0, dv, level)
                    total += coef * dd[0, length - 1]
                out[t, i, j] = total
    return out


def triangular_explicit(poly, named, a):
    """Chain-sum formula for f of upper-triangular matrices (batched)."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if _BACKEND == "numba":
        return _triangular_nb(poly, named, a)
    return _triangular_np(poly, named, a)


def _dft_matrix(n):
    j = np.arange(n)
    return np.exp(2j * np.pi * np.outer(j, j) / n)


def circulant_rows(poly, named, rows):
    """First rows of f(A) for circulants given by their first rows.

    Returns the complex rows; callers check the imaginary residue.  The
    spectrum is formed by direct summation against the root-of-unity
    matrix, the only hot part being the function evaluation.
    """
    rows = np.ascontiguousarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows[None, :]
    b, n = rows.shape
    w = _dft_matrix(n)
    spec = rows @ w
    fv = eval_complex(poly, named, spec.reshape(-1)).reshape(b, n)
    return fv @ np.conj(w) / n, spec, fv
