"""Membership checks for the nonnegativity-preserving function classes.

Every check samples a parameter region, reports the most severe violation
it sees and shrinks that witness toward a small, hand-checkable one.
Witness matrices are always re-evaluated with :func:`apply_taylor`
before a ``fail`` verdict is issued.

Entry indices in witnesses are 0-based.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import MixedParity, ParityUnsupported
from .funcspec import Polynomial, magnitude, parity_decompose
from .matfun import Matrix, apply_taylor

__all__ = [
    "SamplerConfig", "Witness", "CheckReport", "CLASSES", "check_f1",
    "check_divdiff_criterion", "check_circulant_preservation", "check_f2",
    "check_sym_parity", "check_newnc", "newnc_values", "falsify",
    "cauchy_bound",
]

CLASSES = ("general", "triangular", "circulant", "symmetric")
CHUNK = 4096
KEEP = 0.5  # a shrunk witness keeps at least this share of the violation
SNAPS = (1.0, 0.5, 0.1, 0.05, 0.01)
DENSE_SCAN = 10_000
EXACT_MAX_DEGREE = 6


@dataclass(frozen=True)
class SamplerConfig:
    """Sampling budget shared by the checks.

    The nonnegativity tolerance at a sample is ``tol * (1 + s)`` where
    ``s`` is the magnitude of the values involved.
    """

    grid_max: float = 10.0
    grid_points: int = 200
    random_samples: int = 2000
    seed: int = 0
    tol: float = 1e-9

    def __post_init__(self):
        if not (self.grid_max > 0 and self.grid_points > 0
                and self.random_samples >= 0 and self.tol > 0):
            raise ValueError("sampler settings must be positive")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class Witness:
    """A concrete violation.

    ``matrix`` (nested lists) and ``entry`` are present when the violation
    is an entry of ``f(matrix)``; ``value`` is then that entry.  ``params``
    records the sampled parameters and the raw condition value.
    """

    value: float
    matrix: list = None
    entry: tuple = None
    params: dict = field(default_factory=dict)

    def to_dict(self):
        d = {}
        if self.matrix is not None:
            d["matrix"] = self.matrix
            d["entry"] = list(self.entry)
        d["value"] = self.value
        if self.params:
            d["params"] = self.params
        return d


@dataclass(frozen=True)
class CheckReport:
    verdict: str
    witness: Witness = None
    samples: int = 0
    seed: int = 0
    tolerance: float = 1e-9
    check: str = ""
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in ("pass-exact", "pass-sampled", "fail"):
            raise ValueError(f"bad verdict {self.verdict!r}")
        if (self.verdict == "fail") != (self.witness is not None):
            raise ValueError("a witness is required exactly when the verdict is fail")

    @property
    def passed(self):
        return self.verdict != "fail"

    def to_dict(self):
        d = {"check": self.check, "verdict": self.verdict}
        if self.witness is not None:
            d["witness"] = self.witness.to_dict()
        d.update(samples=int(self.samples), seed=int(self.seed),
                 tolerance=float(self.tolerance))
        if self.details:
            d["details"] = self.details
        return d


# ---------------------------------------------------------------- helpers


def _cfg(cfg):
    return SamplerConfig() if cfg is None else cfg


def _values(f, x, k=0):
    poly, named = f.dense
    return _kernels.derivs(poly, named, np.asarray(x, dtype=np.float64).reshape(-1), k)


def cauchy_bound(coeffs):
    """``1 + max |a_i / a_d|``: every root lies inside this radius."""
    c = np.asarray([float(v) for v in coeffs])
    if c.size <= 1:
        return 0.0
    return 1.0 + float(np.abs(c[:-1] / c[-1]).max())


def _poly_derivative(coeffs, k):
    c = [float(v) for v in coeffs]
    for _ in range(k):
        c = [i * c[i] for i in range(1, len(c))] or [0.0]
    while len(c) > 1 and c[-1] == 0.0:
        c.pop()
    return c


def _shrink(p, score, keep=KEEP, iters=40):
    """Drive the parameters toward zero and onto a coarse lattice.

    ``score(q)`` returns the (negative) relative violation at ``q`` or
    ``None`` if ``q`` does not violate.  A move is taken only if the
    violation stays at least ``keep`` times the starting one.
    """
    p = np.array(p, dtype=np.float64)
    base = score(p)
    if base is None:
        return p
    target = keep * base

    def ok(q):
        s = score(q)
        return s is not None and s <= target

    for i in range(p.size):
        if p[i] != 0.0:
            q = p.copy()
            q[i] = 0.0
            if ok(q):
                p = q
    for i in range(p.size):
        if p[i] == 0.0:
            continue
        orig, lo, hi = p[i], 0.0, 1.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            q = p.copy()
            q[i] = orig * mid
            if ok(q):
                hi = mid
            else:
                lo = mid
        p[i] = orig * hi
    for h in SNAPS:
        for i in range(p.size):
            v = p[i]
            for c in (round(v / h) * h, math.floor(v / h) * h, math.ceil(v / h) * h):
                c = round(c, 12)
                if c == v or (c < 0 <= v):
                    continue
                q = p.copy()
                q[i] = c
                if ok(q):
                    p = q
                    break
    return p


def _entry_score(f, build, entry, tol):
    """Score function for a matrix witness tracked at a fixed entry."""
    poly, named = f.dense

    def score(q):
        a = build(q)
        if a is None:
            return None
        out, status = _kernels.taylor(poly, named, a[None])
        if status[0]:
            return None
        fa = out[0]
        scale = 1.0 + np.abs(fa).max()
        v = fa[entry]
        return v / scale if v < -tol * scale else None

    return score


def _taylor_witness(f, a, entry, tol, params=None):
    """Re-evaluate ``f(a)`` with the series oracle; None if not a violation."""
    fa = apply_taylor(f, a).entries
    v = float(fa[entry])
    if not v < -tol * (1.0 + np.abs(fa).max()):
        return None
    return Witness(v, np.asarray(a, dtype=np.float64).tolist(),
                   tuple(int(i) for i in entry), dict(params or {}))


def _bidiag_witness(f, x, k, n, deriv, tol, extra=None):
    """``f`` on ``x I + N`` (order ``k+1``) padded with zeros to order ``n``."""
    size = max(n, k + 1)
    a = np.zeros((size, size))
    a[np.arange(k + 1), np.arange(k + 1)] = x
    a[np.arange(k), np.arange(1, k + 1)] = 1.0
    params = {"k": int(k), "x": float(x), "derivative": float(deriv)}
    params.update(extra or {})
    w = _taylor_witness(f, a, (0, k), tol, params)
    if w is None:
        # the scalar condition is violated but the series value rounds away
        w = Witness(float(deriv) / math.factorial(k), None, None, params)
    return w


def _scan_points(cfg, rng, upper=None):
    x_max = cfg.grid_max if upper is None else upper
    pts = [np.linspace(0.0, x_max, cfg.grid_points + 1),
           np.geomspace(1e-8, x_max, 64),
           rng.uniform(0.0, x_max, cfg.random_samples)]
    return np.unique(np.concatenate(pts))


def _local_minima(fn, xs, vals):
    """Refine interior discrete minima of ``fn`` by ternary search."""
    out_x, out_v = [], []
    idx = np.nonzero((vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:]))[0] + 1
    for i in idx[:200]:
        lo, hi = xs[i - 1], xs[i + 1]
        for _ in range(80):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            if fn(m1) <= fn(m2):
                hi = m2
            else:
                lo = m1
        xm = 0.5 * (lo + hi)
        out_x.append(xm)
        out_v.append(fn(xm))
    return np.array(out_x), np.array(out_v)


def _derivative_scan(f, kmax, cfg, rng):
    """Search ``f^(k) >= 0`` on the half line for ``k = 0..kmax``.

    Returns ``(violation, samples, exact)`` where ``violation`` is
    ``(k, x, value)`` or ``None`` and ``exact`` says whether the absence
    of violations was established for the whole half line.
    """
    pts = _scan_points(cfg, rng)
    samples = pts.size
    vals = _values(f, pts, kmax)
    mags = magnitude(f, pts, kmax)
    rel = vals / (1.0 + mags)
    bad = vals < -cfg.tol * (1.0 + mags)
    best = None
    if bad.any():
        r = np.where(bad, rel, np.inf)
        i, k = np.unravel_index(np.argmin(r), r.shape)
        best = (int(k), float(pts[i]), float(vals[i, k]))
    exact = False
    if isinstance(f, Polynomial):
        exact = f.degree <= EXACT_MAX_DEGREE
        for k in range(kmax + 1):
            ck = _poly_derivative(f.coeffs, k)
            if len(ck) == 1:
                if ck[0] < 0 and best is None:
                    best = (k, 0.0, ck[0])
                continue
            bound = cauchy_bound(ck)
            if ck[-1] < 0:
                exact = False
                if best is None:
                    xt = float(math.ceil(bound) + 1)
                    best = (k, xt, float(_values(f, [xt], k)[0, k]))
                continue
            if best is not None or not exact:
                continue
            upper = max(cfg.grid_max, bound)
            xs = np.linspace(0.0, upper, DENSE_SCAN + 1)
            v = _values(f, xs, k)[:, k]
            tol = cfg.tol * (1.0 + magnitude(f, xs, k)[:, k])
            samples += xs.size
            fn = lambda t, k=k: float(_values(f, [t], k)[0, k])
            mx, mv = _local_minima(fn, xs, v)
            cand_x = np.concatenate([xs, mx])
            cand_v = np.concatenate([v, mv])
            cand_t = np.concatenate([tol, cfg.tol * (1.0 + magnitude(f, mx, k)[:, k])
                                     if mx.size else np.zeros(0)])
            viol = cand_v < -cand_t
            if viol.any():
                j = int(np.argmin(np.where(viol, cand_v / (1.0 + cand_t / cfg.tol), np.inf)))
                best = (k, float(cand_x[j]), float(cand_v[j]))
                exact = False
    return best, samples, exact and best is None


def _shrink_point(f, k, x, cfg):
    """Pull a violating point toward 0 and a coarse lattice."""
    def score(q):
        t = q[0]
        v = float(_values(f, [t], k)[0, k])
        m = float(magnitude(f, [t], k)[0, k])
        return v / (1.0 + m) if v < -cfg.tol * (1.0 + m) else None

    return float(_shrink([x], score)[0])


# ---------------------------------------------------------------- scalar checks


def check_f1(f, cfg=None):
    """Does ``f`` map the nonnegative half line into itself?

    Examples
    --------
    >>> check_f1(Polynomial([-1, 1])).witness.params["x"]
    0.0
    """
    cfg = _cfg(cfg)
    rng = np.random.default_rng(cfg.seed)
    best, samples, exact = _derivative_scan(f, 0, cfg, rng)
    if best is None:
        return CheckReport("pass-exact" if exact else "pass-sampled", None, samples,
                           cfg.seed, cfg.tol, "f1")
    x = _shrink_point(f, 0, best[1], cfg)
    v = float(_values(f, [x], 0)[0, 0])
    w = _taylor_witness(f, np.array([[x]]), (0, 0), cfg.tol, {"x": x}) \
        or Witness(v, None, None, {"x": x})
    return CheckReport("fail", w, samples, cfg.seed, cfg.tol, "f1")


def check_divdiff_criterion(f, n, cfg=None):
    """Are ``f, f', ..., f^(n-1)`` nonnegative on the half line?

    Equivalent to nonnegativity of all divided differences of order up to
    ``n`` at nonnegative nodes, which characterizes preservation of
    nonnegative triangular matrices (and of nonnegative definite
    nonnegative symmetric ones) of order ``n``.  A failure comes with the
    bidiagonal witness ``x I + N`` whose corner entry is ``f^(k)(x)/k!``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cfg = _cfg(cfg)
    rng = np.random.default_rng(cfg.seed)
    best, samples, exact = _derivative_scan(f, n - 1, cfg, rng)
    check = f"divdiff(n={n})"
    if best is None:
        return CheckReport("pass-exact" if exact else "pass-sampled", None, samples,
                           cfg.seed, cfg.tol, check)
    k = best[0]
    x = _shrink_point(f, k, best[1], cfg)
    deriv = float(_values(f, [x], k)[0, k])
    w = _bidiag_witness(f, x, k, n, deriv, cfg.tol)
    return CheckReport("fail", w, samples, cfg.seed, cfg.tol, check)


# ---------------------------------------------------------------- circulant


def _circulant(row):
    row = np.asarray(row, dtype=np.float64)
    n = row.size
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def _sample_rows(rng, m, n, x_max):
    rows = rng.uniform(0.0, x_max, (m, n))
    kind = rng.integers(0, 3, m)
    sparse = kind == 1
    rows[sparse] *= rng.random((int(sparse.sum()), n)) < 0.5
    edge = kind == 2
    # near the boundary of the cone: all but one entry tiny
    tiny = rng.uniform(0.0, 1e-6 * x_max, (int(edge.sum()), n))
    keep = rng.integers(0, n, int(edge.sum()))
    tiny[np.arange(tiny.shape[0]), keep] = rows[edge][np.arange(tiny.shape[0]), keep]
    rows[edge] = tiny
    return rows


def check_circulant_preservation(f, n, cfg=None):
    """Is ``f(A) >= 0`` for every nonnegative circulant ``A`` of order ``n``?

    Evaluates the first row of ``f(A)`` from the spectrum; the witness
    records the row, the offending index ``l`` and the root-of-unity sum
    (``n`` times the entry).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cfg = _cfg(cfg)
    rng = np.random.default_rng(cfg.seed)
    poly, named = f.dense
    rows = _sample_rows(rng, cfg.random_samples, n, cfg.grid_max)
    if n == 2:
        g = np.linspace(0.0, cfg.grid_max, min(cfg.grid_points, 100) + 1)
        gx, gy = np.meshgrid(g, g, indexing="ij")
        rows = np.vstack([rows, np.column_stack([gx.ravel(), gy.ravel()])])
    first, _, fv = _kernels.circulant_rows(poly, named, rows)
    vals = first.real
    scale = 1.0 + np.maximum(np.abs(vals).max(axis=1), np.abs(fv).max(axis=1))
    bad = vals < -cfg.tol * scale[:, None]
    check = f"circulant(n={n})"
    if not bad.any():
        return CheckReport("pass-sampled", None, rows.shape[0], cfg.seed, cfg.tol, check)
    rel = np.where(bad, vals / scale[:, None], np.inf)
    i, l = np.unravel_index(np.argmin(rel), rel.shape)

    def score(q):
        if np.any(q < 0):
            return None
        fr, _, fvq = _kernels.circulant_rows(poly, named, q[None])
        v = fr.real[0]
        s = 1.0 + max(np.abs(v).max(), np.abs(fvq).max())
        return v[l] / s if v[l] < -cfg.tol * s else None

    row = _shrink(rows[i], score)
    w = _taylor_witness(f, _circulant(row), (0, int(l)), cfg.tol)
    if w is None:
        return CheckReport("pass-sampled", None, rows.shape[0], cfg.seed, cfg.tol, check,
                           {"unconfirmed": row.tolist()})
    w = Witness(w.value, w.matrix, w.entry,
                {"row": row.tolist(), "l": int(l), "sum": n * w.value})
    return CheckReport("fail", w, rows.shape[0], cfg.seed, cfg.tol, check)


# ---------------------------------------------------------------- order two


def _f2_conditions(f, x, y, z=None):
    """Values and scales of the two-by-two conditions at arrays ``x, y (, z)``."""
    fp = _values(f, x + y)[:, 0]
    fm = _values(f, x - y)[:, 0]
    sp = magnitude(f, x + y)[:, 0]
    sm = magnitude(f, x - y)[:, 0]
    c1 = fp - fm
    c2p = (x + y) * fm + (y - x) * fp
    out = {"2by2-1": (c1, 1.0 + sp + sm),
           "2by2-2'": (c2p, 1.0 + (np.abs(x) + np.abs(y)) * (sp + sm))}
    if z is not None:
        c2 = (x + y - z) * fm + (z - x + y) * fp
        out["2by2-2"] = (c2, 1.0 + (np.abs(x) + np.abs(y) + np.abs(z)) * (sp + sm))
    return out


def _f2_matrix(cond, x, y, z=0.0):
    """Symmetric ``2 x 2`` witness and the entry carrying the condition."""
    if cond == "2by2-1":
        return np.array([[x, y], [y, x]]), (0, 1)
    # eigenvalues x -/+ y, smaller diagonal entry z
    b2 = y * y - (x - z) ** 2
    if b2 < 0:
        return None, None
    b = math.sqrt(b2)
    return np.array([[z, b], [b, 2 * x - z]]), (0, 0)


def _f2_feasible(cond, p):
    x, y = p[0], p[1]
    if x < 0 or y < 0:
        return False
    if cond == "2by2-2'":
        return y >= x and y > 0
    if cond == "2by2-2":
        z = p[2]
        return 0 <= z <= x and y >= x - z and y > 0
    return True


def check_f2(f, cfg=None):
    """Does ``f`` preserve nonnegativity of all ``2 x 2`` matrices?

    Tests ``f(x+y) - f(x-y) >= 0`` for ``x, y >= 0`` and
    ``(x+y) f(x-y) + (y-x) f(x+y) >= 0`` for ``y >= x >= 0`` on a grid
    plus random points.  The three-parameter form of the second
    condition is sampled as a cross-check; a violation there not matched
    by the other pair is flagged in ``details["inconsistency"]``.
    """
    cfg = _cfg(cfg)
    rng = np.random.default_rng(cfg.seed)
    g = np.linspace(0.0, cfg.grid_max, cfg.grid_points + 1)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    x = np.concatenate([gx.ravel(), rng.uniform(0, cfg.grid_max, cfg.random_samples)])
    y = np.concatenate([gy.ravel(), rng.uniform(0, cfg.grid_max, cfg.random_samples)])
    m3 = max(cfg.random_samples, 1)
    x3 = rng.uniform(0, cfg.grid_max, m3)
    z3 = x3 * rng.random(m3)
    y3 = (x3 - z3) + rng.uniform(0, cfg.grid_max, m3)
    pair = _f2_conditions(f, x, y)
    trip = _f2_conditions(f, x3, y3, z3)["2by2-2"]
    samples = x.size + m3

    cands = []
    for cond, (val, sc) in pair.items():
        mask = np.ones_like(x, bool) if cond == "2by2-1" else (y >= x) & (y > 0)
        bad = mask & (val < -cfg.tol * sc)
        if bad.any():
            # relative size as seen in the witness matrix
            rel = np.where(bad, val / sc, np.inf)
            i = int(np.argmin(rel))
            cands.append((rel[i], cond, [x[i], y[i]]))
    bad3 = trip[0] < -cfg.tol * trip[1]
    details = {}
    if bad3.any() and not cands:
        i = int(np.argmin(np.where(bad3, trip[0] / trip[1], np.inf)))
        details["inconsistency"] = {"x": float(x3[i]), "y": float(y3[i]), "z": float(z3[i]),
                                    "value": float(trip[0][i])}
        cands.append((trip[0][i] / trip[1][i], "2by2-2", [x3[i], y3[i], z3[i]]))
    if not cands:
        return CheckReport("pass-sampled", None, samples, cfg.seed, cfg.tol, "f2", details)
    cands.sort(key=lambda c: c[0])
    _, cond, p0 = cands[0]

    def build(q):
        if not _f2_feasible(cond, q):
            return None
        a, _ = _f2_matrix(cond, *q)
        return a

    entry = (0, 1) if cond == "2by2-1" else (0, 0)
    p = _shrink(p0, _entry_score(f, build, entry, cfg.tol))
    a, entry = _f2_matrix(cond, *p)
    expr = _f2_conditions(f, np.array([p[0]]), np.array([p[1]]),
                          np.array([p[2]]) if cond == "2by2-2" else None)[cond][0][0]
    params = {"condition": cond, "x": float(p[0]), "y": float(p[1]),
              "expression": float(expr)}
    if cond == "2by2-2":
        params["z"] = float(p[2])
    w = _taylor_witness(f, a, entry, cfg.tol, params)
    if w is None:
        w = Witness(float(expr), None, None, params)
    return CheckReport("fail", w, samples, cfg.seed, cfg.tol, "f2", details)


# ---------------------------------------------------------------- parity


def check_sym_parity(f, n, cfg=None):
    """Even or odd ``f`` on nonnegative symmetric matrices of order ``n``.

    With ``f(z) = g(z^2)`` (even) or ``f(z) = z h(z^2)`` (odd) the answer
    is the divided-difference criterion of order ``n`` for ``g`` or ``h``.
    """
    pp = parity_decompose(f)
    even_zero, odd_zero = pp.f_even.is_zero, pp.f_odd.is_zero
    if not even_zero and not odd_zero:
        raise MixedParity("f is neither even nor odd")
    part, name = (pp.g, "g") if odd_zero else (pp.h, "h")
    if part is None:
        raise ParityUnsupported(f"{name} has no closed form in the function library")
    rep = check_divdiff_criterion(part, n, cfg)
    details = {"reduced": name, "parity": "even" if odd_zero else "odd"}
    w = rep.witness
    if w is not None:
        params = dict(w.params, function=name)
        w = Witness(w.value, w.matrix, w.entry, params)
    return CheckReport(rep.verdict, w, rep.samples, rep.seed, rep.tolerance,
                       f"sym-parity(n={n})", details)


# ---------------------------------------------------------------- alternating tuples


def _divdiff_rows(f, nodes):
    poly, named = f.dense
    return _kernels.divdiff(poly, named, np.sort(nodes, axis=1))


def newnc_values(f, xs):
    """``(newnc1, [newnc2_k for k = 1..n])`` at the tuple ``xs``.

    ``newnc1 = f[x_1..x_n]`` and
    ``newnc2_k = f[x_1..x_n without x_k] - (sum_{j != k} x_j) f[x_1..x_n]``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    full, second = _newnc_batch(f, xs[None])
    return float(full[0]), [float(v) for v in second[0]]


def _newnc_batch(f, xs):
    b, n = xs.shape
    full = _divdiff_rows(f, xs)
    total = xs.sum(axis=1)
    second = np.empty((b, n))
    for k in range(n):
        rest = np.delete(xs, k, axis=1)
        sub = _divdiff_rows(f, rest)
        second[:, k] = sub - (total - xs[:, k]) * full
    return full, second


def _alternating(mags):
    signs = np.where(np.arange(mags.shape[-1]) % 2 == 0, 1.0, -1.0)
    return mags * signs


def check_newnc(f, n, cfg=None):
    """Necessary conditions from alternating tuples ``x_1 > -x_2 > x_3 > ... > 0``.

    Tests ``f[x_1..x_n] >= 0`` and, for each ``k``, the adjacent-entry
    condition; see :func:`newnc_values`.  For ``n = 2`` a failure carries
    the matrix ``[[0, a_2], [a_2, a_1]]`` with spectrum ``{x_1, x_2}``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    cfg = _cfg(cfg)
    rng = np.random.default_rng(cfg.seed)
    m = max(cfg.random_samples, 1)
    mags = -np.sort(-rng.uniform(0.0, cfg.grid_max, (m, n)), axis=1)
    if n == 2:
        g = np.linspace(0.0, cfg.grid_max, min(cfg.grid_points, 100) + 1)[1:]
        g1, g2 = np.meshgrid(g, g, indexing="ij")
        keep = g1 > g2
        mags = np.vstack([mags, np.column_stack([g1[keep], g2[keep]])])
    mags = mags[np.all(np.diff(mags, axis=1) < 0, axis=1) & (mags[:, -1] > 0)]
    xs = _alternating(mags)
    full, second = _newnc_batch(f, xs)
    scale = 1.0 + magnitude(f, np.abs(xs).max(axis=1), n - 1).sum(axis=1) \
        * (1.0 + np.abs(xs).sum(axis=1))
    vals = np.column_stack([full, second])
    bad = vals < -cfg.tol * scale[:, None]
    check = f"newnc(n={n})"
    if not bad.any():
        return CheckReport("pass-sampled", None, xs.shape[0], cfg.seed, cfg.tol, check)
    rel = np.where(bad, vals / scale[:, None], np.inf)
    i, c = np.unravel_index(np.argmin(rel), rel.shape)

    def score(q):
        if np.any(q <= 0) or np.any(np.diff(q) >= 0):
            return None
        x = _alternating(q)[None]
        fl, sc = _newnc_batch(f, x)
        v = fl[0] if c == 0 else sc[0, c - 1]
        s = 1.0 + magnitude(f, [np.abs(x).max()], n - 1).sum() * (1.0 + np.abs(x).sum())
        return v / s if v < -cfg.tol * s else None

    q = _shrink(mags[i], score)
    x = _alternating(q)
    fl, sc = _newnc_batch(f, x[None])
    cond = "newnc1" if c == 0 else "newnc2"
    value = float(fl[0] if c == 0 else sc[0, c - 1])
    params = {"condition": cond, "tuple": x.tolist()}
    if c > 0:
        params["k"] = int(c)
    w = None
    if n == 2:
        a1, a2 = x[0] + x[1], math.sqrt(-x[0] * x[1])
        a = np.array([[0.0, a2], [a2, a1]])
        w = _taylor_witness(f, a, (0, 1) if c == 0 else (0, 0), cfg.tol,
                            dict(params, condition_value=value))
    if w is None:
        w = Witness(value, None, None, params)
    return CheckReport("fail", w, xs.shape[0], cfg.seed, cfg.tol, check)


# ---------------------------------------------------------------- random search


def _chunk_rng(seed, chunk):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def _search_scales(f, n):
    scales = [0.1, 1.0, 10.0]
    if isinstance(f, Polynomial) and f.degree >= 1:
        r = max(cauchy_bound(_poly_derivative(f.coeffs, k))
                for k in range(min(n, f.degree)))
        if 2.0 * r > 10.0:
            scales.append(2.0 * r)
    return np.array(scales)


def _sample_matrices(rng, m, n, cls, scales):
    scale = scales[rng.integers(0, scales.size, m)]
    a = rng.random((m, n, n)) * scale[:, None, None]
    kind = rng.integers(0, 4, m)
    sp = kind == 1
    a[sp] *= rng.random((int(sp.sum()), n, n)) < 0.5
    zd = kind == 2
    a[np.ix_(zd, np.arange(n), np.arange(n))] *= 1.0 - np.eye(n)
    cf = np.nonzero(kind == 3)[0]
    if cf.size:
        # bidiagonal with clustered diagonal, probing derivatives
        center = rng.random(cf.size) * scale[cf]
        width = np.array([0.0, 1e-3, 1e-1])[rng.integers(0, 3, cf.size)] * scale[cf]
        b = np.zeros((cf.size, n, n))
        idx = np.arange(n)
        b[:, idx, idx] = center[:, None] + width[:, None] * rng.random((cf.size, n))
        b[:, idx[:-1], idx[1:]] = a[cf][:, idx[:-1], idx[1:]]
        a[cf] = b
    if cls == "triangular":
        a = np.triu(a)
    elif cls == "symmetric":
        up = np.triu(a, 1)
        a = np.triu(a) + np.transpose(up, (0, 2, 1))
    elif cls == "circulant":
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        a = a[:, 0, :][:, idx]
    return a


def _class_eval(f, cls, a):
    poly, named = f.dense
    if cls == "triangular":
        return _kernels.triangular_explicit(poly, named, a)
    if cls == "symmetric":
        nodes = _kernels.jacobi_eigvals(a)
        return _kernels.newton(poly, named, a, nodes)
    if cls == "circulant":
        n = a.shape[1]
        first, _, _ = _kernels.circulant_rows(poly, named, a[:, 0, :])
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        return first.real[:, idx]
    out, status = _kernels.taylor(poly, named, a)
    out[status != 0] = np.nan
    return out


def _free(cls, n):
    """Free entries of a class member, as index arrays into the matrix."""
    if cls == "general":
        i, j = np.indices((n, n))
        return i.ravel(), j.ravel()
    if cls == "circulant":
        return np.zeros(n, int), np.arange(n)
    return np.triu_indices(n)


def _builder(cls, n):
    fi, fj = _free(cls, n)

    def build(q):
        if np.any(q < 0):
            return None
        if cls == "circulant":
            return _circulant(q)
        a = np.zeros((n, n))
        a[fi, fj] = q
        if cls == "symmetric":
            a[fj, fi] = q
        return a

    return build


def _canonical(cls, a, entry):
    """Move a diagonal violation to ``(0, 0)`` and an off-diagonal one to
    ``(0, 1)`` by a permutation similarity where the class allows it."""
    i, j = entry
    n = a.shape[0]
    if cls == "circulant":
        return a, (0, (j - i) % n)
    if cls not in ("general", "symmetric"):
        return a, entry
    if cls == "symmetric" and i > j:
        i, j = j, i
    order = [i] + ([j] if j != i else []) + [t for t in range(n) if t not in (i, j)]
    p = np.asarray(order)
    return a[np.ix_(p, p)], (0, 0) if i == j else (0, 1)


def falsify(f, cls="general", n=2, budget=20_000, seed=0, tol=1e-9, stop_early=True):
    """Seeded random search for a nonnegative matrix with ``f(A)`` not nonnegative.

    Matrices of the requested class are drawn in chunks of 4096, each
    chunk from its own seed stream, with entry scales swept over
    ``0.1, 1, 10`` (plus twice the root radius of ``f`` and its leading
    derivatives for polynomials with far roots).  ``f(A)`` is computed
    with the class-specific route and every candidate is re-checked with
    the series oracle.  With ``stop_early`` the search ends after the
    first chunk that contains a confirmed violation; the most severe one
    is then shrunk toward a small witness.
    """
    if cls not in CLASSES:
        raise ValueError(f"class must be one of {CLASSES}")
    if budget < 1 or n < 1:
        raise ValueError("budget and n must be >= 1")
    scales = _search_scales(f, n)
    poly, named = f.dense
    done, hits, best = 0, 0, None
    chunk = 0
    while done < budget:
        m = min(CHUNK, budget - done)
        rng = _chunk_rng(seed, chunk)
        a = _sample_matrices(rng, m, n, cls, scales)
        fa = _class_eval(f, cls, a)
        done += m
        chunk += 1
        with np.errstate(invalid="ignore"):
            scale = 1.0 + np.abs(fa).max(axis=(1, 2))
            low = fa.min(axis=(1, 2))
            cand = np.nonzero(~(low >= -tol * scale))[0]
        if cand.size:
            ta, status = _kernels.taylor(poly, named, a[cand])
            tscale = 1.0 + np.abs(ta).max(axis=(1, 2))
            rel = ta.min(axis=(1, 2)) / tscale
            ok = (status == 0) & (rel < -tol)
            hits += int(ok.sum())
            if ok.any():
                t = int(np.argmin(np.where(ok, rel, np.inf)))
                if best is None or rel[t] < best[0]:
                    flat = int(np.argmin(ta[t]))
                    best = (rel[t], a[cand[t]], divmod(flat, n))
        if best is not None and stop_early:
            break
    details = {"class": cls, "n": n, "hits": hits}
    if best is None:
        return CheckReport("pass-sampled", None, done, seed, tol, "falsify", details)
    _, a0, entry = best
    build = _builder(cls, n)
    fi, fj = _free(cls, n)
    if cls == "symmetric" and entry[0] > entry[1]:
        entry = (entry[1], entry[0])
    q = _shrink(a0[fi, fj], _entry_score(f, build, entry, tol))
    a, entry = _canonical(cls, build(q), entry)
    w = _taylor_witness(f, a, entry, tol)
    if w is None:  # pragma: no cover - shrinking only accepts violations
        w = _taylor_witness(f, a0, best[2], tol)
    return CheckReport("fail", w, done, seed, tol, "falsify", details)
