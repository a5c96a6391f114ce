"""Entire functions with exact derivative access.

Three variants cover everything the library evaluates: polynomials given by
ascending coefficients, the named functions ``exp, sinh, cosh, sin, cos``
and one-level weighted sums of those.  Polynomials may carry
:class:`fractions.Fraction` coefficients, in which case evaluation and
differentiation at rational points are exact.
"""

import cmath
import functools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import ParseError

__all__ = [
    "NAMED", "FunctionSpec", "Polynomial", "Named", "Sum", "ParityParts",
    "combine", "evaluate", "derivatives", "taylor_coefficients",
    "parity_decompose", "from_dict", "magnitude",
]

NAMED = ("exp", "sinh", "cosh", "sin", "cos")

_REAL_FN = {"exp": math.exp, "sinh": math.sinh, "cosh": math.cosh,
            "sin": math.sin, "cos": math.cos}
_CPLX_FN = {"exp": cmath.exp, "sinh": cmath.sinh, "cosh": cmath.cosh,
            "sin": cmath.sin, "cos": cmath.cos}

# derivative cycles: index j -> (function name, sign)
_CYCLE = {
    "exp": (("exp", 1),),
    "sinh": (("sinh", 1), ("cosh", 1)),
    "cosh": (("cosh", 1), ("sinh", 1)),
    "sin": (("sin", 1), ("cos", 1), ("sin", -1), ("cos", -1)),
    "cos": (("cos", 1), ("sin", -1), ("cos", -1), ("sin", 1)),
}


class FunctionSpec:
    """Base class; use :class:`Polynomial`, :class:`Named` or :class:`Sum`."""

    def __call__(self, z):
        return evaluate(self, z)

    @functools.cached_property
    def dense(self):
        """``(poly, named)`` float arrays consumed by the numeric kernels."""
        poly = np.zeros(1)
        named = np.zeros(len(NAMED))
        for w, term in _flat_terms(self):
            if isinstance(term, Polynomial):
                c = w * np.array([float(v) for v in term.coeffs])
                if c.size > poly.size:
                    poly = np.concatenate([poly, np.zeros(c.size - poly.size)])
                poly[:c.size] += c
            else:
                named[NAMED.index(term.name)] += w
        if poly.size > 1:
            nz = np.flatnonzero(poly)
            poly = poly[:nz[-1] + 1] if nz.size else poly[:1]
        return np.ascontiguousarray(poly), named

    @property
    def is_polynomial(self):
        return not np.any(self.dense[1])

    @property
    def is_zero(self):
        poly, named = self.dense
        return not np.any(poly) and not np.any(named)

    def to_dict(self):
        raise NotImplementedError


def _flat_terms(f):
    if isinstance(f, Sum):
        return list(f.terms)
    return [(1.0, f)]


def _num(c):
    if isinstance(c, Fraction):
        return c
    if isinstance(c, str):
        try:
            return Fraction(c)
        except ValueError as exc:
            raise ParseError(f"bad coefficient {c!r}") from exc
    if isinstance(c, (bool,)):
        raise ParseError("boolean coefficient")
    if isinstance(c, Rational):
        return Fraction(int(c))
    v = float(c)
    if not math.isfinite(v):
        raise ParseError(f"non-finite coefficient {c!r}")
    return v


@dataclass(frozen=True)
class Polynomial(FunctionSpec):
    """Polynomial with ascending coefficients ``a_0, ..., a_d``.

    Trailing zeros are dropped (the zero polynomial keeps a single ``0``).
    Integer and ``Fraction`` coefficients are kept exact; pass
    ``exact=True`` to convert float coefficients to fractions as well.
    """

    coeffs: tuple

    def __init__(self, coeffs, exact=False):
        cs = [_num(c) for c in coeffs]
        if exact:
            cs = [Fraction(c) for c in cs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs:
            cs = [0]
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def exact(self):
        return all(isinstance(c, Fraction) for c in self.coeffs)

    def to_dict(self):
        return {"type": "polynomial", "coeffs": [_coeff_out(c) for c in self.coeffs]}

    def __repr__(self):
        return f"Polynomial({[_coeff_out(c) for c in self.coeffs]})"


def _coeff_out(c):
    if isinstance(c, Fraction):
        return int(c) if c.denominator == 1 else str(c)
    return float(c)


@dataclass(frozen=True)
class Named(FunctionSpec):
    """One of ``exp, sinh, cosh, sin, cos``."""

    name: str

    def __post_init__(self):
        if self.name not in NAMED:
            raise ParseError(f"unknown function {self.name!r}; expected one of {NAMED}")

    def to_dict(self):
        return {"type": "named", "name": self.name}


@dataclass(frozen=True)
class Sum(FunctionSpec):
    """Weighted sum ``sum_i w_i f_i``; nested sums are flattened."""

    terms: tuple

    def __init__(self, terms):
        flat = []
        for w, f in terms:
            w = float(w)
            if not math.isfinite(w):
                raise ParseError("non-finite weight")
            if not isinstance(f, FunctionSpec):
                raise ParseError(f"not a FunctionSpec: {f!r}")
            if isinstance(f, Sum):
                flat.extend((w * w2, f2) for w2, f2 in f.terms)
            else:
                flat.append((w, f))
        if not flat:
            raise ParseError("Sum needs at least one term")
        object.__setattr__(self, "terms", tuple(flat))

    def to_dict(self):
        return {"type": "sum",
                "terms": [{"weight": w, "func": f.to_dict()} for w, f in self.terms]}


def combine(terms):
    """Simplest FunctionSpec equal to ``sum w*f`` over ``terms``.

    Polynomial terms are merged and equal named functions pooled; zero
    weights are dropped.
    """
    coeffs = []
    named = {}
    for w, f in terms:
        for w2, g in _flat_terms(f):
            ww = w * w2
            if isinstance(g, Polynomial):
                exact = isinstance(ww, (int, Fraction)) and g.exact
                for i, c in enumerate(g.coeffs):
                    v = ww * c if exact else float(ww) * float(c)
                    if i < len(coeffs):
                        coeffs[i] = coeffs[i] + v
                    else:
                        coeffs.append(v)
            else:
                named[g.name] = named.get(g.name, 0.0) + float(ww)
    named = {k: v for k, v in named.items() if v != 0.0}
    poly = Polynomial(coeffs or [0])
    out = []
    if not (poly.degree == 0 and poly.coeffs[0] == 0) or not named:
        out.append((1.0, poly))
    out.extend((v, Named(k)) for k, v in sorted(named.items(), key=lambda kv: NAMED.index(kv[0])))
    if len(out) == 1 and out[0][0] == 1.0:
        return out[0][1]
    return Sum(out)


@dataclass(frozen=True)
class ParityParts:
    """Even/odd split ``f = f_even + f_odd`` with ``f_even(z) = g(z^2)``
    and ``f_odd(z) = z h(z^2)``.

    ``g`` and ``h`` are ``None`` when they have no closed form in the
    function library (e.g. the halves of ``exp``); ``exact`` is true only
    when both are present.
    """

    f_even: FunctionSpec
    f_odd: FunctionSpec
    g: object = None
    h: object = None

    @property
    def exact(self):
        return self.g is not None and self.h is not None


def _is_exact_scalar(z):
    return isinstance(z, (int, Fraction)) and not isinstance(z, bool)


def evaluate(f, z):
    """Value of ``f`` at a real or complex scalar ``z``.

    Real input gives a real (``float``, or ``Fraction`` for exact
    polynomials at rational points); complex input gives ``complex``.
    """
    if isinstance(f, Polynomial):
        if _is_exact_scalar(z) and f.exact:
            acc = Fraction(0)
            for c in reversed(f.coeffs):
                acc = acc * z + c
            return acc
        cplx = isinstance(z, complex) or np.iscomplexobj(z)
        z = complex(z) if cplx else float(z)
        acc = 0.0
        for c in reversed(f.coeffs):
            acc = acc * z + float(c)
        return acc
    if isinstance(f, Named):
        if isinstance(z, complex) or np.iscomplexobj(z):
            return _CPLX_FN[f.name](complex(z))
        return _REAL_FN[f.name](float(z))
    vals = [w * evaluate(g, z) for w, g in f.terms]
    return sum(vals[1:], vals[0])


def derivatives(f, x, k):
    """``[f(x), f'(x), ..., f^(k)(x)]`` at a real point ``x``."""
    if k < 0:
        raise ValueError("derivative order must be >= 0")
    if isinstance(f, Polynomial):
        exact = f.exact and _is_exact_scalar(x)
        cs = list(f.coeffs) if exact else [float(c) for c in f.coeffs]
        xv = x if exact else float(x)
        out = []
        for j in range(k + 1):
            if j > len(cs) - 1:
                out.append(Fraction(0) if exact else 0.0)
                continue
            acc = Fraction(0) if exact else 0.0
            for i in range(len(cs) - 1, j - 1, -1):
                acc = acc * xv + cs[i] * (math.factorial(i) // math.factorial(i - j))
            out.append(acc)
        return out
    if isinstance(f, Named):
        cyc = _CYCLE[f.name]
        xv = float(x)
        cache = {}
        out = []
        for j in range(k + 1):
            name, sgn = cyc[j % len(cyc)]
            if name not in cache:
                cache[name] = _REAL_FN[name](xv)
            out.append(sgn * cache[name])
        return out
    acc = [0.0] * (k + 1)
    for w, g in f.terms:
        for j, v in enumerate(derivatives(g, x, k)):
            acc[j] += w * float(v)
    return acc


def _named_taylor(name, m):
    out = []
    for j in range(m + 1):
        inv = 1.0 / math.factorial(j)
        if name == "exp":
            out.append(inv)
        elif name == "sinh":
            out.append(inv if j % 2 else 0.0)
        elif name == "cosh":
            out.append(0.0 if j % 2 else inv)
        elif name == "sin":
            out.append((inv if (j // 2) % 2 == 0 else -inv) if j % 2 else 0.0)
        else:
            out.append(0.0 if j % 2 else (inv if (j // 2) % 2 == 0 else -inv))
    return out


def taylor_coefficients(f, m):
    """Taylor coefficients ``a_j = f^(j)(0)/j!`` for ``j = 0..m``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if isinstance(f, Polynomial):
        zero = Fraction(0) if f.exact else 0.0
        cs = list(f.coeffs[:m + 1])
        return cs + [zero] * (m + 1 - len(cs))
    if isinstance(f, Named):
        return _named_taylor(f.name, m)
    acc = [0.0] * (m + 1)
    for w, g in f.terms:
        for j, v in enumerate(taylor_coefficients(g, m)):
            acc[j] += w * float(v)
    return acc


_NAMED_PARITY = {
    # name: (even part, odd part, g, h); None marks "no closed form"
    "exp": ("cosh", "sinh", None, None),
    "sinh": (0, "sinh", 0, None),
    "cosh": ("cosh", 0, None, 0),
    "sin": (0, "sin", 0, None),
    "cos": ("cos", 0, None, 0),
}


def _part(v):
    return Polynomial([0]) if v == 0 else Named(v)


def parity_decompose(f):
    """Split ``f`` into even and odd parts (and ``g``, ``h`` when possible)."""
    if isinstance(f, Polynomial):
        cs = f.coeffs
        zero = Fraction(0) if f.exact else 0.0
        even = [c if i % 2 == 0 else zero for i, c in enumerate(cs)]
        odd = [c if i % 2 else zero for i, c in enumerate(cs)]
        return ParityParts(Polynomial(even), Polynomial(odd),
                           Polynomial(cs[0::2]), Polynomial(cs[1::2] or [zero]))
    if isinstance(f, Named):
        e, o, g, h = _NAMED_PARITY[f.name]
        return ParityParts(_part(e), _part(o),
                           None if g is None else Polynomial([0]),
                           None if h is None else Polynomial([0]))
    parts = [(w, parity_decompose(g)) for w, g in f.terms]
    g = h = None
    if all(p.g is not None for _, p in parts):
        g = combine([(w, p.g) for w, p in parts])
    if all(p.h is not None for _, p in parts):
        h = combine([(w, p.h) for w, p in parts])
    return ParityParts(combine([(w, p.f_even) for w, p in parts]),
                       combine([(w, p.f_odd) for w, p in parts]), g, h)


def from_dict(d):
    """Parse the JSON function format."""
    if not isinstance(d, dict) or "type" not in d:
        raise ParseError("function object needs a 'type' field")
    kind = d["type"]
    try:
        if kind == "polynomial":
            cs = d["coeffs"]
            if not isinstance(cs, list) or not cs:
                raise ParseError("'coeffs' must be a nonempty list")
            return Polynomial(cs, exact=bool(d.get("exact", False)))
        if kind == "named":
            return Named(d["name"])
        if kind == "sum":
            terms = d["terms"]
            if not isinstance(terms, list):
                raise ParseError("'terms' must be a list")
            out = []
            for t in terms:
                sub = from_dict(t["func"])
                if isinstance(sub, Sum):
                    raise ParseError("nested sums are not allowed")
                out.append((t["weight"], sub))
            return Sum(out)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed {kind!r} function: {exc}") from exc
    raise ParseError(f"unknown function type {kind!r}")


def magnitude(f, x, k=0):
    """Rounding scale for ``f^(j)(x)``, ``j = 0..k``; shape ``(len(x), k+1)``.

    Evaluates the majorant with absolute coefficients at ``|x|``; named
    functions are bounded by ``exp(|x|)``.
    """
    poly, named = f.dense
    ax = np.abs(np.asarray(x, dtype=np.float64).reshape(-1))
    from . import _kernels
    out = _kernels._derivs_np(np.abs(poly), np.zeros(5), ax, k)
    wsum = np.abs(named).sum()
    if wsum:
        out += wsum * np.exp(ax)[:, None]
    return out
