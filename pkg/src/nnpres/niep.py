"""Necessary conditions for a real tuple to be the spectrum of a nonnegative matrix."""

import math
from dataclasses import dataclass, field
from functools import cached_property

from .errors import ParseError, ShiftTooSmall

__all__ = ["SpectrumTuple", "NiepReport", "power_sums", "elementary_symmetric",
           "normalized_coefficients", "check_moments", "check_jll",
           "check_newton_ineq", "diagnostics"]

MOMENT_RTOL = 1e-12
JLL_RTOL = 1e-9
NEWTON_RTOL = 1e-10


@dataclass(frozen=True)
class SpectrumTuple:
    """A real tuple ``Lambda``; derived quantities are cached.

    Values are stored sorted ascending, so every derived quantity is
    invariant under reordering of the input.
    """

    values: tuple

    def __post_init__(self):
        vals = tuple(sorted(float(v) for v in self.values))
        if not vals:
            raise ValueError("tuple must be nonempty")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("tuple entries must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def n(self):
        return len(self.values)

    def power_sums(self, m_max):
        return power_sums(self.values, m_max)

    @cached_property
    def elementary(self):
        return elementary_symmetric(self.values)

    def normalized_coefficients(self, r):
        return normalized_coefficients(self.values, r)

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(tuple(d["tuple"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed tuple object: {exc}") from exc

    @classmethod
    def parse(cls, text):
        """Comma-separated reals, e.g. ``"2,-1,-1"``."""
        try:
            return cls(tuple(float(t) for t in text.split(",") if t.strip()))
        except ValueError as exc:
            raise ParseError(f"cannot parse tuple {text!r}: {exc}") from exc

    def to_dict(self):
        return {"tuple": list(self.values)}


@dataclass(frozen=True)
class NiepReport:
    check: str
    passed: bool
    violation: dict = None
    details: dict = field(default_factory=dict)

    def to_dict(self):
        d = {"check": self.check, "passed": self.passed}
        if self.violation is not None:
            d["violation"] = self.violation
        if self.details:
            d["details"] = self.details
        return d


def _vals(lam):
    if isinstance(lam, SpectrumTuple):
        return lam.values
    return SpectrumTuple(tuple(lam)).values


def power_sums(lam, m_max):
    """``[s_1, ..., s_{m_max}]`` with ``s_m = sum lambda^m``.

    Examples
    --------
    >>> power_sums((2, -1, -1), 3)
    [0.0, 6.0, 6.0]
    """
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    v = _vals(lam)
    return [float(math.fsum(x ** m for x in v)) for m in range(1, m_max + 1)]


def elementary_symmetric(lam):
    """``[sigma_1, ..., sigma_n]`` read off the product of ``(x + lambda_i)``.

    Examples
    --------
    >>> elementary_symmetric((1, 2, 3))
    [6.0, 11.0, 6.0]
    """
    v = _vals(lam)
    # coefficients of prod (x + lambda_i), highest power first
    c = [1.0]
    for lam_i in v:
        nxt = c + [0.0]
        for j in range(1, len(nxt)):
            nxt[j] += lam_i * c[j - 1]
        c = nxt
    return [float(x) for x in c[1:]]


def normalized_coefficients(lam, r):
    """``c_0..c_n`` of ``M = r I - A`` when ``A`` has spectrum ``lam``.

    ``det(t I - M) = sum_j (-1)^j C(n, j) c_j t^(n-j)``, so ``c_j`` is the
    ``j``-th elementary symmetric function of ``mu = r - lambda`` divided
    by ``C(n, j)``.
    """
    v = _vals(lam)
    n = len(v)
    e = elementary_symmetric([r - x for x in v])
    return [1.0] + [e[j - 1] / math.comb(n, j) for j in range(1, n + 1)]


def _conjugate_closed(vals, rtol=1e-9):
    """Complex values as a tuple, provided they pair up under conjugation."""
    v = [complex(x) for x in vals]
    scale = 1.0 + max(abs(x) for x in v)
    rest = list(v)
    while rest:
        x = rest.pop()
        if abs(x.imag) <= rtol * scale:
            continue
        j = min(range(len(rest)), key=lambda t: abs(rest[t] - x.conjugate()), default=None)
        if j is None or abs(rest[j] - x.conjugate()) > rtol * scale:
            raise ValueError("complex spectrum is not closed under conjugation")
        rest.pop(j)
    return v


def _complex_coefficients(vals, r):
    n = len(vals)
    c = [1.0 + 0j]
    for mu in (r - x for x in vals):
        nxt = c + [0j]
        for j in range(1, len(nxt)):
            nxt[j] += mu * c[j - 1]
        c = nxt
    # conjugate pairs make every coefficient real
    return [1.0] + [c[j].real / math.comb(n, j) for j in range(1, n + 1)]


def _moment_scale(v, m):
    return max(1.0, math.fsum(abs(x) ** m for x in v))


def check_moments(lam, m_max=16):
    """``s_m >= 0`` for ``m = 1..m_max`` (relative slack ``1e-12``)."""
    v = _vals(lam)
    for m, s in enumerate(power_sums(v, m_max), start=1):
        if s < -MOMENT_RTOL * _moment_scale(v, m):
            return NiepReport("moments", False, {"m": m, "s_m": s})
    return NiepReport("moments", True, details={"m_max": m_max})


def check_jll(lam, k_max=4, m_max=4):
    """JLL inequalities ``s_k^m <= n^(m-1) s_km`` for ``k <= k_max``, ``2 <= m <= m_max``.

    Moments up to ``k_max * m_max`` are checked first; the first violation
    is reported.
    """
    if k_max < 1 or m_max < 1:
        raise ValueError("k_max and m_max must be >= 1")
    v = _vals(lam)
    n = len(v)
    mom = check_moments(v, k_max * m_max)
    if not mom.passed:
        return NiepReport("jll", False, mom.violation, {"stage": "moments"})
    s = [None] + power_sums(v, k_max * m_max)
    for k in range(1, k_max + 1):
        for m in range(2, m_max + 1):
            lhs = s[k] ** m
            rhs = n ** (m - 1) * s[k * m]
            slack = JLL_RTOL * max(1.0, abs(lhs), n ** (m - 1) * _moment_scale(v, k * m))
            if lhs > rhs + slack:
                return NiepReport("jll", False, {"k": k, "m": m, "lhs": lhs, "rhs": rhs})
    return NiepReport("jll", True, details={"k_max": k_max, "m_max": m_max})


def check_newton_ineq(lam, r):
    """Newton's inequalities ``c_j^2 >= c_{j-1} c_{j+1}`` for ``r I - A``.

    ``r`` must dominate the spectrum: ``r >= max |lambda|``.  Complex
    values (circulant spectra) are accepted when closed under conjugation.

    Examples
    --------
    >>> check_newton_ineq((1, -1), 1).passed
    True
    """
    raw = list(lam.values if hasattr(lam, "values") else lam)
    if any(isinstance(x, complex) and x.imag != 0 for x in raw):
        v = _conjugate_closed(raw)
    else:
        v = _vals([complex(x).real for x in raw])
    top = max(abs(x) for x in v)
    if r < top - 1e-12 * (1.0 + top):
        raise ShiftTooSmall(f"shift {r} below max |lambda| = {top}")
    if isinstance(v[0], complex):
        c = _complex_coefficients(v, r)
    else:
        c = normalized_coefficients(v, r)
    for j in range(1, len(v)):
        lhs, rhs = c[j] ** 2, c[j - 1] * c[j + 1]
        scale = max(1.0, lhs, abs(rhs))
        if lhs < rhs - NEWTON_RTOL * scale:
            return NiepReport("newton", False, {"j": j, "c_j^2": lhs, "c_j-1*c_j+1": rhs},
                              {"r": r, "c": c})
    return NiepReport("newton", True, details={"r": r, "c": c})


def diagnostics(lam):
    """Consequences of moment nonnegativity, reported for information only.

    ``perron``: the largest modulus is itself in the tuple.
    ``conjugation_closed``: always true for real tuples.
    """
    v = _vals(lam)
    top = max(abs(x) for x in v)
    return {"perron": bool(max(v) >= top - 1e-12 * (1.0 + top)),
            "conjugation_closed": True,
            "spectral_radius": top}
