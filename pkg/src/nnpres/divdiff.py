"""Divided differences, including repeated (confluent) nodes."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .funcspec import Polynomial, derivatives

__all__ = ["DivDiffResult", "divided_difference", "opitz_matrix_check",
           "confluence_tolerance"]


@dataclass(frozen=True)
class DivDiffResult:
    nodes: tuple
    value: float

    @property
    def order(self):
        return len(self.nodes)


def confluence_tolerance(nodes):
    """Gap below which sorted nodes are treated as equal."""
    return _kernels.CONF_RTOL * (1.0 + max(abs(float(x)) for x in nodes))


def _exact_table(f, xs):
    k = len(xs)
    level = [derivatives(f, x, 0)[0] for x in xs]
    for d in range(1, k):
        nxt = []
        for i in range(k - d):
            gap = xs[i + d] - xs[i]
            if gap == 0:
                nxt.append(derivatives(f, xs[i], d)[d] / math.factorial(d))
            else:
                nxt.append((level[i + 1] - level[i]) / gap)
        level = nxt
    return level[0]


def divided_difference(f, nodes):
    """``f[x_1, ..., x_k]`` over the node multiset, sorted ascending.

    Blocks of nodes closer than :func:`confluence_tolerance` use the
    derivative formula ``f^(m)(x)/m!``.  Exact polynomials at rational
    nodes are evaluated in rational arithmetic.

    Examples
    --------
    >>> from nnpres.funcspec import Polynomial, Named
    >>> divided_difference(Polynomial([0, 0, 1]), [2, 1]).value
    Fraction(3, 1)
    >>> divided_difference(Named("exp"), [0, 0, 0]).value
    0.5
    """
    nodes = list(nodes)
    if not nodes:
        raise ValueError("need at least one node")
    exact = (isinstance(f, Polynomial) and f.exact
             and all(isinstance(x, (int, Fraction)) for x in nodes))
    if exact:
        xs = sorted(Fraction(x) for x in nodes)
        return DivDiffResult(tuple(xs), _exact_table(f, xs))
    xs = np.sort(np.asarray(nodes, dtype=np.float64))
    if not np.all(np.isfinite(xs)):
        raise ValueError("nodes must be finite")
    poly, named = f.dense
    value = float(_kernels.divdiff(poly, named, xs[None, :])[0])
    return DivDiffResult(tuple(float(x) for x in xs), value)


def opitz_matrix_check(f, nodes):
    """Entry ``(1, k)`` of ``f`` applied to the bidiagonal node matrix.

    The matrix carries the sorted nodes on its diagonal and ones on the
    first superdiagonal; its corner entry equals ``f[x_1, ..., x_k]``.
    """
    from .matfun import apply_taylor

    xs = np.sort(np.asarray(nodes, dtype=np.float64))
    k = xs.size
    if k == 0:
        raise ValueError("need at least one node")
    a = np.diag(xs) + np.diag(np.ones(k - 1), 1)
    return float(apply_taylor(f, a).entries[0, k - 1])
