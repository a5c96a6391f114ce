import math
import zlib

import numpy as np
import pytest

from nnpres.errors import (ComplexSpectrum, NotAnnihilating, NotTriangular, ParseError,
                           SpectraOverlap, StructureMismatch)
from nnpres.funcspec import Named, Polynomial
from nnpres.matfun import (Matrix, apply_block_triangular, apply_circulant, apply_companion,
                           apply_newton, apply_taylor, apply_triangular_explicit,
                           companion_matrix, solve_sylvester)
from nnpres.spectra import circ_spectrum, sym_eigs
from nnpres.structmat import circulant_from_row, shift_nilpotent

from fcorpus import CORPUS, QUARTIC, eigh_apply

QUARTIC_AT_2 = np.array([[7, -10 / 3], [-10 / 3, 7]])


def test_taylor_examples(backend):
    e = apply_taylor(Named("exp"), [[0, 1], [1, 0]]).entries
    np.testing.assert_allclose(e, [[math.cosh(1), math.sinh(1)], [math.sinh(1), math.cosh(1)]],
                               rtol=1e-14)
    s = apply_taylor(Polynomial([0, 0, 1]), shift_nilpotent(3)).entries
    np.testing.assert_array_equal(s, [[0, 0, 1], [0, 0, 0], [0, 0, 0]])
    np.testing.assert_allclose(apply_taylor(QUARTIC, [[0, 2], [2, 0]]).entries, QUARTIC_AT_2,
                               rtol=1e-14)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_taylor_matches_eigh(name, backend):
    f = CORPUS[name]
    rng = np.random.default_rng(zlib.crc32(name.encode()))
    for _ in range(10):
        n = int(rng.integers(1, 7))
        a = rng.uniform(-2, 2, (n, n))
        a = a + a.T
        got = apply_taylor(f, a).entries
        want = eigh_apply(f, a)
        assert np.abs(got - want).max() <= 1e-10 * (1 + np.abs(want).max())


def test_taylor_large_norm_exp(backend):
    a = np.array([[3.0, 4.0], [4.0, 3.0]])  # eigenvalues -1, 7
    got = apply_taylor(Named("exp"), a).entries
    want = eigh_apply(Named("exp"), a)
    np.testing.assert_allclose(got, want, rtol=1e-12)
    got = apply_taylor(Named("sin"), 5 * a).entries
    np.testing.assert_allclose(got, eigh_apply(Named("sin"), 5 * a), atol=1e-10)


def test_newton_examples(backend):
    out = apply_newton(QUARTIC, [[0, 2], [2, 0]], [-2, 2]).entries
    np.testing.assert_allclose(out, QUARTIC_AT_2, rtol=1e-12)
    a = [[2.0, 1.0], [0.0, 2.0]]
    np.testing.assert_allclose(apply_newton(Named("exp"), a, [2, 2]).entries,
                               [[math.e ** 2, math.e ** 2], [0, math.e ** 2]], rtol=1e-12)


def test_newton_rejects_complex_and_wrong_length():
    with pytest.raises(ComplexSpectrum):
        apply_newton(Named("exp"), [[0, 1], [-1, 0]], [1j, -1j])
    with pytest.raises(ValueError):
        apply_newton(Named("exp"), [[0, 1], [1, 0]], [1.0])


def test_triangular_examples(backend):
    out = apply_triangular_explicit(Named("exp"), [[0, 1], [0, 0]]).entries
    np.testing.assert_allclose(out, [[1, 1], [0, 1]], rtol=1e-14)
    a = np.array([[1.0, 2.0, 3.0], [0, 1.5, 0.5], [0, 0, 2.5]])
    np.testing.assert_allclose(apply_triangular_explicit(QUARTIC, a).entries,
                               apply_taylor(QUARTIC, a).entries, rtol=1e-12)
    with pytest.raises(NotTriangular):
        apply_triangular_explicit(Named("exp"), [[1, 0], [1, 1]])


def test_circulant_examples():
    row = apply_circulant(Polynomial([1, -2, 1]), [0, 1])
    assert row == pytest.approx([2, -2])
    assert apply_circulant(Polynomial([1]), [3, 1, 4]) == pytest.approx([1, 0, 0], abs=1e-15)
    a = circulant_from_row([0.5, 1.0, 0.25, 2.0])
    want = apply_taylor(Named("exp"), a).entries[0]
    assert apply_circulant(Named("exp"), a.entries[0]) == pytest.approx(want, rel=1e-12)


def test_block_triangular_examples():
    m = Matrix([[1.0, 2.0, 0.5], [0.0, 1.5, 1.0], [0, 0, 4.0]], "block-upper-triangular", (2, 1))
    out = apply_block_triangular(Named("exp"), m).entries
    np.testing.assert_allclose(out, apply_taylor(Named("exp"), m).entries, rtol=1e-12)
    with pytest.raises(SpectraOverlap):
        apply_block_triangular(Named("exp"), [[1.0, 1.0], [0.0, 1.0]], blocks=(1, 1))


def test_sylvester_residual():
    a = np.array([[1.0, 2.0], [0.0, 3.0]])
    c = np.array([[-1.0, 0.5], [0.0, -2.0]])
    b = np.array([[1.0, 2.0], [3.0, 4.0]])
    sol = solve_sylvester(Matrix(a, "upper-triangular"), Matrix(c, "upper-triangular"), b)
    np.testing.assert_allclose(a @ sol.X - sol.X @ c, b, atol=1e-12)
    assert sol.residual < 1e-8 * (1 + 4)


def test_companion_examples(backend):
    # A = diag(1, 2) is annihilated by (x-1)(x-2) = 2 - 3x + x^2
    out = apply_companion(Named("exp"), np.diag([1.0, 2.0]), [2, -3, 1]).entries
    np.testing.assert_allclose(out, np.diag([math.e, math.e ** 2]), rtol=1e-12)
    c = companion_matrix([2, -3, 1])
    np.testing.assert_array_equal(c, [[0, -2], [1, 3]])
    with pytest.raises(NotAnnihilating):
        apply_companion(Named("exp"), np.diag([1.0, 2.0]), [1, -2, 1])
    with pytest.raises(ValueError):
        apply_companion(Named("exp"), np.eye(2), [1, 2])


def test_methods_agree_on_symmetric(backend):
    rng = np.random.default_rng(21)
    for name, f in CORPUS.items():
        a = rng.uniform(0, 1.5, (4, 4))
        a = a + a.T
        want = apply_taylor(f, a).entries
        got = apply_newton(f, a, sym_eigs(a)).entries
        assert np.abs(got - want).max() <= 1e-8 * (1 + np.abs(want).max()), name


def test_matrix_validation():
    with pytest.raises(StructureMismatch):
        Matrix([[1, 0], [1, 1]], "upper-triangular")
    with pytest.raises(StructureMismatch):
        Matrix([[0, 2], [1, 0]], "circulant")
    with pytest.raises(StructureMismatch):
        Matrix([[1, 2], [3, 1]], "symmetric")
    with pytest.raises(StructureMismatch):
        Matrix([[1, 1, 1], [1, 1, 1], [1, 1, 1]], "jacobi")
    with pytest.raises(StructureMismatch):
        Matrix([[1.0, float("inf")], [0, 1]])
    Matrix([[2, 1, 0], [1, 2, 1], [0, 1, 2]], "jacobi")


def test_matrix_dict_roundtrip():
    m = Matrix([[0, 2], [2, 0]], "symmetric")
    assert Matrix.from_dict(m.to_dict()).to_dict() == m.to_dict()
    with pytest.raises(ParseError):
        Matrix.from_dict({"n": 3, "rows": [[0, 1], [1, 0]]})
    with pytest.raises(ParseError):
        Matrix.from_dict({"n": 2})


def test_result_keeps_structure_tag():
    assert apply_taylor(Named("exp"), Matrix([[0, 1], [1, 0]], "symmetric")).structure == "symmetric"
    assert apply_taylor(Named("exp"), Matrix([[1, 2], [0, 3]], "upper-triangular")).structure \
        == "upper-triangular"


def test_circulant_result_is_circulant():
    row = [0.2, 1.1, 0.7]
    out = apply_taylor(Named("cos"), circulant_from_row(row))
    assert out.structure == "circulant"
    spec = circ_spectrum(row)
    assert len(spec) == 3
