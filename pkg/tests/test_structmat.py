import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nnpres.errors import NotSymmetric, PatternViolation
from nnpres.funcspec import Named
from nnpres.matfun import Matrix, apply_taylor
from nnpres.spectra import sym_eigs
from nnpres.structmat import (AntiBidiagonalSpec, anti_bidiagonal, antipower_pattern_verify,
                              circulant_from_row, embed_antidiag, embed_pad_zero, is_jacobi,
                              shift_nilpotent)


def test_shift_and_circulant():
    np.testing.assert_array_equal(shift_nilpotent(3).entries,
                                  [[0, 1, 0], [0, 0, 1], [0, 0, 0]])
    np.testing.assert_array_equal(circulant_from_row([1, 2, 3]).entries,
                                  [[1, 2, 3], [3, 1, 2], [2, 3, 1]])


def test_anti_bidiagonal_layout():
    a = anti_bidiagonal(AntiBidiagonalSpec(3, (1, 2, 3))).entries
    np.testing.assert_array_equal(a, [[0, 0, 3], [0, 1, 2], [3, 2, 0]])
    a4 = anti_bidiagonal(AntiBidiagonalSpec(4, (1, 2, 3, 4))).entries
    np.testing.assert_array_equal(a4, [[0, 0, 0, 4], [0, 0, 2, 3], [0, 2, 1, 0], [4, 3, 0, 0]])
    a2 = anti_bidiagonal(AntiBidiagonalSpec(2, (5, 7))).entries
    np.testing.assert_array_equal(a2, [[0, 7], [7, 5]])


def test_spec_validation():
    with pytest.raises(ValueError):
        AntiBidiagonalSpec(3, (1, 2))


@settings(max_examples=100, deadline=None)
@given(n=st.integers(1, 6), data=st.data())
def test_power_patterns(n, data):
    a = data.draw(st.lists(st.floats(0.1, 3.0), min_size=n, max_size=n))
    res = antipower_pattern_verify(AntiBidiagonalSpec(n, tuple(a)), (n + 1) // 2)
    assert res["product_checks"] >= 1


def test_pattern_violation_is_detected(monkeypatch):
    import nnpres.structmat as sm

    real = sm.anti_bidiagonal

    def broken(spec):
        a = real(spec).entries.copy()
        a[0, 0] = 1.0
        return Matrix(a)

    monkeypatch.setattr(sm, "anti_bidiagonal", broken)
    with pytest.raises(PatternViolation):
        sm.antipower_pattern_verify(AntiBidiagonalSpec(4, (1, 2, 3, 4)), 2)


def test_anti_bidiagonal_spectrum_alternates():
    # positive anti-bidiagonal matrices have x1 > -x2 > x3 > ... by magnitude
    rng = np.random.default_rng(4)
    for n in range(2, 7):
        a = anti_bidiagonal(AntiBidiagonalSpec(n, tuple(rng.uniform(0.5, 2, n)))).entries
        w = np.array(sym_eigs(a).values)
        order = w[np.argsort(-np.abs(w))]
        assert np.all(np.sign(order) == (-1.0) ** np.arange(n))


def test_embed_pad_zero_keeps_values():
    a = Matrix([[0.0, 2.0], [2.0, 0.0]], "symmetric")
    p = embed_pad_zero(a)
    assert p.n == 3 and p.structure == "symmetric"
    fa = apply_taylor(Named("cos"), a).entries
    fp = apply_taylor(Named("cos"), p).entries
    np.testing.assert_allclose(fp[:2, :2], fa, rtol=1e-14)
    assert fp[2, 2] == pytest.approx(1.0)


def test_embed_antidiag():
    b = np.array([[1.0, 2.0], [2.0, 0.5]])
    e = embed_antidiag(b).entries
    assert e.shape == (4, 4)
    np.testing.assert_array_equal(e[:2, 2:], b)
    assert embed_antidiag(b, odd_pad=True).n == 5
    with pytest.raises(NotSymmetric):
        embed_antidiag([[1, 2], [0, 1]])


def test_is_jacobi():
    assert is_jacobi([[2, 1, 0], [1, 2, 1], [0, 1, 2]])
    assert not is_jacobi([[2, -1], [-1, 2]])
    assert not is_jacobi([[0, 2], [2, 0]])
    assert not is_jacobi([[2, 1, 1], [1, 2, 1], [1, 1, 2]])
