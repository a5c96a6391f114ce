"""The numba and numpy backends must agree."""

import numpy as np
import pytest

from nnpres import _kernels

from fcorpus import CORPUS


def both(fn, *args):
    prev = _kernels.set_backend("numba")
    try:
        a = fn(*args)
        _kernels.set_backend("numpy")
        b = fn(*args)
    finally:
        _kernels.set_backend(prev)
    return a, b


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_backends_agree(name):
    f = CORPUS[name]
    poly, named = f.dense
    rng = np.random.default_rng(1)
    a = rng.uniform(0, 2, (64, 4, 4))
    s = a + np.transpose(a, (0, 2, 1))
    t = np.triu(a)
    x = rng.uniform(-3, 3, 50)
    # well-separated nodes plus exact repeats; near-coincident nodes are
    # ill-conditioned and amplify ulp differences between libm builds
    nodes = np.cumsum(rng.uniform(0.1, 0.8, (40, 5)), axis=1)
    nodes[::4, 1:3] = nodes[::4, :1]

    d1, d2 = both(_kernels.derivs, poly, named, x, 4)
    np.testing.assert_allclose(d1, d2, rtol=1e-13, atol=1e-13)
    (t1, s1), (t2, s2) = both(_kernels.taylor, poly, named, a)
    np.testing.assert_allclose(t1, t2, rtol=1e-12, atol=1e-12)
    assert np.array_equal(s1, s2)
    e1, e2 = both(_kernels.jacobi_eigvals, s)
    np.testing.assert_allclose(e1, e2, rtol=1e-12, atol=1e-12)
    n1, n2 = both(_kernels.newton, poly, named, s, e1)
    np.testing.assert_allclose(n1, n2, rtol=1e-9, atol=1e-9)
    r1, r2 = both(_kernels.triangular_explicit, poly, named, t)
    np.testing.assert_allclose(r1, r2, rtol=1e-12, atol=1e-12)
    v1, v2 = both(_kernels.divdiff_prefix, poly, named, nodes)
    np.testing.assert_allclose(v1, v2, rtol=1e-12, atol=1e-12)


def test_backend_switch():
    prev = _kernels.backend()
    assert _kernels.set_backend("numpy") == prev
    assert _kernels.backend() == "numpy"
    _kernels.set_backend(prev)
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")


def test_env_flag(monkeypatch):
    for val, want in (("1", True), ("true", True), ("0", False), ("", False)):
        monkeypatch.setenv("NNPRES_DISABLE_NUMBA", val)
        assert _kernels._env_disabled() is want
