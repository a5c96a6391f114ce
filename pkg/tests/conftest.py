import numpy as np
import pytest

from nnpres import _kernels
from nnpres.funcspec import Named, Polynomial, Sum


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile (or load cached) jit kernels once, so timed tests see steady state.

    Goes through the public entry points, which pass read-only arrays and
    so need their own specializations.
    """
    if not _kernels._HAVE_NUMBA:
        return
    from nnpres import checkers, divdiff, matfun, spectra

    prev = _kernels.backend()
    _kernels.set_backend("numba")
    f = Sum([(1.0, Polynomial([1.0, -1.0, 0.5])), (0.5, Named("exp")), (0.25, Named("sin"))])
    poly, named = f.dense
    _kernels.eval_complex(poly, named, np.array([1j]))
    s = np.array([[1.0, 0.5], [0.5, 2.0]])
    t = np.array([[1.0, 0.5], [0.0, 2.0]])
    matfun.apply_taylor(f, s)
    matfun.apply_newton(f, s, spectra.sym_eigs(s))
    matfun.apply_triangular_explicit(f, t)
    matfun.apply_circulant(f, [0.0, 1.0])
    matfun.apply_companion(f, np.diag([1.0, 2.0]), [2.0, -3.0, 1.0])
    matfun.apply_block_triangular(f, t, (1, 1))
    divdiff.divided_difference(f, [0.0, 0.0, 1.0])
    divdiff.opitz_matrix_check(f, [0.0, 1.0])
    spectra.spectral_radius(np.abs(s))
    cfg = checkers.SamplerConfig(grid_points=4, random_samples=8)
    checkers.check_f1(f, cfg)
    checkers.check_divdiff_criterion(f, 2, cfg)
    checkers.check_f2(f, cfg)
    checkers.check_newnc(f, 2, cfg)
    checkers.check_circulant_preservation(f, 2, cfg)
    for cls in checkers.CLASSES:
        checkers.falsify(f, cls, 2, budget=16)
    _kernels.set_backend(prev)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test once per kernel backend."""
    if request.param == "numba" and not _kernels._HAVE_NUMBA:
        pytest.skip("numba not installed")
    prev = _kernels.backend()
    _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[_ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
