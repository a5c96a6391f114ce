"""Acceptance criteria, one test each.

Each test prints a single ``criterion N: PASS/FAIL`` line (collected in
the terminal summary).  Runtime budgets are measured after the jit
kernels are warmed by the session fixture in ``conftest.py``.
"""

import contextlib
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from nnpres.checkers import (SamplerConfig, check_divdiff_criterion, check_f2,
                             check_sym_parity, falsify, newnc_values)
from nnpres.divdiff import divided_difference, opitz_matrix_check
from nnpres.funcspec import Named, Polynomial, taylor_coefficients
from nnpres.matfun import (Matrix, apply_block_triangular, apply_circulant, apply_companion,
                           apply_newton, apply_taylor, apply_triangular_explicit)
from nnpres.niep import check_jll, check_moments, check_newton_ineq
from nnpres.spectra import circ_spectrum, diagonal_spectrum, spectral_radius, sym_eigs
from nnpres.structmat import (AntiBidiagonalSpec, antipower_pattern_verify, circulant_from_row,
                              shift_nilpotent)

from fcorpus import BETA, CORPUS, SEXTIC, SEXTIC_ODD, QUARTIC, eigh_apply


@contextlib.contextmanager
def criterion(log, num, title, budget=None):
    t0 = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - t0
        if budget is not None:
            assert elapsed < budget, f"runtime {elapsed:.2f}s exceeds {budget}s"
    except BaseException as exc:
        elapsed = time.perf_counter() - t0
        log.append(f"criterion {num}: FAIL  {title} ({elapsed:.2f}s): {exc}")
        print(log[-1])
        raise
    log.append(f"criterion {num}: PASS  {title} ({elapsed:.2f}s)")
    print(log[-1])


def _max_err(got, want):
    return float(np.abs(got - want).max() / (1.0 + np.abs(want).max()))


# ---------------------------------------------------------------- 1


def test_criterion_1_quartic_counterexample(acceptance_log):
    with criterion(acceptance_log, 1, "quartic counterexample", budget=1.0):
        a = np.array([[0.0, 2.0], [2.0, 0.0]])
        results = {
            "taylor": apply_taylor(QUARTIC, a),
            "newton": apply_newton(QUARTIC, a, sym_eigs(a)),
            "circulant": circulant_from_row(apply_circulant(QUARTIC, [0.0, 2.0])),
            "companion": apply_companion(QUARTIC, a, [-4.0, 0.0, 1.0]),
        }
        for name, m in results.items():
            for entry in ((0, 1), (1, 0)):
                assert abs(m.entries[entry] + 10 / 3) <= 1e-10, name
        assert abs(eigh_apply(QUARTIC, a)[0, 1] + 10 / 3) <= 1e-10

        def off(m):
            return apply_taylor(QUARTIC, [[0.0, m], [m, 0.0]]).entries[0, 1]

        assert abs(off(math.sqrt(1.5))) <= 1e-10
        ms = np.random.default_rng(81).uniform(math.sqrt(1.5) + 1e-3, 10.0, 50)
        assert all(off(m) < 0 for m in ms)

        assert check_divdiff_criterion(QUARTIC, 2).passed
        f2 = check_f2(QUARTIC)
        assert f2.verdict == "fail"
        assert f2.witness.params["expression"] == pytest.approx(-20 / 3, rel=1e-12)


# ---------------------------------------------------------------- 2


def _symmetric(rng, n):
    a = rng.uniform(0.0, 1.5, (n, n))
    return a + a.T


def _triangular(rng, n):
    a = np.triu(rng.uniform(-1.0, 2.0, (n, n)))
    # keep some diagonal values repeated to exercise confluent nodes
    if rng.random() < 0.3 and n > 1:
        a[1, 1] = a[0, 0]
    return a


def _block(rng, n):
    n1 = int(rng.integers(1, n))
    a = np.zeros((n, n))
    a[:n1, :n1] = rng.uniform(-0.3, 0.3, (n1, n1))
    a[n1:, n1:] = rng.uniform(-0.3, 0.3, (n - n1, n - n1)) + 4.0 * np.eye(n - n1)
    a[:n1, n1:] = rng.uniform(-1.0, 1.0, (n1, n - n1))
    return Matrix(a, "block-upper-triangular", (n1, n - n1))


def _similar_to_diagonal(rng, n):
    # distinct known eigenvalues, so the characteristic polynomial is minimal
    lam = np.sort(rng.uniform(-2.0, 2.0, n))
    while n > 1 and np.diff(lam).min() < 0.05:
        lam = np.sort(rng.uniform(-2.0, 2.0, n))
    s = np.eye(n) + 0.3 * rng.uniform(-1.0, 1.0, (n, n))
    a = s @ np.diag(lam) @ np.linalg.inv(s)
    charpoly = np.polynomial.polynomial.polyfromroots(lam)
    return a, charpoly


def test_criterion_2_method_agreement(acceptance_log):
    with criterion(acceptance_log, 2, "method agreement", budget=30.0):
        rng = np.random.default_rng(2)
        worst = {}
        for _ in range(300):
            n = int(rng.integers(2, 7))
            s = _symmetric(rng, n)
            t = _triangular(rng, n)
            row = rng.uniform(-1.0, 2.0, n)
            blk = _block(rng, n)
            gen, charpoly = _similar_to_diagonal(rng, n)
            eigs = sym_eigs(s)
            for name, f in CORPUS.items():
                cases = {
                    "newton": (apply_newton(f, s, eigs).entries, apply_taylor(f, s).entries),
                    "triangular": (apply_triangular_explicit(f, t).entries,
                                   apply_taylor(f, t).entries),
                    "circulant": (circulant_from_row(apply_circulant(f, row)).entries,
                                  apply_taylor(f, circulant_from_row(row)).entries),
                    "block": (apply_block_triangular(f, blk).entries,
                              apply_taylor(f, blk).entries),
                    "companion": (apply_companion(f, gen, charpoly).entries,
                                  apply_taylor(f, gen).entries),
                }
                for method, (got, want) in cases.items():
                    err = _max_err(got, want)
                    worst[method] = max(worst.get(method, 0.0), err)
                    assert err <= 1e-8, (method, name, n, err)
        print("worst relative discrepancy:", {k: f"{v:.1e}" for k, v in worst.items()})


# ---------------------------------------------------------------- 3


def test_criterion_3_divdiff_oracle(acceptance_log):
    with criterion(acceptance_log, 3, "divided-difference oracle", budget=5.0):
        rng = np.random.default_rng(3)
        funcs = list(CORPUS.values())
        confluent = 0
        for t in range(200):
            k = int(rng.integers(2 if t % 3 == 0 else 1, 7))
            nodes = rng.uniform(-3.0, 3.0, k)
            if t % 3 == 0:
                nodes[1:int(rng.integers(2, k + 1))] = nodes[0]
                confluent += 1
            f = funcs[t % len(funcs)]
            a = float(divided_difference(f, nodes).value)
            b = opitz_matrix_check(f, nodes)
            if f.is_polynomial and f.degree < k - 1:
                # exact value is zero; no relative comparison is possible
                bound = 1e-12 * (1.0 + max(abs(float(f(x))) for x in nodes))
                assert abs(a) <= bound and abs(b) <= bound
            else:
                assert abs(a - b) <= 1e-8 * max(abs(a), abs(b)), (t, nodes, a, b)
        assert confluent == 67


# ---------------------------------------------------------------- 4


def divdiff_corpus():
    """25 polynomials with random rounded coefficients and 25 with real roots in [-1, 1]."""
    polys = []
    rng = np.random.default_rng(2024)
    for _ in range(25):
        deg = int(rng.integers(1, 7))
        polys.append(Polynomial(np.round(rng.uniform(-1, 1, deg + 1), 3)))
    rng = np.random.default_rng(7)
    for _ in range(25):
        deg = int(rng.integers(1, 7))
        c = np.polynomial.polynomial.polyfromroots(-rng.uniform(-1, 1, deg))
        polys.append(Polynomial(np.round(c / np.abs(c).max(), 4)))
    return polys


def test_criterion_4_divdiff_falsify_round_trip(acceptance_log):
    with criterion(acceptance_log, 4, "divided-difference criterion vs falsifier", budget=60.0):
        tally = {"fail": 0, "pass-exact": 0, "pass-sampled": 0}
        for i, f in enumerate(divdiff_corpus()):
            for n in (2, 3, 4):
                verdict = check_divdiff_criterion(f, n).verdict
                tally[verdict] += 1
                if verdict == "pass-sampled":
                    continue
                found = falsify(f, "triangular", n, budget=50_000, seed=i)
                if verdict == "fail":
                    assert found.verdict == "fail", (i, n)
                else:
                    assert found.verdict != "fail", (i, n, found.witness.to_dict())
        assert tally["fail"] > 0 and tally["pass-exact"] > 0
        print("verdicts:", tally)


# ---------------------------------------------------------------- 5


def test_criterion_5_order_two_example(acceptance_log):
    with criterion(acceptance_log, 5, "even/odd example at order two", budget=10.0):
        assert check_f2(SEXTIC, SamplerConfig(random_samples=2000)).verdict == "pass-sampled"
        assert check_sym_parity(SEXTIC_ODD, 2).verdict == "fail"
        r = falsify(SEXTIC_ODD, "symmetric", 2, seed=0)
        assert r.verdict == "fail"
        assert r.witness.entry == (0, 0)
        assert r.witness.value <= -0.01
        got = apply_taylor(SEXTIC_ODD, r.witness.matrix).entries[0, 0]
        assert got == pytest.approx(r.witness.value, rel=1e-12)
        b = math.sqrt(0.07)
        hand = apply_taylor(SEXTIC_ODD, [[0.0, b], [b, 0.6]]).entries[0, 0]
        assert -0.022 < hand < -0.02
        assert BETA == 0.3


# ---------------------------------------------------------------- 6


def test_criterion_6_order_two_reduction(acceptance_log):
    with criterion(acceptance_log, 6, "newnc conditions reduce to the order-two conditions"):
        rng = np.random.default_rng(6)
        for t in range(100):
            f = (QUARTIC, SEXTIC, Named("exp"))[t % 3]
            x, y = np.sort(rng.uniform(0.01, 3.0, 2))
            first, second = newnc_values(f, (y + x, x - y))
            fp, fm = float(f(x + y)), float(f(x - y))
            cond1 = fp - fm
            cond2 = (x + y) * fm + (y - x) * fp
            scale = 1.0 + abs(fp) + abs(fm)
            # the order-two divided difference carries a 1/(2y) factor
            assert abs(2 * y * first - cond1) <= 1e-10 * scale
            for v in second:
                assert abs(2 * y * v - cond2) <= 1e-10 * scale


# ---------------------------------------------------------------- 7


def test_criterion_7_antipower_patterns(acceptance_log):
    with criterion(acceptance_log, 7, "anti-bidiagonal power patterns"):
        rng = np.random.default_rng(8)
        checks = 0
        for _ in range(100):
            n = int(rng.integers(1, 7))
            spec = AntiBidiagonalSpec(n, tuple(rng.uniform(0.1, 2.0, n)))
            out = antipower_pattern_verify(spec, (n + 1) // 2, zero_atol=1e-12, prod_rtol=1e-10)
            checks += out["zero_checks"] + out["product_checks"]
        assert checks > 0


# ---------------------------------------------------------------- 8


def _structured_nonnegative(rng, kind, n):
    if kind == "symmetric":
        a = rng.uniform(0.0, 2.0, (n, n))
        return a + a.T, lambda m: list(sym_eigs(m).values)
    if kind == "triangular":
        return np.triu(rng.uniform(0.0, 2.0, (n, n))), lambda m: list(diagonal_spectrum(m).values)
    row = rng.uniform(0.0, 2.0, n)
    return circulant_from_row(row).entries, lambda m: list(circ_spectrum(m[0]).values)


def test_criterion_8_niep_properties(acceptance_log):
    with criterion(acceptance_log, 8, "spectral screening properties"):
        rng = np.random.default_rng(9)
        kinds = ("symmetric", "triangular", "circulant")
        for t in range(300):
            kind = kinds[t % 3]
            n = int(rng.integers(1, 7))
            a, spectrum_of = _structured_nonnegative(rng, kind, n)
            lam = spectrum_of(a)
            rho = spectral_radius(a)
            for delta in (0.0, 0.1, 1.0):
                r = max(rho * (1 + delta), max(abs(v) for v in lam))
                rep = check_newton_ineq(lam, r)
                assert rep.passed, (kind, n, delta, rep.to_dict())
            if kind != "circulant" or all(abs(complex(v).imag) == 0 for v in lam):
                real = [complex(v).real for v in lam]
                assert check_moments(real).passed
                assert check_jll(real, 4, 4).passed
        assert not check_moments((1, -2)).passed
        assert check_moments((2, -1, -1)).passed and check_jll((2, -1, -1)).passed
        vals = sorted(round(complex(v).real, 12) for v in circ_spectrum([0, 1, 1]))
        assert vals == [-1.0, -1.0, 2.0]
        assert all(abs(complex(v).imag) < 1e-12 for v in circ_spectrum([0, 1, 1]))


# ---------------------------------------------------------------- 9


def test_criterion_9_nilpotent_shift(acceptance_log):
    with criterion(acceptance_log, 9, "functions of the nilpotent shift"):
        polys = [QUARTIC, Polynomial([Fraction(3), 0, -1, Fraction(1, 7), 2, 0, 5]),
                 Polynomial([0.5, -2.0, 0.25, 1.0, -1.5, 3.0, 0.0, 2.0, -0.75])]
        for n in range(1, 9):
            s = shift_nilpotent(n)
            for f in polys + [Named("exp")]:
                coeffs = [float(c) for c in taylor_coefficients(f, n - 1)]
                want = np.zeros((n, n))
                for k, c in enumerate(coeffs):
                    want += c * np.eye(n, k=k)
                got = apply_taylor(f, s).entries
                if f.is_polynomial:
                    assert np.array_equal(got, want), (n, f)
                else:
                    assert np.abs(got - want).max() <= 1e-12, n
