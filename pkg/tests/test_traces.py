from fractions import Fraction
import math
import random

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from sturmian.cf import CFWord, evaluate, extend, word
from sturmian.traces import (EXACT, TracePoly, cheb_poly, commutator_check,
                             dilated_cheb, discriminant, ext_cheby_form2_residual, first_trace_ids,
                             fricke_vogt_residual, matrix_value, one_step, trace_cheb_combine, trace_step,
                             transfer_matrix)
from sturmian.words import period_direct

from conftest import random_words

E_SYM = sympy.Symbol("E")


def sympy_trace(c, V):
    """Trace of the ordered product of one-step matrices over the period word, via sympy."""
    one, zero = sympy.Poly(1, E_SYM), sympy.Poly(0, E_SYM)
    a, b, cc, d = one, zero, zero, one
    for bit in period_direct(evaluate(c)):
        x = sympy.Poly(E_SYM - V * bit, E_SYM)
        a, b, cc, d = x * a - cc, x * b - d, a, b
    return a + d


def poly(*coeffs):
    return TracePoly(list(coeffs))


def test_one_step_examples():
    assert one_step(0, 5).tup() == (poly(0, 1), -1, 1, 0)
    assert one_step(1, 5).tup() == (poly(-5, 1), -1, 1, 0)
    assert one_step(-1, 5).tup() == (poly(5, 1), -1, 1, 0)


def test_transfer_matrix_examples():
    assert transfer_matrix(word(), 3).tup() == (poly(0, 1), -1, 1, 0)
    assert transfer_matrix(CFWord((0,)), 3).tup() == (1, -3, 0, 1)
    assert transfer_matrix(word(1), 3).tup() == (poly(-3, 1), -1, 1, 0)


def test_discriminant_examples():
    assert discriminant(CFWord((0, 0, -1)), 7) == poly(7, 1)
    assert discriminant(CFWord((0,)), 7) == poly(2)
    assert discriminant(word(2), 5) == poly(-2, -5, 1)


def test_discriminant_supported_infinite_words():
    assert discriminant(CFWord((0, 0, 0)), 5) == poly(2)
    assert discriminant(CFWord((0, 0, 1, -1)), 5) == poly(2)


@pytest.mark.parametrize("c", random_words(25, seed=11, q_max=40))
def test_discriminant_matches_sympy(c):
    V = Fraction(7, 3)
    got = discriminant(c, V)
    ref = sympy_trace(c, sympy.Rational(7, 3)).all_coeffs()[::-1]
    assert list(got.coeffs) == [Fraction(int(x.p), int(x.q)) for x in ref]


@pytest.mark.parametrize("c", random_words(25, seed=12, q_max=60))
def test_determinant_is_one(c):
    assert transfer_matrix(c, Fraction(9, 2)).det() == poly(1)
    for E in (-2.3, 0.1, 1.7, 5.2):
        (a, b), (cc, d) = matrix_value(c, 4.5, E)
        assert abs(a * d - b * cc - 1) <= 1e-10 * max(1.0, abs(a * d) + abs(b * cc))


def test_trace_depends_only_on_value():
    assert discriminant(word(2, 1), 5) == discriminant(word(3), 5)
    assert discriminant(CFWord((0, 0, 1, 2, 0)), 5) == discriminant(word(1), 5)


def test_trace_step_example():
    t = trace_step(discriminant(word(), 5), discriminant(word(1), 5), discriminant(CFWord((0, 0, 0)), 5))
    assert t == discriminant(word(2), 5)
    assert trace_step(2, 2, 2) == 2


@pytest.mark.parametrize("c", random_words(40, seed=13, q_max=60))
def test_first_trace_identities(c):
    assert all(p.is_zero() for p in first_trace_ids(c, Fraction(5, 2)).values())


def test_trace_cheb_combine_example():
    assert trace_cheb_combine(word(), 2, 1, 5) == discriminant(word(3), 5)


@pytest.mark.parametrize("c", random_words(12, seed=14, q_max=30))
def test_trace_cheb_combine_all_l(c):
    V = Fraction(11, 2)
    for m in range(0, 4):
        target = discriminant(extend(c, m + 1), V)
        for l in range(-1, m + 1):
            assert trace_cheb_combine(c, m, l, V) == target


@pytest.mark.parametrize("c, m, E, V", [(word(), 1, 0.37, 5.0), (word(2, 1), 3, -1.2, 4.5)])
def test_fricke_vogt_examples(c, m, E, V):
    assert abs(fricke_vogt_residual(c, m, E, V)) < 1e-9


@pytest.mark.parametrize("c, m, xi, ell, E, V", [(word(), 2, 0, -1, 1.1, 6.0),
                                                 (word(1), 3, 1, 0, -0.4, 5.0)])
def test_ext_cheby_form2_examples(c, m, xi, ell, E, V):
    assert abs(ext_cheby_form2_residual(c, m, xi, ell, E, V)) < 1e-9


@pytest.mark.parametrize("c, m, n, E, V", [(word(), 1, 1, 0.9, 5.0), (word(2), 2, -1, 2.2, 4.1)])
def test_commutator_examples(c, m, n, E, V):
    assert max(abs(x) for x in commutator_check(c, m, n, E, V)) < 1e-8


def test_commutator_zero_potential():
    assert all(x == 0 for x in commutator_check(word(2), 1, 1, Fraction(1, 3), 0, EXACT))


def test_identities_vanish_on_random_rational_grid():
    rng = random.Random(3)
    words = random_words(40, seed=15, q_max=40)
    for _ in range(1000):
        c = rng.choice(words)
        m = rng.randint(1, 3)
        E = Fraction(rng.randint(-300, 300), 100)
        V = rng.choice([Fraction(9, 2), Fraction(5), Fraction(11, 2), Fraction(8)])
        assert fricke_vogt_residual(c, m, E, V, EXACT) == 0
        assert ext_cheby_form2_residual(c, m, rng.randint(0, 1), rng.randint(-1, 0), E, V, EXACT) == 0


@pytest.mark.parametrize("n, x, expected", [(-1, 7, 0), (0, 7, 1), (1, 7, 7), (5, 0, 0), (4, 0, 1)])
def test_dilated_cheb_values(n, x, expected):
    assert dilated_cheb(n, x) == expected


def test_cheb_trig_example():
    for theta in (0.3, 1.1, 2.5):
        assert math.isclose(dilated_cheb(3, 2 * math.cos(theta)), math.sin(4 * theta) / math.sin(theta),
                            abs_tol=1e-12)


def test_cheb_poly_matches_recursion():
    assert cheb_poly(3).coeffs == (0, -2, 0, 1)


fractions_big = st.fractions(min_value=2, max_value=50, max_denominator=20)


@given(fractions_big, st.integers(1, 40), st.booleans())
@settings(max_examples=200)
def test_chebyshev_bounds(x, n, negate):
    x = -x if negate else x
    s = lambda k: dilated_cheb(k, x)
    sgn = 1 if x > 0 else -1
    assert 2 * abs(s(n)) - abs(s(n - 1)) >= 0
    lower = sgn ** n * (s(n) - x / 2 * s(n - 1))
    assert lower >= 1
    if abs(x) > 2:
        assert lower > 1
    assert abs(s(n)) >= 1


def test_mat2poly_algebra():
    m = transfer_matrix(word(2, 1), 5)
    assert (m @ m.adj()).tup() == (1, 0, 0, 1)
    assert (m ** 2).trace() == m.trace() * m.trace() - 2
