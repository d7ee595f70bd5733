from fractions import Fraction
import math

import pytest
from hypothesis import given, strategies as st

from sturmian.cf import (INFINITY, MINUS_ONE, CFStream, CFWord, Convergents, Rational, cf_of_real,
                         convergents, evaluate, extend, parse_word, reduce_word, validate, word)
from sturmian.errors import InvalidExtension, MalformedWord, NotInUnitInterval


def naive_value(tail):
    """Continued fraction 1/(c1 + 1/(c2 + ...)) evaluated bottom-up."""
    x = Fraction(0)
    for c in reversed(tail):
        x = 1 / (c + x)
    return x


tails = st.lists(st.integers(1, 6), min_size=1, max_size=9)


@pytest.mark.parametrize("entries", [(0, 0, 2, 1, 1, 2), (0, 0), (0,), (0, 0, -1), (0, 0, 3, 0)])
def test_validate_accepts(entries):
    assert validate(entries).entries == entries


@pytest.mark.parametrize("entries", [(0, 0, 3, 0, 5), (1, 0, 2), (0, 1), (), (0, 0, 2, -2), (0, 0, 0, 1)])
def test_validate_rejects(entries):
    with pytest.raises(MalformedWord):
        validate(entries)


@pytest.mark.parametrize("entries, expected", [
    ((0,), INFINITY),
    ((0, 0), Rational(0, 1)),
    ((0, 0, -1), MINUS_ONE),
    ((0, 0, 2, 1, 1, 2), Rational(5, 13)),
    ((0, 0, 0), INFINITY),
    ((0, 0, 1, -1), INFINITY),
    ((0, 0, 3), Rational(1, 3)),
    ((0, 0, 2, -1), Rational(1, 1)),
])
def test_evaluate_examples(entries, expected):
    assert evaluate(CFWord(entries)) == expected


def test_only_three_words_are_infinite():
    infinite = [e for e in [(0,), (0, 0), (0, 0, 0), (0, 0, 1, -1), (0, 0, 1, 0), (0, 0, 2, -1)]
                if evaluate(CFWord(e)).is_infinite]
    assert infinite == [(0,), (0, 0, 0), (0, 0, 1, -1)]


@given(tails)
def test_evaluate_matches_naive(tail):
    assert evaluate(word(*tail)).as_fraction() == naive_value(tail)


@given(tails)
def test_dual_representation(tail):
    merged = tail[:-1] + [tail[-1] + 1]
    assert evaluate(word(*tail, 1)) == evaluate(word(*merged))


@given(tails)
def test_trailing_zero_and_minus_one(tail):
    c = word(*tail)
    assert evaluate(extend(c, 0)) == evaluate(CFWord(c.entries[:-1]))
    dec = CFWord(c.entries[:-1] + (c.entries[-1] - 1,))
    assert evaluate(extend(c, -1)) == evaluate(dec)


@given(tails)
def test_reduce_word_keeps_value(tail):
    for last in (-1, 0, 1):
        c = extend(word(*tail), last)
        assert evaluate(reduce_word(c)) == evaluate(c)


@given(tails)
def test_convergent_determinant(tail):
    pq = Convergents(tail, len(tail))
    for k in range(0, len(tail) + 1):
        assert pq.q(k) * pq.p(k - 1) - pq.p(k) * pq.q(k - 1) == (-1) ** k
        assert math.gcd(pq.p(k), pq.q(k)) == 1
        assert Fraction(pq.p(k), pq.q(k)) == naive_value(tail[:k])


def test_fibonacci_convergents():
    assert convergents(CFStream.fibonacci(), 4) == [(1, 0), (0, 1), (1, 1), (1, 2), (2, 3), (3, 5)]
    q = [qk for _, qk in convergents(CFStream.fibonacci(), 20)][1:]
    assert all(q[i + 2] == q[i + 1] + q[i] for i in range(len(q) - 2))


def test_convergents_2112():
    assert convergents(CFStream.periodic((2, 1, 1, 2)), 4)[-1] == (5, 13)
    assert convergents(CFStream.periodic((3,)), -1) == [(1, 0)]


@pytest.mark.parametrize("c, m, expected", [
    (word(2), 3, (0, 0, 2, 3)),
    (word(2), -1, (0, 0, 2, -1)),
])
def test_extend(c, m, expected):
    assert extend(c, m).entries == expected


def test_extend_rejects_interior_zero():
    with pytest.raises(InvalidExtension):
        extend(CFWord((0, 0, 2, 0)), 1)


def test_cf_of_real_examples():
    assert cf_of_real((math.sqrt(5) - 1) / 2, 6) == (1,) * 6
    assert cf_of_real(Fraction(5, 13), 8) == (2, 1, 1, 2)
    assert cf_of_real(0.5, 4) == (2,)
    assert cf_of_real("5/13", 8) == (2, 1, 1, 2)
    with pytest.raises(NotInUnitInterval):
        cf_of_real(1.5, 3)


@given(tails)
def test_cf_of_real_inverts_evaluate(tail):
    x = evaluate(word(*tail))
    if x.p == x.q:  # value 1 has no expansion inside (0, 1)
        return
    assert naive_value(cf_of_real(x, 50)) == x.as_fraction()


def test_parse_word_and_json():
    c = parse_word("[0,0,2,1]")
    assert c == word(2, 1) and c.to_json() == [0, 0, 2, 1] and str(c) == "[0,0,2,1]"
    with pytest.raises(MalformedWord):
        parse_word("0,0,x")
