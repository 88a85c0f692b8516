from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cantorlab.symbolic import Word, all_words, floor_boundary, ones_split, remove_last

words = st.lists(st.integers(0, 1), max_size=64).map(lambda b: Word(tuple(b)))
betas = st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(999, 1000)).filter(lambda b: 0 < b < 1)


@pytest.mark.parametrize(
    "text, beta, expected",
    [("", Fraction(1, 2), (0, 0)), ("11", Fraction(1, 2), (1, 1)), ("101", Fraction(1, 2), (1, 1))],
)
def test_ones_split_examples(text, beta, expected):
    assert ones_split(Word.parse(text), beta) == expected


@pytest.mark.parametrize("text, expected", [("0", ""), ("10", "1"), ("110", "11")])
def test_remove_last_examples(text, expected):
    assert remove_last(Word.parse(text)) == Word.parse(expected)


def test_remove_last_empty_raises():
    with pytest.raises(ValueError):
        remove_last(Word())


@pytest.mark.parametrize("n, beta, expected", [(3, Fraction(1, 2), 1), (0, Fraction(1, 2), 0), (7, Fraction(2, 3), 4)])
def test_floor_boundary_examples(n, beta, expected):
    assert floor_boundary(n, beta) == expected


def test_floor_boundary_matches_integer_floor_up_to_a_million():
    for p, q in ((1, 2), (1, 3), (2, 3), (3, 7)):
        beta = Fraction(p, q)
        for n in range(0, 10**6 + 1, 997):
            assert floor_boundary(n, beta) == (p * n - (p * n) % q) // q


def test_floor_boundary_rejects_negative():
    with pytest.raises(ValueError):
        floor_boundary(-1, Fraction(1, 2))


def test_parse_forms():
    assert Word.parse("-") == Word()
    assert Word.parse("1^4") == Word((1, 1, 1, 1))
    assert str(Word.parse("0110")) == "0110"
    with pytest.raises(ValueError):
        Word.parse("012")
    with pytest.raises(ValueError):
        Word.parse("2^3")


def test_periodic_and_prefix():
    w = Word.periodic("10", 5)
    assert str(w) == "10101"
    assert w.prefix(5) is w
    assert str(w.prefix(2)) == "10"
    with pytest.raises(ValueError):
        w.prefix(6)


def test_all_words_lexicographic():
    ws = [str(w) for w in all_words(3)]
    assert ws == sorted(ws) and len(set(ws)) == 8


@given(words, betas)
def test_split_sums_to_total_ones(w, beta):
    n1, n2 = ones_split(w, beta)
    assert n1 + n2 == sum(w.bits)
    assert n1 == sum(w.bits[: floor_boundary(len(w), beta)])


@given(words.filter(lambda w: len(w) > 0), betas)
def test_split_of_parent_differs_by_at_most_two_positions(w, beta):
    n = len(w)
    parent = remove_last(w)
    b_now, b_before = floor_boundary(n, beta), floor_boundary(n - 1, beta)
    n1, n2 = ones_split(w, beta)
    p1, p2 = ones_split(parent, beta)
    last = w[n - 1]
    moved = w[b_now - 1] if b_now > b_before else 0
    # The boundary symbol moves from the tail to the head; the last symbol leaves the tail.
    assert p1 == n1 - moved
    assert p2 == n2 + moved - last


@given(words)
def test_profile_is_a_unit_step_staircase(w):
    c = w.profile.cumulative
    assert c[0] == 0 and len(c) == len(w) + 1
    assert all(b - a in (0, 1) for a, b in zip(c, c[1:]))
