import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from cantor_frame.words import (EMPTY, BranchWeights, Relation, Word, descendant_square_sum,
                                descendants, enumerate_words, intersection_mass, mass, relation)

P_GRID = [0.2, 0.35, 0.5, 0.65, 0.8]
word_text = st.text(alphabet="02", max_size=12)


def mass_by_digits(text, p):
    out = 1
    for ch in text:
        out *= p if ch == "0" else 1 - p
    return out


def test_parse_roundtrip_and_counts():
    w = Word.parse("0220")
    assert str(w) == "0220"
    assert (w.n0, w.n2, w.length) == (2, 2, 4)
    assert Word.parse("0") != Word.parse("00")
    assert str(EMPTY) == "-" and Word.parse("-") == EMPTY == Word.parse("")
    with pytest.raises(ValueError):
        Word.parse("01")


@given(word_text)
def test_symbols_match_text(text):
    w = Word.parse(text)
    assert "".join(str(s) for s in w.symbols) == text
    assert w.n0 + w.n2 == w.length == len(text)
    assert Word.from_symbols(w.symbols) == w


def test_child_and_prepend():
    w = Word.parse("02")
    assert str(w.child(0)) == "020" and str(w.child(2)) == "022"
    assert str(w.prepend(0)) == "002" and str(w.prepend(2)) == "202"
    assert str(w.prefix(1)) == "0"


def test_branch_weights():
    bw = BranchWeights(Fraction(1, 3))
    assert bw.one_minus_p == Fraction(2, 3)
    assert bw.alpha == Fraction(2, 3)
    assert bw.q == Fraction(5, 9)
    assert 1 - bw.q == 2 * bw.p * bw.one_minus_p
    with pytest.raises(ValueError):
        BranchWeights(1.0)


def test_mass_examples():
    assert mass(EMPTY, 0.3) == 1
    assert mass(Word.parse("020"), 0.5) == 0.125
    assert mass(Word.parse("02"), Fraction(1, 3)) == Fraction(2, 9)


@given(word_text, st.sampled_from(P_GRID))
def test_mass_matches_digit_product(text, p):
    assert mass(Word.parse(text), p) == pytest.approx(mass_by_digits(text, p), rel=1e-14)


@given(word_text, st.sampled_from(P_GRID))
def test_child_split(text, p):
    w = Word.parse(text)
    assert mass(w.child(0), p) + mass(w.child(2), p) == pytest.approx(mass(w, p), abs=1e-15)


@pytest.mark.parametrize("p", P_GRID)
def test_level_partition(p):
    for n in range(13):
        total = sum(mass_by_digits("".join(t), p) for t in itertools.product("02", repeat=n)) if n <= 8 \
            else sum(mass(w, p) for w in enumerate_words(n) if w.length == n)
        assert total == pytest.approx(1.0, abs=1e-12)


def test_level_partition_exact():
    p = Fraction(2, 5)
    for n in range(9):
        assert sum(mass(w, p) for w in enumerate_words(n) if w.length == n) == 1


@pytest.mark.parametrize("u,v,rel", [
    ("0", "02", Relation.PREFIX_OF),
    ("02", "0", Relation.EXTENSION_OF),
    ("0", "2", Relation.INCOMPARABLE),
    ("02", "02", Relation.EQUAL),
    ("-", "2", Relation.PREFIX_OF),
    ("02", "20", Relation.INCOMPARABLE),
])
def test_relation_examples(u, v, rel):
    assert relation(Word.parse(u), Word.parse(v)) is rel


def prefix_oracle(u, v):
    if u == v:
        return Relation.EQUAL
    if v.startswith(u):
        return Relation.PREFIX_OF
    if u.startswith(v):
        return Relation.EXTENSION_OF
    return Relation.INCOMPARABLE


@given(word_text, word_text)
def test_relation_matches_string_prefix_test(u, v):
    got = relation(Word.parse(u), Word.parse(v))
    assert got is prefix_oracle(u, v)
    back = relation(Word.parse(v), Word.parse(u))
    flip = {Relation.PREFIX_OF: Relation.EXTENSION_OF, Relation.EXTENSION_OF: Relation.PREFIX_OF}
    assert back is flip.get(got, got)


def test_intersection_mass_nested():
    p = Fraction(1, 3)
    assert intersection_mass(Word.parse("0"), Word.parse("02"), p) == p * (1 - p)
    assert intersection_mass(Word.parse("0"), Word.parse("2"), p) == 0


def test_enumerate_words():
    assert enumerate_words(0) == [EMPTY]
    assert [str(w) for w in enumerate_words(1)] == ["-", "0", "2"]
    words = enumerate_words(3)
    assert len(words) == 15
    texts = ["".join(t) for n in range(4) for t in itertools.product("02", repeat=n)]
    assert [str(w) if w.length else "" for w in words] == texts


def test_descendant_square_sum_examples():
    assert descendant_square_sum(EMPTY, 0, 0.3) == 1
    assert descendant_square_sum(EMPTY, 1, 0.5) == 0.5
    assert descendant_square_sum(Word.parse("0"), 2, Fraction(1, 3)) == Fraction(25, 729)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.7])
def test_descendant_square_sum_brute_force(p):
    for z in enumerate_words(4):
        for n in range(9):
            brute = sum(mass(u, p) ** 2 for u in descendants(z, n))
            assert descendant_square_sum(z, n, p) == pytest.approx(brute, abs=1e-12)
