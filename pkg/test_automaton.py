#!/usr/bin/env python3
"""
Tests for the automaton model, exact valuation and bounded word search
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent))

from scripts.qfa import DimensionError, UnknownSymbolError, ValidationError
from scripts.qfa.automaton import (
    Relation,
    ThresholdSpec,
    bounded_search,
    ensure_valid,
    final_vector,
    format_word,
    iter_word_values,
    make_qfa,
    parse_word,
    random_words,
    validate,
    value,
    value_polynomial,
    word_matrix,
)
from scripts.qfa.catalog import c4_automaton, free_pair_automaton, rotation_automaton
from scripts.qfa.exactmath import RationalMatrix, mat_mul, norm_sq, row_apply
from scripts.qfa.invariant_algebra import evaluate

IDENTITY_PROJECTION = make_qfa(('a', 'b'), {'a': [[0, 1], [1, 0]], 'b': [[1, 0], [0, -1]]}, ['3/5', '4/5'],
                               [[1, 0], [0, 1]])


def test_rotation_automaton_values():
    star = rotation_automaton()
    assert value(star, ()) == 0
    assert value(star, ('a',)) == Fraction(144, 625)
    assert final_vector(star, 'a').entries == (Fraction(9, 25), Fraction(-12, 25), Fraction(4, 5))


def test_identity_projection_gives_value_one():
    for w in random_words(IDENTITY_PROJECTION.alphabet, 20, 8, seed=1):
        assert value(IDENTITY_PROJECTION, w) == 1


def test_word_matrix():
    a = free_pair_automaton()
    assert word_matrix(a, ()) == RationalMatrix.identity(3)
    assert word_matrix(a, 'ab') == mat_mul(a.transitions['a'], a.transitions['b'])


def test_unknown_symbol():
    with pytest.raises(UnknownSymbolError):
        value(c4_automaton(), 'ab')


@pytest.mark.parametrize('automaton', [rotation_automaton(), c4_automaton(), free_pair_automaton()])
def test_values_are_bounded_and_norm_is_conserved(automaton):
    for w in random_words(automaton.alphabet, 60, 12, seed=9):
        v = value(automaton, w)
        assert 0 <= v <= 1
        assert norm_sq(final_vector(automaton, w)) == 1


def test_value_is_a_homomorphism():
    a = free_pair_automaton()
    for u, v in zip(random_words(a.alphabet, 15, 5, seed=2), random_words(a.alphabet, 15, 5, seed=3)):
        direct = value(a, u + v)
        product = mat_mul(word_matrix(a, u), word_matrix(a, v))
        assert direct == a.measure(row_apply(a.initial, product))


def test_value_polynomial_matches_word_values():
    a = free_pair_automaton()
    f = value_polynomial(a)
    assert f.degree == 2
    for w in random_words(a.alphabet, 10, 4, seed=4):
        assert evaluate(f, word_matrix(a, w)) == value(a, w)


def test_validate_lists_every_violation():
    broken = make_qfa(('a',), {'a': [[1, 1], [0, 1]]}, [1, 1], [[1, 1], [0, 1]])
    violations = validate(broken)
    assert len(violations) == 4
    with pytest.raises(ValidationError) as info:
        ensure_valid(broken)
    assert info.value.violations == violations
    assert validate(c4_automaton()) == []


def test_constructor_checks_shapes_and_alphabet():
    with pytest.raises(DimensionError):
        make_qfa(('a',), {'a': [[1, 0], [0, 1]]}, [1, 0, 0], [[1, 0], [0, 1]])
    with pytest.raises(ValidationError):
        make_qfa(('a',), {'b': [[1]]}, [1], [[1]])
    with pytest.raises(ValidationError):
        make_qfa(('a', 'a'), {'a': [[1]]}, [1], [[1]])


def test_bounded_search_examples():
    star = rotation_automaton()
    assert bounded_search(star, ThresholdSpec(1, Relation.GT), 10) is None
    c4 = c4_automaton()
    assert bounded_search(c4, ThresholdSpec(Fraction(1, 2), Relation.GT), 4, include_empty=False) == (('a', 'a'), 1)
    assert bounded_search(c4, ThresholdSpec(0, Relation.GE), 4, include_empty=True) == ((), 1)
    assert bounded_search(c4, ThresholdSpec(Fraction(1, 2), Relation.LT), 4) == (('a',), 0)


def test_bounded_search_is_monotone_in_budget():
    a = free_pair_automaton()
    spec = ThresholdSpec(Fraction(1, 3), Relation.GT)
    first = bounded_search(a, spec, 4)
    assert first is not None
    for budget in range(len(first[0]), 7):
        assert bounded_search(a, spec, budget) == first


def test_enumeration_order_is_length_lexicographic_and_thread_independent():
    a = free_pair_automaton()
    words = [w for w, _ in iter_word_values(a, 3)]
    assert [format_word(w) for w in words[:7]] == ['ε', 'a', 'b', 'aa', 'ab', 'ba', 'bb']
    assert list(iter_word_values(a, 5, threads=4)) == list(iter_word_values(a, 5, threads=1))


def test_relation_parsing():
    assert Relation.parse('>=') is Relation.GE
    assert Relation.parse('≤') is Relation.LE
    assert Relation.parse('lt') is Relation.LT
    assert Relation.GT.is_strict and not Relation.GE.is_strict
    with pytest.raises(ValueError):
        Relation.parse('==')


def test_word_parsing():
    assert parse_word('') == ()
    assert parse_word('eps') == ()
    assert parse_word('ab') == ('a', 'b')
    assert parse_word('10,11') == ('10', '11')
    assert format_word(('10', '11')) == '10,11'
    assert format_word(()) == 'ε'


def test_random_words_are_reproducible():
    assert random_words(('a', 'b'), 5, 6, seed=0) == random_words(('a', 'b'), 5, 6, seed=0)
