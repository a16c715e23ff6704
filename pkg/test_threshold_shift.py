#!/usr/bin/env python3
"""
Tests for four-square decompositions and affine threshold shifting
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent))

from scripts.qfa import ValidationError
from scripts.qfa.automaton import Relation, validate, value
from scripts.qfa.catalog import SHIFT_THRESHOLDS, c4_automaton, rotation_automaton
from scripts.qfa.exactmath import norm_sq
from scripts.qfa.threshold_shift import (
    four_squares,
    language_check,
    preset_parameters,
    shift_affine,
    verify_shift,
)

F = Fraction

DECOMPOSITIONS = [
    (F(0), (0, 0, 0, 0)),
    (F(1, 2), (F(1, 2), F(1, 2), 0, 0)),
    (F(3, 7), (F(4, 7), F(2, 7), F(1, 7), 0)),
    (F(9, 10), (F(9, 10), F(3, 10), 0, 0)),
    (F(1), (1, 0, 0, 0)),
]


@pytest.mark.parametrize('lam,expected', DECOMPOSITIONS)
def test_four_squares_examples(lam, expected):
    result = four_squares(lam)
    assert result.components == tuple(F(x) for x in expected)
    assert sum(x * x for x in result.components) == lam


def test_four_squares_is_largest_first():
    for n in range(1, 60):
        result = four_squares(F(n, 7))
        assert list(result.components) == sorted(result.components, reverse=True)
        assert sum(x * x for x in result.components) == F(n, 7)


def test_four_squares_rejects_negative():
    with pytest.raises(ValueError):
        four_squares(F(-1, 2))


def test_identity_shift_embeds():
    star = rotation_automaton()
    b = shift_affine(star, 1, 0)
    assert b.n == star.n + 8
    assert all(value(b, 'a' * k) == value(star, 'a' * k) for k in range(5))


def test_square_alpha_needs_one_copy():
    b = shift_affine(rotation_automaton(), F(1, 4), F(1, 4))
    assert b.n == 3 + 8


@pytest.mark.parametrize('alpha,beta', [(F(1, 2), F(0)), (F(1, 2), F(1, 4)), (F(3, 7), F(0)),
                                        (F(4, 7), F(3, 7)), (F(1, 10), F(9, 10))])
@pytest.mark.parametrize('make', [rotation_automaton, c4_automaton])
def test_shift_identity_holds_exactly(make, alpha, beta):
    a = make()
    b = shift_affine(a, alpha, beta)
    assert validate(b) == []
    assert norm_sq(b.initial) == 1
    report = verify_shift(a, b, alpha, beta, 6)
    assert report.passed
    assert report.words_checked == 7


def test_wrong_alpha_is_caught():
    star = rotation_automaton()
    b = shift_affine(star, F(1, 2), 0)
    report = verify_shift(star, b, F(1, 3), 0, 5)
    assert not report.passed
    assert report.counterexample == ('a',)
    assert report.actual == F(1, 2) * F(144, 625)


def test_presets():
    assert preset_parameters('paper-lemma1', F(3, 7)) == (F(3, 7), 0)
    assert preset_parameters('paper-corollary', F(3, 7)) == (F(4, 7), F(3, 7))
    with pytest.raises(ValueError):
        preset_parameters('nope', F(1, 2))


@pytest.mark.parametrize('lam', [lam for lam in SHIFT_THRESHOLDS if 0 < lam < 1])
def test_shifted_language_identity(lam):
    star = rotation_automaton()
    alpha, beta = preset_parameters('paper-corollary', lam)
    b = shift_affine(star, alpha, beta)
    assert language_check(star, b, alpha, beta, 0, 6, Relation.LE).passed
    assert language_check(star, b, alpha, beta, F(1, 5), 6, Relation.GT).passed


@pytest.mark.parametrize('alpha,beta', [(F(0), F(0)), (F(1, 2), F(-1, 4)), (F(3, 4), F(1, 2))])
def test_parameter_range(alpha, beta):
    with pytest.raises(ValidationError):
        shift_affine(c4_automaton(), alpha, beta)
