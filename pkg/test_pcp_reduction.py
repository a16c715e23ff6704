#!/usr/bin/env python3
"""
Tests for the PCP gadgets: rotation generators, 5-adic certificate, six-dimensional
automaton and the two-matrix packing
"""

import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent))

from scripts.qfa import QfaError, ReducedWordError, ValidationError
from scripts.qfa.automaton import iter_word_values, random_words, validate, value, word_matrix
from scripts.qfa.catalog import PLANTED_INSTANCES, SOLUTION_FREE_INSTANCES, TWO_MATRIX_INSTANCES, pcp
from scripts.qfa.exactmath import RationalMatrix, RationalVector, mat_mul, norm_sq, row_apply
from scripts.qfa.pcp_reduction import (
    FiveAdicForm,
    build_complement_qfa,
    build_pcp_qfa,
    build_two_matrix_system,
    check_freeness_certificate,
    check_injectivity,
    check_two_matrix_claim,
    encode_word,
    five_adic_form,
    nu_index_word,
    parse_signed_word,
    pcp_solution_predicate,
    reduce_signed_word,
    rotation_generators,
    y_block,
)

DOUBLING = pcp(('a', 'aa'), ('aa', 'a'))


def test_rotation_generators_are_orthogonal():
    x_a, x_b = rotation_generators()
    assert x_a.is_orthogonal() and x_b.is_orthogonal()
    assert x_a == RationalMatrix([[3, -4, 0], [4, 3, 0], [0, 0, 5]]).scale(Fraction(1, 5))


def test_five_adic_form_examples():
    assert five_adic_form([]) == FiveAdicForm(3, 0, 4, 0)
    assert five_adic_form(parse_signed_word('a')) == FiveAdicForm(9, -12, 20, 1)
    assert five_adic_form(parse_signed_word('b')) == FiveAdicForm(15, 16, 12, 1)
    form = five_adic_form(parse_signed_word('aB'))
    assert form.divisibility_holds and form.norm_holds
    x_a, x_b = rotation_generators()
    assert form.vector() == row_apply(RationalVector([3, 0, 4]), mat_mul(x_a, x_b.T))


def test_five_adic_form_rejects_unreduced_words():
    with pytest.raises(ReducedWordError):
        five_adic_form(parse_signed_word('aA'))


def test_signed_word_parsing_and_reduction():
    word = parse_signed_word('abBA')
    assert [str(x) for x in word] == ['a', 'b', 'B', 'A']
    assert reduce_signed_word(word) == []
    assert [str(x) for x in reduce_signed_word(parse_signed_word('aBbb'))] == ['a', 'b']
    with pytest.raises(ValueError):
        parse_signed_word('ac')


def test_freeness_certificate_small():
    report = check_freeness_certificate(3)
    assert report.passed
    assert report.words_checked == 4 + 12 + 36


def test_freeness_certificate_full():
    report = check_freeness_certificate(8)
    assert report.passed
    assert report.words_checked == 13120
    assert report.counts_by_length == {n: 4 * 3 ** (n - 1) for n in range(1, 9)}


def test_injectivity_on_reduced_words():
    report = check_injectivity(5)
    assert report.passed
    assert report.words_checked == 1 + 4 + 12 + 36 + 108 + 324


def test_encode_word():
    x_a, x_b = rotation_generators()
    assert encode_word('') == RationalMatrix.identity(3)
    assert encode_word('ab') == mat_mul(x_a, x_b)
    assert all((25 * e).denominator == 1 for row in encode_word('aa').entries for e in row)


def test_y_blocks():
    assert y_block('', '') == RationalMatrix.identity(6)
    assert y_block('ab', 'ba').is_orthogonal()


def test_y_is_a_homomorphism():
    for idx, (p, _) in enumerate(PLANTED_INSTANCES[:3]):
        a = build_pcp_qfa(p)
        lefts = random_words(p.labels, 20, 3, seed=idx)
        rights = random_words(p.labels, 20, 3, seed=100 + idx)
        for w, nu in zip(lefts, rights):
            assert y_block(*p.concat(w + nu)) == mat_mul(y_block(*p.concat(w)), y_block(*p.concat(nu)))
            assert word_matrix(a, w) == y_block(*p.concat(w))


def test_instance_validation():
    with pytest.raises(ValidationError):
        pcp()
    with pytest.raises(ValidationError):
        pcp(('a', 'c'))
    assert DOUBLING.k == 2 and DOUBLING.labels == ('1', '2')
    assert DOUBLING.concat(('1', '2')) == ('aaa', 'aaa')
    with pytest.raises(QfaError):
        DOUBLING.concat(('3',))


def test_pcp_automaton_on_the_doubling_instance():
    a = build_pcp_qfa(DOUBLING)
    assert validate(a) == []
    assert a.n == 6
    assert value(a, '12') == 0
    assert value(a, '1') != 0
    assert pcp_solution_predicate(DOUBLING, '12').is_solution
    check = pcp_solution_predicate(DOUBLING, '1', a)
    assert not check.is_solution and check.agrees
    assert (check.u_word, check.v_word) == ('a', 'aa')


def test_empty_word_is_not_a_solution():
    with pytest.raises(QfaError):
        pcp_solution_predicate(DOUBLING, '')


@pytest.mark.parametrize('instance', [p for p, _ in PLANTED_INSTANCES] + SOLUTION_FREE_INSTANCES)
def test_zero_value_exactly_on_solutions(instance):
    a = build_pcp_qfa(instance)
    for word, v in iter_word_values(a, 5, include_empty=False):
        u_w, v_w = instance.concat(word)
        assert (v == 0) == (u_w == v_w)


def test_planted_solutions_have_value_zero():
    for p, planted in PLANTED_INSTANCES:
        assert value(build_pcp_qfa(p), planted) == 0


def test_complement_automaton_reaches_one_on_solutions():
    b = build_complement_qfa(DOUBLING)
    assert validate(b) == []
    assert value(b, '12') == 1
    assert value(b, '1') < 1


def test_two_matrix_dimensions():
    seven = pcp(*[('a', 'b')] * 7)
    assert build_two_matrix_system(seven).dimension == 42
    system = build_two_matrix_system(DOUBLING)
    assert system.z0.is_orthogonal() and system.z1.is_orthogonal()
    assert norm_sq(system.x) == 1 and system.q.is_projection()
    assert validate(system.as_qfa()) == []


def test_single_pair_system_shift_is_identity():
    system = build_two_matrix_system(pcp(('a', 'a')))
    assert system.z1 == RationalMatrix.identity(6)


def test_nu_index_word():
    assert nu_index_word(DOUBLING, '0101') == ('1', '2')
    assert nu_index_word(DOUBLING, '1100') == ('1', '1')


@pytest.mark.parametrize('name', sorted(TWO_MATRIX_INSTANCES))
def test_two_matrix_claim_agrees(name):
    p = TWO_MATRIX_INSTANCES[name]
    report = check_two_matrix_claim(p, 4, 20 * p.k)
    assert report.agree
    assert not report.nu_truncated
    if name.endswith('solvable'):
        assert report.w_witness is not None
        assert report.nu_value == 0
        u_w, v_w = p.concat(report.nu_index_word)
        assert u_w == v_w
    else:
        assert report.w_witness is None and report.nu_witness is None


def test_two_matrix_witness_for_doubling_instance():
    report = check_two_matrix_claim(DOUBLING, 4, 40)
    assert report.w_witness == ('1', '2')
    assert report.nu_witness == '0101'
    # the block selector alone already zeroes the measured block
    assert report.literal_nu_witness == '1'
