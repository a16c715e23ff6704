#!/usr/bin/env python3
"""
Tests for invariant polynomials, the product closure and zero-set checks
"""

import sys
from fractions import Fraction
from math import comb
from pathlib import Path

import pytest
import sympy

sys.path.append(str(Path(__file__).parent))

from scripts.qfa import DimensionError, QfaError, ValidationError, invariant_algebra
from scripts.qfa.exactmath import RationalMatrix, cayley_orthogonal, mat_mul
from scripts.qfa.invariant_algebra import (
    ClosureStatus,
    PolyQ,
    enumerate_invariants,
    evaluate,
    generator_fingerprint,
    in_span,
    invariant_basis,
    monomial_basis,
    semigroup_closure,
    substitute_left,
    vanishing_report,
    zero_set_check,
)
from scripts.qfa.pcp_reduction import rotation_generators

F = Fraction
R = RationalMatrix([[0, -1], [1, 0]])
I2 = RationalMatrix.identity(2)
X_A, X_B = rotation_generators()


def x(n, r, s):
    return PolyQ.variable(n, r - 1, s - 1)


def one(n):
    return PolyQ.constant(n, 1)


def test_monomial_basis_size_and_order():
    for n, d in [(1, 3), (2, 1), (2, 2), (2, 4), (3, 2)]:
        assert len(monomial_basis(n, d)) == comb(n * n + d, d)
    monos = monomial_basis(2, 1)
    assert monos[0] == (0, 0, 0, 0)
    assert monos[1:] == [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
    with pytest.raises(ValueError):
        monomial_basis(0, 1)


def test_polynomial_text():
    circle = x(2, 1, 1) * x(2, 1, 1) + x(2, 2, 1) * x(2, 2, 1) - one(2)
    assert str(circle) == 'x11^2 + x21^2 - 1'
    assert str(PolyQ.zero(2)) == '0'
    assert str(x(2, 1, 2).scale(F(-1, 2))) == '-1/2*x12'


def test_products_match_sympy():
    x11, x12, x21, x22 = sympy.symbols('x11 x12 x21 x22')
    circle = x(2, 1, 1) * x(2, 1, 1) + x(2, 2, 1) * x(2, 2, 1) - one(2)
    det = x(2, 1, 1) * x(2, 2, 2) - x(2, 1, 2) * x(2, 2, 1) - one(2)
    product = (circle * det).scale(F(3, 4)) - x(2, 1, 2)
    expected = sympy.Poly(sympy.Rational(3, 4) * (x11 ** 2 + x21 ** 2 - 1) * (x11 * x22 - x12 * x21 - 1) - x12,
                          x11, x12, x21, x22, domain='QQ')
    assert product.terms == {m: F(int(c.p), int(c.q)) for m, c in expected.terms()}
    assert product.degree == 4
    assert product.ring_element.ring.ngens == 4


def test_evaluate_matches_sympy():
    x11, x12, x21, x22 = sympy.symbols('x11 x12 x21 x22')
    det = x(2, 1, 1) * x(2, 2, 2) - x(2, 1, 2) * x(2, 2, 1) - one(2)
    expr = x11 * x22 - x12 * x21 - 1
    m = RationalMatrix([['1/2', 3], ['-2/7', 5]])
    expected = expr.subs({x11: sympy.Rational(1, 2), x12: 3, x21: sympy.Rational(-2, 7), x22: 5})
    assert evaluate(det, m) == F(int(expected.p), int(expected.q))
    with pytest.raises(DimensionError):
        evaluate(det, RationalMatrix.identity(3))


def test_substitute_left():
    # (R X)_11 = -x21
    assert substitute_left(x(2, 1, 1), R) == -x(2, 2, 1)
    f = x(3, 1, 2) * x(3, 3, 3) + x(3, 2, 1).scale(F(2, 3)) - one(3)
    sample = RationalMatrix([[1, '1/2', 0], [-2, 3, '5/7'], ['1/3', 0, 4]])
    g = mat_mul(X_A, X_B)
    assert evaluate(substitute_left(f, g), sample) == evaluate(f, mat_mul(g, sample))


def test_trivial_group_degree_one():
    basis = invariant_basis([I2], 1)
    assert basis.polys == [x(2, 1, 1) - one(2), x(2, 1, 2), x(2, 2, 1), x(2, 2, 2) - one(2)]


def test_quarter_turn_has_no_linear_invariants():
    assert invariant_basis([R], 1).dimension == 0


def test_quarter_turn_degree_two():
    basis = invariant_basis([R], 2)
    assert basis.dimension == 4
    circle = x(2, 1, 1) * x(2, 1, 1) + x(2, 2, 1) * x(2, 2, 1) - one(2)
    det = x(2, 1, 1) * x(2, 2, 2) - x(2, 1, 2) * x(2, 2, 1) - one(2)
    assert in_span(basis, circle)
    assert in_span(basis, det)
    assert not in_span(basis, x(2, 1, 1))
    assert in_span(basis, PolyQ.zero(2))


def test_basis_polynomials_are_invariant():
    basis = invariant_basis([X_A, X_B], 2)
    for f in basis.polys:
        assert evaluate(f, RationalMatrix.identity(3)) == 0
        assert substitute_left(f, X_A) == f
        assert substitute_left(f, X_B) == f


def test_free_pair_degree_two_is_spanned_by_column_products():
    basis = invariant_basis([X_A, X_B], 2)
    assert basis.dimension == 6
    column_norm = sum((x(3, r, 1) * x(3, r, 1) for r in range(1, 4)), PolyQ.zero(3)) - one(3)
    assert in_span(basis, column_norm)


def test_vanishing_on_generated_words():
    basis = invariant_basis([X_A, X_B], 2)
    report = vanishing_report(basis, [X_A, X_B], 5, labels=['a', 'b'])
    assert report.passed
    assert report.words_checked == 63
    assert report.polys_checked == 6


def test_vanishing_report_finds_a_counterexample():
    basis = invariant_basis([R], 2)
    flip = RationalMatrix([[1, 0], [0, -1]])
    report = vanishing_report(basis, [flip], 3)
    assert not report.passed
    assert report.counterexample['word'] == ['0']


def test_enumerate_invariants_grows_by_degree():
    bases = list(enumerate_invariants([R], 3))
    assert [b.d for b in bases] == [1, 2, 3]
    dims = [b.dimension for b in bases]
    assert dims[:2] == [0, 4]
    assert all(lower <= higher for lower, higher in zip(dims, dims[1:]))


def test_quarter_turn_closure():
    result = semigroup_closure([R], 100, labels=['a'])
    assert result.status is ClosureStatus.FINITE
    assert result.order == 4
    assert result.words == [(), ('a',), ('a', 'a'), ('a', 'a', 'a')]
    assert result.identity_word == ('a', 'a', 'a', 'a')
    keys = {m.key() for m in result.elements}
    for m in result.elements:
        assert m.T.key() in keys
        for other in result.elements:
            assert mat_mul(m, other).key() in keys


def test_finite_closure_reaches_identity_by_a_product(monkeypatch):
    assert semigroup_closure([I2], 10).identity_word == ('0',)
    assert semigroup_closure([R, R.T], 10).identity_word == ('0', '1')
    # a product that never returns to the identity is rejected
    monkeypatch.setattr(invariant_algebra, 'mat_mul', lambda a, b: R)
    with pytest.raises(QfaError):
        semigroup_closure([R], 10)


def test_free_pair_closure_exceeds_budget():
    result = semigroup_closure([X_A, X_B], 10 ** 4)
    assert result.status is ClosureStatus.BUDGET_EXCEEDED
    assert result.order is None
    assert result.explored > 10 ** 4


def test_zero_set_at_degree_four_is_the_group():
    basis = invariant_basis([R], 4)
    group = semigroup_closure([R], 100).elements
    assert all(zero_set_check(basis, group))
    samples = [cayley_orthogonal(RationalMatrix([[0, F(k, 23)], [-F(k, 23), 0]])) for k in range(1, 21)]
    samples.append(RationalMatrix([[1, 0], [0, -1]]))
    assert all(s.is_orthogonal() for s in samples)
    assert not any(zero_set_check(basis, samples))


def test_degree_two_zero_set_is_larger_than_the_group():
    basis = invariant_basis([R], 2)
    rotation = cayley_orthogonal(RationalMatrix([[0, F(1, 2)], [F(-1, 2), 0]]))
    assert basis.vanishes_at(rotation)


def test_generator_checks_and_fingerprint():
    with pytest.raises(ValidationError):
        invariant_basis([], 1)
    with pytest.raises(ValidationError):
        invariant_basis([RationalMatrix([[1, 1], [0, 1]])], 1)
    with pytest.raises(DimensionError):
        invariant_basis([I2, X_A], 1)
    assert generator_fingerprint([X_A, X_B]) == generator_fingerprint([X_A, X_B])
    assert generator_fingerprint([X_A, X_B]) != generator_fingerprint([X_B, X_A])
