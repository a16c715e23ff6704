#!/usr/bin/env python3
"""
Tests for the strict-threshold decision driver, verdict re-checking and the
bounded emptiness table
"""

import json
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent))

from scripts.qfa import QfaError
from scripts.qfa.automaton import Relation, ThresholdSpec, bounded_search
from scripts.qfa.catalog import PLANTED_INSTANCES, c4_automaton, pcp, rotation_automaton
from scripts.qfa.decision import (
    Budget,
    BackendResult,
    FormulaBackend,
    FormulaOutcome,
    TrivialBoundsBackend,
    Verdict,
    VerdictKind,
    bounded_emptiness_table,
    decide,
    decide_strict_above,
    decide_strict_below,
    recheck_verdict,
)
from scripts.qfa.formats import dumps, verdict_from_dict, verdict_to_dict
from scripts.qfa.pcp_reduction import build_pcp_qfa

F = Fraction
SMALL = Budget(max_word_len=4, closure_cap=32, max_degree=1)
ROOMY = Budget(max_word_len=8, closure_cap=64, max_degree=2)


class NeverSure(FormulaBackend):
    name = 'never-sure'

    def decide_formula(self, context):
        return BackendResult(FormulaOutcome.UNKNOWN, note='no opinion')


def test_quarter_turn_above_half_has_a_witness():
    verdict = decide_strict_above(c4_automaton(), F(1, 2), ROOMY)
    assert verdict.kind is VerdictKind.WITNESS
    assert verdict.witness == (('a', 'a'), 1)
    assert verdict.certificate['kind'] == 'finite-closure'
    assert recheck_verdict(c4_automaton(), verdict) == []


def test_quarter_turn_above_one_is_empty_by_closure():
    c4 = c4_automaton()
    verdict = decide_strict_above(c4, 1, ROOMY)
    assert verdict.kind is VerdictKind.EMPTY
    assert verdict.kind.exit_code == 1
    cert = verdict.certificate
    assert cert['kind'] == 'finite-closure'
    assert cert['group_order'] == 4
    assert cert['extremum'] == 1
    assert recheck_verdict(c4, verdict) == []


@pytest.mark.parametrize('lam', [F(1, 2), F(1, 1000000)])
def test_quarter_turn_below(lam):
    verdict = decide_strict_below(c4_automaton(), lam, ROOMY)
    assert verdict.kind is VerdictKind.WITNESS
    assert verdict.witness == (('a',), 0)


def test_value_bounds_settle_the_extremes():
    star = rotation_automaton()
    below = decide_strict_below(star, 0, SMALL)
    assert below.kind is VerdictKind.EMPTY
    assert below.certificate == {'kind': 'value-bound', 'bound': 0, 'relation': '<'}
    above = decide_strict_above(star, 1, SMALL)
    assert above.kind is VerdictKind.EMPTY
    assert above.certificate['bound'] == 1
    assert recheck_verdict(star, below) == [] and recheck_verdict(star, above) == []


def test_infinite_closure_ends_unknown():
    star = rotation_automaton()
    verdict = decide_strict_above(star, F(1, 2), SMALL)
    assert verdict.kind is VerdictKind.UNKNOWN
    assert verdict.kind.exit_code == 2
    assert verdict.budget_spent['max_word_len'] == 4
    assert verdict.budget_spent['closure_cap'] == 32
    assert verdict.certificate['kind'] == 'invariant-basis'
    # x31, x32 and x33 - 1 are fixed by a rotation about the third axis
    assert verdict.certificate['dimensions'] == {1: 3}
    assert any('closure exceeded' in d for d in verdict.diagnostics)


def test_monomial_limit_is_reported():
    budget = Budget(max_word_len=2, closure_cap=16, max_degree=3, max_monomials=20)
    verdict = decide_strict_above(rotation_automaton(), F(1, 2), budget)
    assert verdict.kind is VerdictKind.UNKNOWN
    assert verdict.certificate['dimensions'] == {1: 3}
    assert any('monomials' in d for d in verdict.diagnostics)


def test_backends_are_pluggable():
    c4 = c4_automaton()
    assert decide_strict_above(c4, 1, SMALL, backends=(NeverSure(),)).kind is VerdictKind.UNKNOWN
    verdict = decide_strict_above(c4, 1, SMALL, backends=(TrivialBoundsBackend(),))
    assert verdict.certificate['kind'] == 'value-bound'


def test_non_strict_relations_are_refused():
    with pytest.raises(QfaError):
        decide(c4_automaton(), F(1, 2), Relation.GE, ROOMY)
    assert decide(c4_automaton(), F(1, 2), Relation.LT, ROOMY).witness == (('a',), 0)


def test_budget_validation():
    with pytest.raises(ValueError):
        Budget(max_word_len=0, closure_cap=10, max_degree=1)
    budget = Budget.from_config(max_word_len=5, closure_cap=None)
    assert budget.max_word_len == 5
    assert budget.closure_cap == Budget.from_config().closure_cap


@pytest.mark.parametrize('lam', [F(0), F(1, 3), F(1, 2), F(999, 1000), F(1)])
def test_verdicts_agree_with_exhaustive_search(lam):
    c4 = c4_automaton()
    for relation in (Relation.GT, Relation.LT):
        verdict = decide(c4, lam, relation, ROOMY)
        found = bounded_search(c4, ThresholdSpec(lam, relation), 8, include_empty=False)
        assert (verdict.kind is VerdictKind.WITNESS) == (found is not None)
        assert verdict.kind is not VerdictKind.UNKNOWN


def test_recheck_catches_tampering():
    c4 = c4_automaton()
    forged = Verdict(VerdictKind.WITNESS, Relation.GT, F(1, 2), witness=(('a',), 1))
    problems = recheck_verdict(c4, forged)
    assert len(problems) == 2
    empty = decide_strict_above(c4, 1, ROOMY)
    empty.certificate['extremum'] = F(1, 2)
    assert recheck_verdict(c4, empty)
    wrong_bound = Verdict(VerdictKind.EMPTY, Relation.GT, F(1, 2),
                          certificate={'kind': 'value-bound', 'bound': 1, 'relation': '>'})
    assert recheck_verdict(c4, wrong_bound)


def test_verdict_json_round_trip():
    c4 = c4_automaton()
    for verdict in (decide_strict_above(c4, 1, ROOMY), decide_strict_above(c4, F(1, 2), ROOMY)):
        text = dumps(verdict_to_dict(verdict))
        loaded = verdict_from_dict(json.loads(text))
        assert loaded.kind is verdict.kind
        assert loaded.lam == verdict.lam and loaded.witness == verdict.witness
        assert recheck_verdict(c4, loaded) == []
        assert dumps(verdict_to_dict(loaded)) == text


def _rows(df):
    return {row['relation']: row for row in df.to_dict('records')}


def test_emptiness_table_for_quarter_turn():
    rows = _rows(bounded_emptiness_table(c4_automaton(), F(1, 2), 4))
    assert rows['>']['witness'] == 'ε' and rows['>']['value'] == '1'
    assert rows['<']['witness'] == 'a' and rows['<']['value'] == '0'
    assert all(row['status'] == 'NONEMPTY' for row in rows.values())
    assert rows['>']['qfa_emptiness'] == 'decidable'
    assert rows['>=']['qfa_emptiness'] == 'undecidable'
    assert {row['pfa_emptiness'] for row in rows.values()} == {'undecidable'}


def test_emptiness_table_without_the_empty_word():
    rows = _rows(bounded_emptiness_table(c4_automaton(), F(1, 2), 4, include_empty=False))
    assert rows['>']['witness'] == 'aa' and rows['>']['value'] == '1'
    assert rows['>=']['witness'] == 'aa'
    assert rows['<']['witness'] == 'a' and rows['<']['value'] == '0'


def test_emptiness_table_at_the_top_threshold():
    rows = _rows(bounded_emptiness_table(rotation_automaton(), 1, 5))
    assert rows['>']['status'] == 'EMPTY-BY-BOUND'
    assert rows['>=']['status'] == 'NO-WITNESS-UP-TO-BUDGET'
    assert rows['<=']['status'] == 'NONEMPTY' and rows['<=']['witness'] == 'ε'


def test_pcp_automaton_at_threshold_zero():
    doubling = pcp(('a', 'aa'), ('aa', 'a'))
    a = build_pcp_qfa(doubling)
    rows = _rows(bounded_emptiness_table(a, 0, 2))
    assert rows['<']['status'] == 'EMPTY-BY-BOUND'
    # the empty word already has value zero
    assert rows['<=']['witness'] == 'ε'
    rows = _rows(bounded_emptiness_table(a, 0, 2, include_empty=False))
    assert rows['<=']['witness'] == '12' and rows['<=']['value'] == '0'
    assert rows['<']['status'] == 'EMPTY-BY-BOUND'
    assert bounded_search(a, ThresholdSpec(0, Relation.LE), 3, include_empty=False) == (('1', '2'), 0)
    for p, planted in PLANTED_INSTANCES:
        found = bounded_search(build_pcp_qfa(p), ThresholdSpec(0, Relation.LE), len(planted), include_empty=False)
        assert found is not None and found[1] == 0
