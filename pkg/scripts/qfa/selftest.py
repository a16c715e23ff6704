"""
Acceptance checks run by the `selftest` command.

Every check returns a JSON-ready dictionary; nothing time-dependent is
recorded so that repeated runs produce identical documents.
"""

import logging
from fractions import Fraction
from typing import Any, Callable, Dict, List, Tuple

from tqdm import tqdm

from . import catalog
from .automaton import (
    Relation,
    ThresholdSpec,
    bounded_search,
    final_vector,
    format_word,
    iter_word_values,
    random_words,
    validate,
    value,
)
from .decision import (
    Budget,
    VerdictKind,
    decide_strict_above,
    decide_strict_below,
    recheck_verdict,
)
from .exactmath import RationalMatrix, format_rational, mat_mul, norm_sq
from .invariant_algebra import (
    PolyQ,
    in_span,
    invariant_basis,
    semigroup_closure,
    vanishing_report,
)
from .pcp_reduction import (
    build_pcp_qfa,
    build_two_matrix_system,
    check_freeness_certificate,
    check_two_matrix_claim,
    pcp_solution_predicate,
    rotation_generators,
    y_block,
)
from .threshold_shift import four_squares, shift_affine, verify_shift

logger = logging.getLogger(__name__)

Check = Callable[[], Dict[str, Any]]


def check_model_exactness() -> Dict[str, Any]:
    star = catalog.rotation_automaton()
    ok = value(star, ()) == 0 and value(star, ('a',)) == Fraction(144, 625)
    bad = []
    automata = [('rotation', star), ('c4', catalog.c4_automaton()), ('free-pair', catalog.free_pair_automaton()),
                ('pcp', build_pcp_qfa(catalog.PLANTED_INSTANCES[0][0]))]
    for name, a in automata:
        for w in random_words(a.alphabet, 200 // len(automata), 12, seed=7):
            v = value(a, w)
            if not (0 <= v <= 1 and norm_sq(final_vector(a, w)) == 1):
                bad.append(f"{name}:{format_word(w)}")
    return {'passed': ok and not bad, 'star_value_a': format_rational(value(star, ('a',))), 'failures': bad}


def check_gadget_integrity() -> Dict[str, Any]:
    x_a, x_b = rotation_generators()
    failures = []
    if not (x_a.is_orthogonal() and x_b.is_orthogonal()):
        failures.append('rotation generators')
    instances = [p for p, _ in catalog.PLANTED_INSTANCES[:3]]
    pairs_checked = 0
    for idx, p in enumerate(instances):
        a = build_pcp_qfa(p)
        if validate(a):
            failures.append(f"instance {idx}: Y blocks")
        system = build_two_matrix_system(p)
        if not (system.z0.is_orthogonal() and system.z1.is_orthogonal()):
            failures.append(f"instance {idx}: Z0/Z1")
        lefts = random_words(p.labels, 100, 4, seed=11 + idx)
        rights = random_words(p.labels, 100, 4, seed=101 + idx)
        for w, nu in zip(lefts, rights):
            pairs_checked += 1
            whole = y_block(*p.concat(w + nu))
            if whole != mat_mul(y_block(*p.concat(w)), y_block(*p.concat(nu))):
                failures.append(f"instance {idx}: Y_{format_word(w)}{format_word(nu, '')}")
    return {'passed': not failures, 'homomorphism_pairs': pairs_checked, 'failures': failures}


def check_freeness() -> Dict[str, Any]:
    report = check_freeness_certificate(8)
    return {'passed': report.passed and report.words_checked == 13120,
            'words_checked': report.words_checked, 'first_failure': report.first_failure}


def check_pcp_reduction() -> Dict[str, Any]:
    failures = []
    words_checked = 0
    for p, planted in catalog.PLANTED_INSTANCES:
        a = build_pcp_qfa(p)
        if not pcp_solution_predicate(p, tuple(planted), a).is_solution or value(a, tuple(planted)) != 0:
            failures.append(f"planted {planted} on {p.pairs}")
    instances = [p for p, _ in catalog.PLANTED_INSTANCES] + catalog.SOLUTION_FREE_INSTANCES
    for p in instances:
        a = build_pcp_qfa(p)
        for word, v in iter_word_values(a, 6, include_empty=False):
            words_checked += 1
            u_w, v_w = p.concat(word)
            if (u_w == v_w) != (v == 0):
                failures.append(f"{p.pairs} at {format_word(word)}")
    for p in catalog.SOLUTION_FREE_INSTANCES:
        found = bounded_search(build_pcp_qfa(p), ThresholdSpec(0, Relation.LE), 6, include_empty=False)
        if found is not None:
            failures.append(f"unexpected solution {format_word(found[0])} for {p.pairs}")
    return {'passed': not failures, 'instances': len(instances), 'words_checked': words_checked,
            'failures': failures}


def check_two_matrix() -> Dict[str, Any]:
    rows = []
    for name, p in catalog.TWO_MATRIX_INSTANCES.items():
        report = check_two_matrix_claim(p, 4, 4 * p.k * 5)
        rows.append({
            'instance': name,
            'w_witness': format_word(report.w_witness) if report.w_witness else None,
            'nu_witness': report.nu_witness,
            'nu_value': format_rational(report.nu_value) if report.nu_value is not None else None,
            'agree': report.agree,
        })
    return {'passed': all(r['agree'] for r in rows), 'instances': rows}


def check_threshold_shift() -> Dict[str, Any]:
    failures = []
    for lam in catalog.SHIFT_THRESHOLDS:
        fs = four_squares(lam)
        if sum(x * x for x in fs.components) != lam:
            failures.append(f"four_squares({format_rational(lam)})")
    params: List[Tuple[Fraction, Fraction]] = [(Fraction(1, 2), Fraction(1, 4))]
    for lam in catalog.SHIFT_THRESHOLDS:
        params.extend([(lam, Fraction(0)), (1 - lam, lam)])
    shifts = 0
    for name, a in (('rotation', catalog.rotation_automaton()), ('c4', catalog.c4_automaton())):
        for alpha, beta in params:
            if alpha <= 0:
                continue
            b = shift_affine(a, alpha, beta)
            report = verify_shift(a, b, alpha, beta, 6)
            shifts += 1
            if not report.passed or validate(b):
                failures.append(f"{name} alpha={format_rational(alpha)} beta={format_rational(beta)}")
    return {'passed': not failures, 'shifts_verified': shifts, 'failures': failures}


def check_invariants() -> Dict[str, Any]:
    failures = []
    ident = invariant_basis([RationalMatrix.identity(2)], 1)
    expected = [PolyQ.variable(2, 0, 0) - PolyQ.constant(2, 1), PolyQ.variable(2, 0, 1),
                PolyQ.variable(2, 1, 0), PolyQ.variable(2, 1, 1) - PolyQ.constant(2, 1)]
    if ident.polys != expected:
        failures.append('V_1 of the identity group')
    rot = catalog.c4_automaton().transitions['a']
    if invariant_basis([rot], 1).dimension != 0:
        failures.append('V_1 of C4 is not zero')
    circle = PolyQ.variable(2, 0, 0) * PolyQ.variable(2, 0, 0) + PolyQ.variable(2, 1, 0) * PolyQ.variable(2, 1, 0) \
        - PolyQ.constant(2, 1)
    if not in_span(invariant_basis([rot], 2), circle):
        failures.append('x11^2 + x21^2 - 1 missing from V_2 of C4')
    gens = list(rotation_generators())
    report = vanishing_report(invariant_basis(gens, 2), gens, 5, labels=['a', 'b'])
    if not report.passed:
        failures.append('vanishing on the free pair')
    return {'passed': not failures, 'free_pair_words_checked': report.words_checked, 'failures': failures}


def check_closure() -> Dict[str, Any]:
    rot = catalog.c4_automaton().transitions['a']
    c4 = semigroup_closure([rot], 100)
    keys = {m.key() for m in c4.elements}
    axioms = (c4.is_finite and c4.order == 4 and RationalMatrix.identity(2).key() in keys
              and all(mat_mul(g, h).key() in keys for g in c4.elements for h in c4.elements)
              and all(g.transpose().key() in keys for g in c4.elements))
    free = semigroup_closure(list(rotation_generators()), 10 ** 4)
    return {'passed': bool(axioms) and not free.is_finite, 'c4_order': c4.order, 'free_pair': free.status.value}


def check_decision() -> Dict[str, Any]:
    budget = Budget(max_word_len=10, closure_cap=256, max_degree=2)
    c4 = catalog.c4_automaton()
    star = catalog.rotation_automaton()
    failures = []
    v = decide_strict_above(c4, Fraction(1, 2), budget)
    if v.kind is not VerdictKind.WITNESS or v.witness != (('a', 'a'), Fraction(1)):
        failures.append('C4 > 1/2')
    v = decide_strict_above(c4, 1, budget)
    if v.kind is not VerdictKind.EMPTY or recheck_verdict(c4, v) or v.certificate['kind'] != 'finite-closure':
        failures.append('C4 > 1')
    v = decide_strict_below(c4, Fraction(1, 2), budget)
    if v.kind is not VerdictKind.WITNESS or v.witness[1] != 0:
        failures.append('C4 < 1/2')
    for name, a in (('c4', c4), ('rotation', star)):
        if decide_strict_below(a, 0, budget).kind is not VerdictKind.EMPTY:
            failures.append(f"{name} < 0")

    cross = 0
    for a in (c4, star, catalog.free_pair_automaton()):
        for lam in (Fraction(0), Fraction(1, 5), Fraction(1, 2), Fraction(1)):
            for relation, decider in ((Relation.GT, decide_strict_above), (Relation.LT, decide_strict_below)):
                verdict = decider(a, lam, Budget(max_word_len=6, closure_cap=64, max_degree=1))
                found = bounded_search(a, ThresholdSpec(lam, relation), 10, include_empty=False)
                cross += 1
                if verdict.kind is VerdictKind.EMPTY and found is not None:
                    failures.append(f"{a} {relation.value} {format_rational(lam)}: EMPTY contradicted")
                if recheck_verdict(a, verdict):
                    failures.append(f"{a} {relation.value} {format_rational(lam)}: recheck")
    return {'passed': not failures, 'cross_checks': cross, 'failures': failures}


CHECKS: List[Tuple[str, Check]] = [
    ('model-exactness', check_model_exactness),
    ('gadget-integrity', check_gadget_integrity),
    ('freeness-certificate', check_freeness),
    ('pcp-reduction', check_pcp_reduction),
    ('two-matrix', check_two_matrix),
    ('threshold-shift', check_threshold_shift),
    ('invariants', check_invariants),
    ('closure', check_closure),
    ('decision', check_decision),
]


def run_selftest(progress: bool = False) -> Dict[str, Any]:
    """Run every acceptance check; a check that raises is recorded as failed"""
    results = []
    for name, check in tqdm(CHECKS, desc="Selftest", disable=not progress):
        logger.info(f"Running check {name}")
        try:
            outcome = check()
        except Exception as e:
            logger.error(f"Check {name} raised: {e}")
            outcome = {'passed': False, 'error': f"{type(e).__name__}: {e}"}
        results.append({'name': name, **outcome})
    return {'checks': results, 'passed': all(r['passed'] for r in results)}
