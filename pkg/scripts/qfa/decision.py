import abc
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import comb
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from .automaton import (
    Qfa,
    Relation,
    ThresholdSpec,
    Word,
    bounded_search,
    ensure_valid,
    format_word,
    value,
    value_polynomial,
    word_matrix,
)
from .config import DEFAULTS
from .errors import QfaError
from .exactmath import RationalLike, format_rational, mat_mul, row_apply, to_rational
from .invariant_algebra import InvariantBasis, PolyQ, invariant_basis, semigroup_closure

logger = logging.getLogger(__name__)


class VerdictKind(Enum):
    WITNESS = 'WITNESS'
    EMPTY = 'EMPTY'
    UNKNOWN = 'UNKNOWN'

    @property
    def exit_code(self) -> int:
        return {'WITNESS': 0, 'EMPTY': 1, 'UNKNOWN': 2}[self.value]


@dataclass
class Verdict:
    kind: VerdictKind
    relation: Relation
    lam: Fraction
    witness: Optional[Tuple[Word, Fraction]] = None
    certificate: Optional[Dict[str, Any]] = None
    budget_spent: Dict[str, int] = field(default_factory=dict)
    diagnostics: List[str] = field(default_factory=list)


@dataclass
class Budget:
    max_word_len: int
    closure_cap: int
    max_degree: int
    round_schedule: int = 1
    max_monomials: int = 300

    def __post_init__(self):
        for name in ('max_word_len', 'closure_cap', 'max_degree', 'round_schedule', 'max_monomials'):
            if getattr(self, name) < 1:
                raise ValueError(f"Budget field {name} must be positive, got {getattr(self, name)}")

    @classmethod
    def from_config(cls, **overrides) -> 'Budget':
        values = dict(DEFAULTS['budget'])
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class FormulaOutcome(Enum):
    """Outcome of 'every X in the closure satisfies the threshold bound'"""
    HOLDS = 'holds'
    FAILS = 'fails'
    UNKNOWN = 'unknown'


@dataclass
class FormulaContext:
    qfa: Qfa
    relation: Relation
    lam: Fraction
    f: PolyQ
    basis: Optional[InvariantBasis]
    closure_cap: int
    progress: bool = False


@dataclass
class BackendResult:
    outcome: FormulaOutcome
    witness: Optional[Tuple[Word, Fraction]] = None
    certificate: Optional[Dict[str, Any]] = None
    note: str = ''


class FormulaBackend(abc.ABC):
    """Decides whether f(X) <= lam (for >) or f(X) >= lam (for <) on the whole closure

    A backend answering HOLDS proves the strict language empty; FAILS must
    come with a witness word.
    """

    name = 'abstract'

    @abc.abstractmethod
    def decide_formula(self, context: FormulaContext) -> BackendResult:
        pass


class TrivialBoundsBackend(FormulaBackend):
    """Uses only 0 <= Val <= 1"""

    name = 'trivial-bounds'

    def decide_formula(self, context: FormulaContext) -> BackendResult:
        lam = context.lam
        if context.relation is Relation.GT and lam >= 1:
            return BackendResult(FormulaOutcome.HOLDS, certificate={
                'kind': 'value-bound', 'bound': Fraction(1), 'relation': context.relation.value})
        if context.relation is Relation.LT and lam <= 0:
            return BackendResult(FormulaOutcome.HOLDS, certificate={
                'kind': 'value-bound', 'bound': Fraction(0), 'relation': context.relation.value})
        return BackendResult(FormulaOutcome.UNKNOWN, note='threshold inside the value range')


class FiniteClosureBackend(FormulaBackend):
    """Exact extremum of f over the closure when it is a finite group"""

    name = 'finite-closure'

    def decide_formula(self, context: FormulaContext) -> BackendResult:
        a = context.qfa
        generators = [a.transitions[s] for s in a.alphabet]
        closure = semigroup_closure(generators, context.closure_cap, labels=a.alphabet,
                                    progress=context.progress)
        if not closure.is_finite:
            return BackendResult(FormulaOutcome.UNKNOWN,
                                 note=f'closure exceeded {context.closure_cap} elements')

        words = list(closure.words)
        # in a finite group the identity is also a non-empty product
        words[0] = closure.identity_word or ()
        values = [a.measure(row_apply(a.initial, g)) for g in closure.elements]
        above = context.relation is Relation.GT
        extremum = max(values) if above else min(values)
        best = min((i for i, v in enumerate(values) if v == extremum), key=lambda i: (len(words[i]), i))
        certificate = {
            'kind': 'finite-closure',
            'relation': context.relation.value,
            'group_order': closure.order,
            'extremum': extremum,
            'extremal_word': words[best],
            'words': words,
        }
        if context.relation.holds(extremum, context.lam):
            return BackendResult(FormulaOutcome.FAILS, witness=(words[best], extremum), certificate=certificate)
        return BackendResult(FormulaOutcome.HOLDS, certificate=certificate)


DEFAULT_BACKENDS: Tuple[FormulaBackend, ...] = (FiniteClosureBackend(), TrivialBoundsBackend())


def _monomial_count(n: int, d: int) -> int:
    return comb(n * n + d, d)


def _drive(a: Qfa, lam: Fraction, relation: Relation, b: Budget,
           backends: Sequence[FormulaBackend], threads: int, progress: bool) -> Verdict:
    ensure_valid(a)
    f = value_polynomial(a)
    generators = [a.transitions[s] for s in a.alphabet]
    spec = ThresholdSpec(lam, relation)
    spent = {'rounds': 0, 'max_word_len': 0, 'closure_cap': 0, 'max_degree': 0}
    dimensions: Dict[int, int] = {}
    basis: Optional[InvariantBasis] = None
    degree_blocked = False
    diagnostics: List[str] = []

    def verdict(kind: VerdictKind, witness=None, certificate=None) -> Verdict:
        logger.info(f"Verdict {kind.value} after {spent['rounds']} rounds")
        return Verdict(kind, relation, lam, witness, certificate, dict(spent), diagnostics)

    r = 0
    while True:
        word_len = min(b.max_word_len, b.round_schedule * 2 ** r)
        cap = min(b.closure_cap, 16 * 2 ** r)
        degree = min(b.max_degree, r + 1)
        if r > 0 and word_len == spent['max_word_len'] and cap == spent['closure_cap'] \
                and (degree == spent['max_degree'] or degree_blocked):
            break
        spent['rounds'] = r + 1
        logger.info(f"Round {r + 1}: words up to {word_len}, closure cap {cap}, degree {degree}")

        # (i) enumerate words
        if word_len > spent['max_word_len']:
            found = bounded_search(a, spec, word_len, include_empty=False, threads=threads, progress=progress)
            spent['max_word_len'] = word_len
            if found is not None:
                return verdict(VerdictKind.WITNESS, witness=found)

        # (ii) formula backends
        if cap > spent['closure_cap']:
            spent['closure_cap'] = cap
            context = FormulaContext(a, relation, lam, f, basis, cap, progress)
            for backend in backends:
                result = backend.decide_formula(context)
                logger.debug(f"Backend {backend.name}: {result.outcome.value} {result.note}")
                if result.outcome is FormulaOutcome.HOLDS:
                    return verdict(VerdictKind.EMPTY, certificate=result.certificate)
                if result.outcome is FormulaOutcome.FAILS:
                    return verdict(VerdictKind.WITNESS, witness=result.witness, certificate=result.certificate)
                note = f"{backend.name}: {result.note}"
                if result.note and note not in diagnostics:
                    diagnostics.append(note)

        # (iii) grow the invariant basis
        if not degree_blocked and degree > spent['max_degree']:
            if _monomial_count(a.n, degree) > b.max_monomials:
                degree_blocked = True
                message = (f"degree {degree} needs {_monomial_count(a.n, degree)} monomials, "
                           f"above the limit {b.max_monomials}")
                logger.warning(f"Skipping invariant basis: {message}")
                diagnostics.append(message)
            else:
                basis = invariant_basis(generators, degree, progress=progress)
                dimensions[degree] = basis.dimension
                spent['max_degree'] = degree
        r += 1

    certificate = None
    if basis is not None:
        certificate = {
            'kind': 'invariant-basis',
            'generator_fingerprint': basis.generator_fingerprint,
            'dimensions': dimensions,
        }
    logger.warning(f"Budgets exhausted without a verdict for {relation.value} {format_rational(lam)}")
    return verdict(VerdictKind.UNKNOWN, certificate=certificate)


def decide_strict_above(a: Qfa, lam: RationalLike, b: Budget,
                        backends: Sequence[FormulaBackend] = DEFAULT_BACKENDS,
                        threads: int = 1, progress: bool = False) -> Verdict:
    """Is there a word w with Val_A(w) > lam?"""
    return _drive(a, to_rational(lam), Relation.GT, b, backends, threads, progress)


def decide_strict_below(a: Qfa, lam: RationalLike, b: Budget,
                        backends: Sequence[FormulaBackend] = DEFAULT_BACKENDS,
                        threads: int = 1, progress: bool = False) -> Verdict:
    """Is there a word w with Val_A(w) < lam?"""
    return _drive(a, to_rational(lam), Relation.LT, b, backends, threads, progress)


def decide(a: Qfa, lam: RationalLike, relation: Relation, b: Budget, **kwargs) -> Verdict:
    if relation is Relation.GT:
        return decide_strict_above(a, lam, b, **kwargs)
    if relation is Relation.LT:
        return decide_strict_below(a, lam, b, **kwargs)
    raise QfaError(f"Emptiness for {relation.value} is undecidable; only > and < are supported")


def recheck_verdict(a: Qfa, verdict: Verdict) -> List[str]:
    """Replay a verdict's evidence exactly; returns the list of problems found"""
    problems = []
    lam, relation = verdict.lam, verdict.relation
    if verdict.kind is VerdictKind.WITNESS:
        if verdict.witness is None:
            return ['WITNESS verdict without a witness word']
        word, stored = verdict.witness
        actual = value(a, word)
        if actual != stored:
            problems.append(f"witness {format_word(word)} has value {format_rational(actual)}, "
                            f"stored {format_rational(stored)}")
        if not relation.holds(actual, lam):
            problems.append(f"witness value {format_rational(actual)} does not satisfy "
                            f"{relation.value} {format_rational(lam)}")
        return problems

    if verdict.kind is VerdictKind.UNKNOWN:
        return problems

    cert = verdict.certificate or {}
    if cert.get('kind') == 'value-bound':
        if relation is Relation.GT and lam < 1 or relation is Relation.LT and lam > 0:
            problems.append(f"value bound does not cover {relation.value} {format_rational(lam)}")
        return problems
    if cert.get('kind') != 'finite-closure':
        return [f"EMPTY verdict with unusable certificate kind {cert.get('kind')!r}"]

    matrices = {}
    for word in cert['words']:
        m = word_matrix(a, word)
        matrices[m.key()] = m
    if len(matrices) != cert['group_order']:
        problems.append(f"certificate words give {len(matrices)} distinct matrices, "
                        f"expected {cert['group_order']}")
    for m in list(matrices.values()):
        for s in a.alphabet:
            if mat_mul(m, a.transitions[s]).key() not in matrices:
                problems.append(f"element set is not closed under {s!r}")
                return problems
    values = [a.measure(row_apply(a.initial, m)) for m in matrices.values()]
    extremum = max(values) if relation is Relation.GT else min(values)
    if extremum != cert['extremum']:
        problems.append(f"recomputed extremum {format_rational(extremum)} differs from "
                        f"{format_rational(cert['extremum'])}")
    if relation.holds(extremum, lam):
        problems.append(f"extremum {format_rational(extremum)} satisfies {relation.value} {format_rational(lam)}")
    return problems


# Threshold emptiness status for measure-once quantum and probabilistic automata
DECIDABILITY = {
    Relation.GE: ('undecidable', 'undecidable'),
    Relation.GT: ('decidable', 'undecidable'),
    Relation.LE: ('undecidable', 'undecidable'),
    Relation.LT: ('decidable', 'undecidable'),
}


def _empty_by_bound(relation: Relation, lam: Fraction) -> bool:
    return {
        Relation.GE: lam > 1,
        Relation.GT: lam >= 1,
        Relation.LE: lam < 0,
        Relation.LT: lam <= 0,
    }[relation]


def bounded_emptiness_table(a: Qfa, lam: RationalLike, max_len: int, include_empty: bool = True,
                            threads: int = 1) -> pd.DataFrame:
    """Bounded witness search for each of L_>=, L_>, L_<=, L_<

    The empty word is searched first unless include_empty is False.
    """
    lam = to_rational(lam)
    rows = []
    for relation in (Relation.GE, Relation.GT, Relation.LE, Relation.LT):
        found = bounded_search(a, ThresholdSpec(lam, relation), max_len, include_empty=include_empty,
                               threads=threads)
        if found is not None:
            status = 'NONEMPTY'
        elif _empty_by_bound(relation, lam):
            status = 'EMPTY-BY-BOUND'
        else:
            status = 'NO-WITNESS-UP-TO-BUDGET'
        qfa_status, pfa_status = DECIDABILITY[relation]
        rows.append({
            'language': f"L_{relation.value}",
            'relation': relation.value,
            'status': status,
            'witness': format_word(found[0]) if found else '',
            'value': format_rational(found[1]) if found else '',
            'qfa_emptiness': qfa_status,
            'pfa_emptiness': pfa_status,
        })
    return pd.DataFrame(rows)
