import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .errors import DimensionError, UnknownSymbolError, ValidationError
from .exactmath import (
    RationalLike,
    RationalMatrix,
    RationalVector,
    format_rational,
    mat_mul,
    norm_sq,
    row_apply,
    to_rational,
)
from .invariant_algebra import PolyQ

logger = logging.getLogger(__name__)

Word = Tuple[str, ...]

EMPTY_WORD: Word = ()


class Relation(Enum):
    """Comparison defining a threshold language"""
    GE = '>='
    GT = '>'
    LE = '<='
    LT = '<'

    @classmethod
    def parse(cls, text: str) -> 'Relation':
        aliases = {'≥': '>=', '≤': '<=', 'ge': '>=', 'gt': '>', 'le': '<=', 'lt': '<'}
        key = aliases.get(text.strip().lower(), text.strip())
        for rel in cls:
            if rel.value == key:
                return rel
        raise ValueError(f"Unknown relation {text!r}; expected one of >=, >, <=, <")

    @property
    def is_strict(self) -> bool:
        return self in (Relation.GT, Relation.LT)

    def holds(self, value: Fraction, lam: Fraction) -> bool:
        if self is Relation.GE:
            return value >= lam
        if self is Relation.GT:
            return value > lam
        if self is Relation.LE:
            return value <= lam
        return value < lam


@dataclass(frozen=True)
class ThresholdSpec:
    lam: Fraction
    relation: Relation

    def __post_init__(self):
        object.__setattr__(self, 'lam', to_rational(self.lam))
        if not 0 <= self.lam <= 1:
            logger.warning(f"Threshold {format_rational(self.lam)} lies outside [0, 1], "
                           f"the range of word values")

    def accepts(self, value: Fraction) -> bool:
        return self.relation.holds(value, self.lam)


class Qfa:
    """Measure-once quantum finite automaton with exact rational data"""

    def __init__(self, alphabet: Sequence[str], transitions: Mapping[str, RationalMatrix],
                 initial: RationalVector, projection: RationalMatrix):
        symbols = tuple(str(s) for s in alphabet)
        if not symbols:
            raise ValidationError("Alphabet must not be empty")
        if len(set(symbols)) != len(symbols):
            raise ValidationError(f"Alphabet has repeated symbols: {list(symbols)}")
        missing = [s for s in symbols if s not in transitions]
        extra = [s for s in transitions if s not in symbols]
        if missing or extra:
            raise ValidationError(f"Transition keys do not match alphabet (missing {missing}, extra {extra})")
        n = initial.length
        for s in symbols:
            m = transitions[s]
            if (m.rows, m.cols) != (n, n):
                raise DimensionError(f"Transition for {s!r} is {m.rows}x{m.cols}, expected {n}x{n}")
        if (projection.rows, projection.cols) != (n, n):
            raise DimensionError(f"Projection is {projection.rows}x{projection.cols}, expected {n}x{n}")

        self.alphabet: Tuple[str, ...] = symbols
        self.n = n
        self.transitions: Dict[str, RationalMatrix] = {s: transitions[s] for s in symbols}
        self.initial = initial
        self.projection = projection
        self._accept_coords = _diagonal_support(projection)

    def __repr__(self) -> str:
        return f"Qfa(alphabet={list(self.alphabet)}, n={self.n})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Qfa) and self.alphabet == other.alphabet
                and self.transitions == other.transitions and self.initial == other.initial
                and self.projection == other.projection)

    def check_word(self, w: Sequence[str]) -> Word:
        word = tuple(w)
        for sym in word:
            if sym not in self.transitions:
                raise UnknownSymbolError(f"Symbol {sym!r} is not in the alphabet {list(self.alphabet)}")
        return word

    def step(self, v: RationalVector, sym: str) -> RationalVector:
        return row_apply(v, self.transitions[sym])

    def measure(self, v: RationalVector) -> Fraction:
        """||v P||^2"""
        if self._accept_coords is not None:
            entries = v.entries
            return sum((entries[i] * entries[i] for i in self._accept_coords), Fraction(0))
        return norm_sq(row_apply(v, self.projection))


def _diagonal_support(p: RationalMatrix) -> Optional[Tuple[int, ...]]:
    # 0/1 diagonal projections reduce measurement to a coordinate sum
    coords = []
    for i in range(p.rows):
        for j in range(p.cols):
            x = p[i, j]
            if i != j and x != 0:
                return None
            if i == j and x not in (0, 1):
                return None
        if p[i, i] == 1:
            coords.append(i)
    return tuple(coords)


def validate(a: Qfa) -> List[str]:
    """List every violated automaton invariant; empty when valid"""
    violations = []
    for sym in a.alphabet:
        if not a.transitions[sym].is_orthogonal():
            violations.append(f"transition {sym!r} is not orthogonal: X X^T != I")
    ns = norm_sq(a.initial)
    if ns != 1:
        violations.append(f"initial vector has norm^2 = {format_rational(ns)} != 1")
    p = a.projection
    if p.transpose() != p:
        violations.append("projection is not symmetric: P^T != P")
    if mat_mul(p, p) != p:
        violations.append("projection is not idempotent: P^2 != P")
    return violations


def ensure_valid(a: Qfa) -> Qfa:
    violations = validate(a)
    if violations:
        raise ValidationError(f"Invalid automaton: {'; '.join(violations)}", violations)
    return a


def word_matrix(a: Qfa, w: Sequence[str]) -> RationalMatrix:
    """X_w = X_{w_1} ... X_{w_|w|}; identity for the empty word"""
    word = a.check_word(w)
    m = RationalMatrix.identity(a.n)
    for sym in word:
        m = mat_mul(m, a.transitions[sym])
    return m


def final_vector(a: Qfa, w: Sequence[str]) -> RationalVector:
    """s X_w"""
    v = a.initial
    for sym in a.check_word(w):
        v = a.step(v, sym)
    return v


def value(a: Qfa, w: Sequence[str]) -> Fraction:
    """Val_A(w) = ||s X_w P||^2"""
    return a.measure(final_vector(a, w))


def _expand(a: Qfa, level: List[Tuple[Word, RationalVector]]) -> List[Tuple[Word, RationalVector]]:
    children = []
    for word, v in level:
        for sym in a.alphabet:
            children.append((word + (sym,), a.step(v, sym)))
    return children


def iter_word_values(a: Qfa, max_len: int, include_empty: bool = True, threads: int = 1,
                     progress: bool = False) -> Iterator[Tuple[Word, Fraction]]:
    """Yield (word, value) in length-lexicographic order up to max_len

    State vectors are shared along prefixes, so each word costs one
    vector-matrix product. With threads > 1 each level is expanded in
    ordered chunks; the output order does not depend on the thread count.
    """
    if max_len < 0:
        raise ValueError(f"max_len must be non-negative, got {max_len}")
    level: List[Tuple[Word, RationalVector]] = [(EMPTY_WORD, a.initial)]
    if include_empty:
        yield EMPTY_WORD, a.measure(a.initial)
    executor = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for length in tqdm(range(1, max_len + 1), desc="Word length", disable=not progress):
            if executor is not None and len(level) >= 2 * threads:
                size = -(-len(level) // threads)
                chunks = [level[i:i + size] for i in range(0, len(level), size)]
                level = [item for part in executor.map(lambda c: _expand(a, c), chunks) for item in part]
            else:
                level = _expand(a, level)
            logger.debug(f"Enumerating {len(level)} words of length {length}")
            for word, v in level:
                yield word, a.measure(v)
    finally:
        if executor is not None:
            executor.shutdown(wait=True)


def bounded_search(a: Qfa, t: ThresholdSpec, max_len: int, include_empty: bool = True,
                   threads: int = 1, progress: bool = False) -> Optional[Tuple[Word, Fraction]]:
    """First word (length-lex) of length <= max_len whose value satisfies t"""
    for word, val in iter_word_values(a, max_len, include_empty=include_empty,
                                      threads=threads, progress=progress):
        if t.accepts(val):
            logger.debug(f"Witness {format_word(word)} with value {format_rational(val)}")
            return word, val
    return None


def value_polynomial(a: Qfa) -> PolyQ:
    """f(X) = ||s X P||^2 as a polynomial in the entries x_rs of X"""
    n = a.n
    s = a.initial.entries
    p = a.projection
    f = PolyQ.zero(n)
    for j in range(n):
        coeffs = {}
        for i in range(n):
            if s[i] == 0:
                continue
            for t in range(n):
                c = s[i] * p[t, j]
                if c:
                    coeffs[(i, t)] = coeffs.get((i, t), Fraction(0)) + c
        linear = PolyQ.linear(n, coeffs)
        f = f + linear * linear
    return f


def parse_word(text: str) -> Word:
    """Single-character symbols, or comma-separated symbols"""
    text = text.strip()
    if text in ('', 'ε', 'eps'):
        return EMPTY_WORD
    if ',' in text:
        return tuple(part.strip() for part in text.split(','))
    return tuple(text)


def format_word(w: Sequence[str], empty: str = 'ε') -> str:
    if not w:
        return empty
    if all(len(s) == 1 for s in w):
        return ''.join(w)
    return ','.join(w)


def random_words(alphabet: Sequence[str], count: int, max_len: int, seed: int = 0) -> List[Word]:
    """Reproducible pseudo-random words with lengths uniform in [0, max_len]"""
    rng = np.random.default_rng(seed)
    words = []
    for _ in range(count):
        length = int(rng.integers(0, max_len + 1))
        picks = rng.integers(0, len(alphabet), size=length)
        words.append(tuple(alphabet[int(i)] for i in picks))
    return words


def make_qfa(alphabet: Sequence[str], transitions: Mapping[str, Sequence[Sequence[RationalLike]]],
             initial: Sequence[RationalLike], projection: Sequence[Sequence[RationalLike]]) -> Qfa:
    """Convenience constructor from nested lists of rational literals"""
    return Qfa(
        alphabet,
        {s: RationalMatrix(transitions[s]) for s in transitions},
        RationalVector(initial),
        RationalMatrix(projection),
    )
