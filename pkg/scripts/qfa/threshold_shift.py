import logging
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Callable, Dict, Optional, Tuple

from .automaton import Qfa, Relation, Word, format_word, iter_word_values
from .errors import QfaError, ValidationError
from .exactmath import (
    RationalLike,
    RationalMatrix,
    RationalVector,
    block_diag,
    format_rational,
    norm_sq,
    to_rational,
)

logger = logging.getLogger(__name__)

# Appended coordinates: four for the beta components, four for 1 - alpha - beta
EXTENSION_WIDTH = 8


@dataclass(frozen=True)
class FourSquares:
    a1: Fraction
    a2: Fraction
    a3: Fraction
    a4: Fraction
    target: Fraction

    def __post_init__(self):
        if sum(x * x for x in self.components) != self.target:
            raise QfaError(f"Four-square components do not sum to {self.target}")

    @property
    def components(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        return self.a1, self.a2, self.a3, self.a4

    @property
    def nonzero(self) -> Tuple[Fraction, ...]:
        return tuple(x for x in self.components if x != 0)


def _four_integer_squares(n: int) -> Tuple[int, int, int, int]:
    # lexicographically largest n1 >= n2 >= n3 >= n4 with n = sum of squares
    for n1 in range(isqrt(n), -1, -1):
        r1 = n - n1 * n1
        for n2 in range(min(n1, isqrt(r1)), -1, -1):
            r2 = r1 - n2 * n2
            for n3 in range(min(n2, isqrt(r2)), -1, -1):
                r3 = r2 - n3 * n3
                n4 = isqrt(r3)
                if n4 <= n3 and n4 * n4 == r3:
                    return n1, n2, n3, n4
    raise QfaError(f"No four-square decomposition found for {n}")


def four_squares(lam: RationalLike) -> FourSquares:
    """lam = a1^2 + a2^2 + a3^2 + a4^2 with rational a_i

    For lam = p/q in lowest terms, p*q is written as a sum of four integer
    squares and every root is divided by q.
    """
    lam = to_rational(lam)
    if lam < 0:
        raise ValueError(f"Cannot write negative {format_rational(lam)} as a sum of squares")
    p, q = lam.numerator, lam.denominator
    roots = _four_integer_squares(p * q)
    result = FourSquares(*(Fraction(r, q) for r in roots), target=lam)
    logger.debug(f"four_squares({format_rational(lam)}) = {[format_rational(x) for x in result.components]}")
    return result


def _check_affine(alpha: Fraction, beta: Fraction):
    if alpha <= 0:
        raise ValidationError(f"alpha must be positive, got {format_rational(alpha)}")
    if beta < 0:
        raise ValidationError(f"beta must be non-negative, got {format_rational(beta)}")
    if alpha + beta > 1:
        raise ValidationError(f"alpha + beta must be at most 1, got {format_rational(alpha + beta)}")


def shift_affine(a: Qfa, alpha: RationalLike, beta: RationalLike) -> Qfa:
    """Automaton B over the same alphabet with Val_B(w) = alpha * Val_A(w) + beta

    The state space is m copies of A's followed by eight extra coordinates,
    where m is the number of nonzero four-square components c_i of alpha:
    s_B = (c_1 s, ..., c_m s, b_1..b_4, e_1..e_4) with beta = sum b_j^2 and
    1 - alpha - beta = sum e_j^2. Transitions act as X on every copy and as
    the identity on the extension; the projection keeps P on every copy and
    the four beta coordinates. When alpha is a rational square m is 1.
    """
    alpha, beta = to_rational(alpha), to_rational(beta)
    _check_affine(alpha, beta)
    scales = four_squares(alpha).nonzero
    tail = four_squares(beta).components + four_squares(1 - alpha - beta).components

    copies = len(scales)
    extension = RationalMatrix.identity(EXTENSION_WIDTH)
    transitions = {s: block_diag([a.transitions[s]] * copies + [extension]) for s in a.alphabet}
    initial_entries = []
    for c in scales:
        initial_entries.extend(c * x for x in a.initial.entries)
    initial_entries.extend(tail)
    projection = block_diag([a.projection] * copies + [RationalMatrix.diagonal([1] * 4 + [0] * 4)])
    b = Qfa(a.alphabet, transitions, RationalVector(initial_entries), projection)
    logger.info(f"Shifted automaton: alpha={format_rational(alpha)}, beta={format_rational(beta)}, "
                f"{copies} cop{'y' if copies == 1 else 'ies'}, dimension {b.n}")
    return b


# preset name -> lambda -> (alpha, beta)
PRESETS: Dict[str, Callable[[Fraction], Tuple[Fraction, Fraction]]] = {
    'paper-lemma1': lambda lam: (lam, Fraction(0)),
    'paper-corollary': lambda lam: (1 - lam, lam),
}


def preset_parameters(name: str, lam: RationalLike) -> Tuple[Fraction, Fraction]:
    if name not in PRESETS:
        raise ValueError(f"Unknown preset {name!r}; expected one of {sorted(PRESETS)}")
    return PRESETS[name](to_rational(lam))


@dataclass
class ShiftReport:
    alpha: Fraction
    beta: Fraction
    max_len: int
    words_checked: int
    initial_norm_sq: Fraction
    counterexample: Optional[Word] = None
    expected: Optional[Fraction] = None
    actual: Optional[Fraction] = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None and self.initial_norm_sq == 1


def _same_alphabet(a: Qfa, b: Qfa):
    if a.alphabet != b.alphabet:
        raise ValidationError(f"Alphabets differ: {list(a.alphabet)} vs {list(b.alphabet)}")


def verify_shift(a: Qfa, b: Qfa, alpha: RationalLike, beta: RationalLike, max_len: int) -> ShiftReport:
    """Check Val_B(w) = alpha * Val_A(w) + beta for all |w| <= max_len, and ||s_B||^2 = 1"""
    _same_alphabet(a, b)
    alpha, beta = to_rational(alpha), to_rational(beta)
    report = ShiftReport(alpha, beta, max_len, 0, norm_sq(b.initial))
    for (word, va), (_, vb) in zip(iter_word_values(a, max_len), iter_word_values(b, max_len)):
        report.words_checked += 1
        expected = alpha * va + beta
        if vb != expected:
            report.counterexample, report.expected, report.actual = word, expected, vb
            logger.warning(f"Shift identity fails at {format_word(word)}: "
                           f"{format_rational(vb)} != {format_rational(expected)}")
            break
    return report


@dataclass
class LanguageCheck:
    relation: Relation
    mu: Fraction
    words_checked: int
    mismatch: Optional[Word] = None

    @property
    def passed(self) -> bool:
        return self.mismatch is None


def language_check(a: Qfa, b: Qfa, alpha: RationalLike, beta: RationalLike, mu: RationalLike,
                   max_len: int, relation: Relation = Relation.GT) -> LanguageCheck:
    """{w : Val_B(w) rel alpha*mu + beta} equals {w : Val_A(w) rel mu} on words up to max_len"""
    _same_alphabet(a, b)
    alpha, beta, mu = to_rational(alpha), to_rational(beta), to_rational(mu)
    shifted = alpha * mu + beta
    result = LanguageCheck(relation, mu, 0)
    for (word, va), (_, vb) in zip(iter_word_values(a, max_len), iter_word_values(b, max_len)):
        result.words_checked += 1
        if relation.holds(va, mu) != relation.holds(vb, shifted):
            result.mismatch = word
            break
    return result
