import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from .automaton import (
    Qfa,
    Relation,
    ThresholdSpec,
    Word,
    bounded_search,
    format_word,
    value,
)
from .errors import QfaError, ReducedWordError, ValidationError
from .exactmath import (
    RationalMatrix,
    RationalVector,
    block_diag,
    from_blocks,
    mat_mul,
    row_apply,
)

logger = logging.getLogger(__name__)

PCP_LETTERS = ('a', 'b')

# 5 * X_a and 5 * X_b: rotations of angle arccos(3/5) about the third and first axes
_X5 = {
    'a': ((3, -4, 0), (4, 3, 0), (0, 0, 5)),
    'b': ((5, 0, 0), (0, 3, -4), (0, 4, 3)),
}

TEST_VECTOR = (3, 0, 4)


def rotation_generators() -> Tuple[RationalMatrix, RationalMatrix]:
    """X_a and X_b"""
    return (RationalMatrix(_X5['a']).scale(Fraction(1, 5)),
            RationalMatrix(_X5['b']).scale(Fraction(1, 5)))


_GENERATORS = dict(zip(PCP_LETTERS, rotation_generators()))


@dataclass(frozen=True)
class SignedLetter:
    """A rotation generator or its inverse"""
    base: str
    inverted: bool = False

    def __post_init__(self):
        if self.base not in PCP_LETTERS:
            raise ValueError(f"Signed letter base must be 'a' or 'b', got {self.base!r}")

    def inverse(self) -> 'SignedLetter':
        return SignedLetter(self.base, not self.inverted)

    def integer_matrix(self) -> Tuple[Tuple[int, ...], ...]:
        """5 times the matrix of this letter"""
        m = _X5[self.base]
        if self.inverted:
            return tuple(zip(*m))
        return m

    def __str__(self) -> str:
        return self.base.upper() if self.inverted else self.base


SIGNED_LETTERS = (SignedLetter('a'), SignedLetter('b'), SignedLetter('a', True), SignedLetter('b', True))


def parse_signed_word(text: str) -> List[SignedLetter]:
    """Lowercase a/b are generators, uppercase A/B their inverses"""
    letters = []
    for ch in text.strip():
        if ch not in 'abAB':
            raise ValueError(f"Signed words use the letters a, b, A, B; got {ch!r}")
        letters.append(SignedLetter(ch.lower(), ch.isupper()))
    return letters


def is_reduced(word: Sequence[SignedLetter]) -> bool:
    return all(word[i + 1] != word[i].inverse() for i in range(len(word) - 1))


def reduce_signed_word(word: Sequence[SignedLetter]) -> List[SignedLetter]:
    """Free reduction: cancel adjacent letter/inverse pairs"""
    stack: List[SignedLetter] = []
    for letter in word:
        if stack and stack[-1] == letter.inverse():
            stack.pop()
        else:
            stack.append(letter)
    return stack


@dataclass(frozen=True)
class FiveAdicForm:
    """(3 0 4) M = (x1 x2 x3) / 5^k, the triple kept unreduced"""
    x1: int
    x2: int
    x3: int
    k: int

    @property
    def divisibility_holds(self) -> bool:
        # 5 divides x2 exactly when k = 0
        return (self.x2 % 5 == 0) == (self.k == 0)

    @property
    def norm_holds(self) -> bool:
        return self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2 == 25 ** (self.k + 1)

    def vector(self) -> RationalVector:
        scale = Fraction(1, 5 ** self.k)
        return RationalVector([self.x1 * scale, self.x2 * scale, self.x3 * scale])


def _apply5(x: Tuple[int, int, int], letter: SignedLetter) -> Tuple[int, int, int]:
    m = letter.integer_matrix()
    return (x[0] * m[0][0] + x[1] * m[1][0] + x[2] * m[2][0],
            x[0] * m[0][1] + x[1] * m[1][1] + x[2] * m[2][1],
            x[0] * m[0][2] + x[1] * m[1][2] + x[2] * m[2][2])


def five_adic_form(word: Sequence[SignedLetter]) -> FiveAdicForm:
    """Integer triple and exponent of (3 0 4) times the product of a reduced word"""
    if not is_reduced(word):
        raise ReducedWordError(f"Word {''.join(map(str, word))} is not reduced")
    x = TEST_VECTOR
    for letter in word:
        x = _apply5(x, letter)
    return FiveAdicForm(x[0], x[1], x[2], len(word))


@dataclass
class FreenessReport:
    max_len: int
    words_checked: int
    passed: bool
    first_failure: Optional[str] = None
    counts_by_length: Dict[int, int] = field(default_factory=dict)


def check_freeness_certificate(max_len: int, progress: bool = False) -> FreenessReport:
    """Check 5 does not divide x2 for every reduced word of length 1..max_len

    Words are generated depth-first, never appending the inverse of the
    previous letter; the triple is carried incrementally in integers.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be at least 1, got {max_len}")
    logger.info(f"Checking the 5-adic certificate on reduced words up to length {max_len}")
    counts = {length: 0 for length in range(1, max_len + 1)}
    checked = 0
    stack: List[Tuple[Tuple[SignedLetter, ...], Tuple[int, int, int]]] = [((), TEST_VECTOR)]
    bar = tqdm(total=2 * (3 ** max_len - 1), desc="Reduced words", disable=not progress)
    try:
        while stack:
            word, x = stack.pop()
            for letter in SIGNED_LETTERS:
                if word and letter == word[-1].inverse():
                    continue
                child = word + (letter,)
                y = _apply5(x, letter)
                form = FiveAdicForm(y[0], y[1], y[2], len(child))
                checked += 1
                counts[len(child)] += 1
                bar.update(1)
                if not (form.divisibility_holds and form.norm_holds):
                    text = ''.join(map(str, child))
                    logger.error(f"Certificate fails on {text}: {form}")
                    return FreenessReport(max_len, checked, False, text, counts)
                if len(child) < max_len:
                    stack.append((child, y))
    finally:
        bar.close()
    return FreenessReport(max_len, checked, True, None, counts)


@dataclass
class InjectivityReport:
    max_len: int
    words_checked: int
    collision: Optional[Tuple[str, str]] = None

    @property
    def passed(self) -> bool:
        return self.collision is None


def check_injectivity(max_len: int) -> InjectivityReport:
    """Distinct reduced words u, v with |u|, |v| <= max_len give distinct t X_u"""
    seen: Dict[Tuple[Fraction, ...], str] = {}
    level: List[Tuple[Tuple[SignedLetter, ...], Tuple[int, int, int]]] = [((), TEST_VECTOR)]
    checked = 0
    for length in range(max_len + 1):
        if length > 0:
            level = [(w + (l,), _apply5(x, l)) for w, x in level for l in SIGNED_LETTERS
                     if not w or l != w[-1].inverse()]
        scale = Fraction(1, 5 ** length)
        for word, x in level:
            checked += 1
            key = tuple(c * scale for c in x)
            text = ''.join(map(str, word)) or 'ε'
            if key in seen:
                return InjectivityReport(max_len, checked, (seen[key], text))
            seen[key] = text
    return InjectivityReport(max_len, checked)


def encode_word(w: str) -> RationalMatrix:
    """X_w over {a, b}; identity for the empty word"""
    m = RationalMatrix.identity(3)
    for ch in w:
        if ch not in _GENERATORS:
            raise ValueError(f"Words over {{a, b}} only, got {ch!r}")
        m = mat_mul(m, _GENERATORS[ch])
    return m


@dataclass(frozen=True)
class PcpInstance:
    """k pairs (u_i, v_i) of words over {a, b}"""
    pairs: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple((str(u), str(v)) for u, v in self.pairs)
        if not pairs:
            raise ValidationError("A PCP instance needs at least one pair")
        for i, (u, v) in enumerate(pairs, 1):
            bad = set(u + v) - set(PCP_LETTERS)
            if bad:
                raise ValidationError(f"Pair {i} uses letters outside {{a, b}}: {sorted(bad)}")
        object.__setattr__(self, 'pairs', pairs)

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(str(i) for i in range(1, self.k + 1))

    def concat(self, w: Sequence[str]) -> Tuple[str, str]:
        """(u_w, v_w)"""
        index = {label: i for i, label in enumerate(self.labels)}
        try:
            picks = [self.pairs[index[sym]] for sym in w]
        except KeyError as e:
            raise QfaError(f"Index {e.args[0]!r} is not a pair label of this instance") from e
        return ''.join(u for u, _ in picks), ''.join(v for _, v in picks)


def y_block(u: str, v: str) -> RationalMatrix:
    """(1/2) [[X_u + X_v, X_u - X_v], [X_u - X_v, X_v + X_u]]"""
    xu, xv = encode_word(u), encode_word(v)
    half = Fraction(1, 2)
    plus = (xu + xv).scale(half)
    minus = (xu - xv).scale(half)
    return from_blocks([[plus, minus], [minus, plus]])


def _initial_y() -> RationalVector:
    # y = (t, 0) normalized by ||t|| = 5
    return RationalVector([Fraction(3, 5), 0, Fraction(4, 5), 0, 0, 0])


def _projection_p() -> RationalMatrix:
    return RationalMatrix.diagonal([0, 0, 0, 1, 1, 1])


def build_pcp_qfa(p: PcpInstance) -> Qfa:
    """Six-dimensional automaton whose value vanishes exactly on PCP solutions

    The value is ||y Y_w P||^2 / 25 for the unnormalized y = (3 0 4 0 0 0).
    """
    transitions = {label: y_block(u, v) for label, (u, v) in zip(p.labels, p.pairs)}
    logger.info(f"Built PCP automaton with {p.k} letters in dimension 6")
    return Qfa(p.labels, transitions, _initial_y(), _projection_p())


def build_complement_qfa(p: PcpInstance) -> Qfa:
    """Same dynamics measured with I - P: value 1 exactly on PCP solutions"""
    base = build_pcp_qfa(p)
    return Qfa(base.alphabet, base.transitions, base.initial,
               RationalMatrix.identity(6) - base.projection)


@dataclass
class PcpCheck:
    word: Word
    is_solution: bool
    u_word: str
    v_word: str
    value: Fraction

    @property
    def agrees(self) -> bool:
        return self.is_solution == (self.value == 0)


def pcp_solution_predicate(p: PcpInstance, w: Sequence[str], qfa: Optional[Qfa] = None) -> PcpCheck:
    """Compare u_w with v_w and the automaton value at w"""
    word = tuple(w)
    if not word:
        raise QfaError("A PCP solution must be a non-empty word")
    u_w, v_w = p.concat(word)
    a = qfa if qfa is not None else build_pcp_qfa(p)
    check = PcpCheck(word, u_w == v_w, u_w, v_w, value(a, word))
    if not check.agrees:
        logger.error(f"Reduction disagrees at {format_word(word)}: u_w == v_w is {check.is_solution}, "
                     f"value is {check.value}")
    return check


@dataclass
class TwoMatrixSystem:
    z0: RationalMatrix
    z1: RationalMatrix
    x: RationalVector
    q: RationalMatrix
    k: int

    @property
    def dimension(self) -> int:
        return self.z0.rows

    def as_qfa(self) -> Qfa:
        """The system as an automaton over {0, 1}"""
        return Qfa(('0', '1'), {'0': self.z0, '1': self.z1}, self.x, self.q)


def build_two_matrix_system(p: PcpInstance) -> TwoMatrixSystem:
    """Z0 = diag(Y_1..Y_k), Z1 = block cyclic shift, x = (y, 0), Q = diag(P, 0)"""
    k = p.k
    ys = [y_block(u, v) for u, v in p.pairs]
    z0 = block_diag(ys)
    ident, zero = RationalMatrix.identity(6), RationalMatrix.zeros(6, 6)
    z1 = from_blocks([[ident if j == (i + 1) % k else zero for j in range(k)] for i in range(k)])
    x = _initial_y().concat(RationalVector.zeros(6 * (k - 1))) if k > 1 else _initial_y()
    q = block_diag([_projection_p()] + [zero] * (k - 1))
    logger.info(f"Built two-matrix system in dimension {6 * k}")
    return TwoMatrixSystem(z0, z1, x, q, k)


@dataclass
class TwoMatrixReport:
    max_len_w: int
    max_len_nu: int
    w_witness: Optional[Word]
    nu_witness: Optional[str]
    nu_index_word: Optional[Word]
    nu_value: Optional[Fraction]
    nu_states: int
    nu_truncated: bool
    literal_nu_witness: Optional[str]

    @property
    def agree(self) -> bool:
        return (self.w_witness is None) == (self.nu_witness is None)


def _search_nu(p: PcpInstance, max_len: int, max_states: int):
    # state: (current block, 6-vector in that block, whether Z0 was applied)
    ys = [y_block(u, v) for u, v in p.pairs]
    k = p.k
    start = (0, _initial_y(), False)
    seen = {(0, start[1].key(), False)}
    level = [(start, '')]
    states = 1
    for length in range(1, max_len + 1):
        next_level = []
        for (block, vec, used), nu in level:
            for bit in '01':
                if bit == '0':
                    child = (block, row_apply(vec, ys[block]), True)
                else:
                    child = ((block + 1) % k, vec, used)
                key = (child[0], child[1].key(), child[2])
                if key in seen:
                    continue
                seen.add(key)
                states += 1
                child_nu = nu + bit
                cb, cv, cu = child
                if cb == 0 and cu and all(c == 0 for c in cv.entries[3:]):
                    return child_nu, states, False
                if states >= max_states:
                    logger.warning(f"Two-matrix search stopped at {states} states")
                    return None, states, True
                next_level.append((child, child_nu))
        level = next_level
        if not level:
            break
    return None, states, False


def nu_index_word(p: PcpInstance, nu: str) -> Word:
    """The index word selected by nu: the current block label at every 0"""
    block, picks = 0, []
    for bit in nu:
        if bit == '0':
            picks.append(p.labels[block])
        else:
            block = (block + 1) % p.k
    return tuple(picks)


def check_two_matrix_claim(p: PcpInstance, max_len_w: int, max_len_nu: int,
                           max_states: int = 200000) -> TwoMatrixReport:
    """Bounded comparison of zero-value witnesses on both sides of the reduction

    A word nu over {0, 1} counts as a witness when it returns to the first
    block and applies Z0 at least once; otherwise x Z_nu Q vanishes for the
    trivial reason that the state sits outside the measured block. The
    shortest such trivial word is reported separately.
    """
    if max_len_w < 1 or max_len_nu < 1:
        raise ValueError("Both budgets must be at least 1")
    found = bounded_search(build_pcp_qfa(p), ThresholdSpec(Fraction(0), Relation.LE), max_len_w,
                           include_empty=False)
    w_witness = found[0] if found else None

    nu, states, truncated = _search_nu(p, max_len_nu, max_states)
    system = build_two_matrix_system(p)
    zq = system.as_qfa()
    nu_value = value(zq, tuple(nu)) if nu is not None else None
    literal = bounded_search(zq, ThresholdSpec(Fraction(0), Relation.LE), min(max_len_nu, 2), include_empty=False)
    report = TwoMatrixReport(
        max_len_w=max_len_w,
        max_len_nu=max_len_nu,
        w_witness=w_witness,
        nu_witness=nu,
        nu_index_word=nu_index_word(p, nu) if nu is not None else None,
        nu_value=nu_value,
        nu_states=states,
        nu_truncated=truncated,
        literal_nu_witness=''.join(literal[0]) if literal else None,
    )
    logger.info(f"Two-matrix check: w witness {w_witness}, nu witness {nu}, agree={report.agree}")
    return report
