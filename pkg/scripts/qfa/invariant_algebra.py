import hashlib
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from sympy import QQ
from sympy.polys.rings import PolyElement, PolyRing, ring
from tqdm import tqdm

from .errors import DimensionError, QfaError, ValidationError
from .exactmath import (
    RationalLike,
    RationalMatrix,
    format_rational,
    mat_mul,
    nullspace_from_rows,
    rank,
    to_rational,
)

logger = logging.getLogger(__name__)

# Exponent vector over the n*n indeterminates x_rs, flattened row-major
Monomial = Tuple[int, ...]


def variable_name(n: int, index: int) -> str:
    r, s = divmod(index, n)
    if n < 10:
        return f"x{r + 1}{s + 1}"
    return f"x{r + 1}_{s + 1}"


def _compositions(nvars: int, degree: int) -> List[Monomial]:
    # exponent tuples with the given total degree, lexicographically descending
    if nvars == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in _compositions(nvars - 1, degree - first):
            out.append((first,) + rest)
    return out


def monomial_basis(n: int, d: int) -> List[Monomial]:
    """All monomials of total degree <= d in graded-lex order

    Degrees ascend; within one degree the exponent vectors descend
    lexicographically, so x11 precedes x12 precedes x21.
    """
    if n < 1 or d < 0:
        raise ValueError(f"Need n >= 1 and d >= 0, got n={n}, d={d}")
    nvars = n * n
    monos = []
    for degree in range(d + 1):
        monos.extend(_compositions(nvars, degree))
    assert len(monos) == comb(nvars + d, d)
    return monos


@lru_cache(maxsize=None)
def polynomial_ring(n: int) -> PolyRing:
    """Q[x11, ..., xnn], one indeterminate per matrix entry in row-major order"""
    ring_, *_ = ring([variable_name(n, i) for i in range(n * n)], QQ)
    return ring_


def _to_qq(c: Fraction):
    return QQ(c.numerator, c.denominator)


def _from_qq(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


class PolyQ:
    """Polynomial with rational coefficients in the entries of an n x n matrix

    Backed by an element of the sympy ring Q[x11, ..., xnn]; coefficients
    cross the boundary as Fractions.
    """

    __slots__ = ('n', '_poly')

    def __init__(self, n: int, terms: Optional[Mapping[Monomial, RationalLike]] = None):
        self.n = n
        nvars = n * n
        clean: Dict[Monomial, Fraction] = {}
        for mono, coef in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != nvars:
                raise DimensionError(f"Monomial {mono} has {len(mono)} exponents, expected {nvars}")
            clean[mono] = clean.get(mono, Fraction(0)) + to_rational(coef)
        self._poly = polynomial_ring(n).from_dict({m: _to_qq(c) for m, c in clean.items() if c})

    @classmethod
    def from_ring(cls, n: int, poly: PolyElement) -> 'PolyQ':
        if poly.ring != polynomial_ring(n):
            raise DimensionError(f"Ring element over {poly.ring.ngens} indeterminates, expected {n * n}")
        obj = cls.__new__(cls)
        obj.n = n
        obj._poly = poly
        return obj

    @classmethod
    def zero(cls, n: int) -> 'PolyQ':
        return cls(n)

    @classmethod
    def constant(cls, n: int, c: RationalLike) -> 'PolyQ':
        return cls(n, {(0,) * (n * n): c})

    @classmethod
    def variable(cls, n: int, r: int, s: int) -> 'PolyQ':
        """x_rs with zero-based r, s"""
        return cls.from_ring(n, polynomial_ring(n).gens[r * n + s])

    @classmethod
    def linear(cls, n: int, coeffs: Mapping[Tuple[int, int], RationalLike],
               const: RationalLike = 0) -> 'PolyQ':
        terms: Dict[Monomial, RationalLike] = {(0,) * (n * n): const}
        for (r, s), c in coeffs.items():
            exps = [0] * (n * n)
            exps[r * n + s] = 1
            terms[tuple(exps)] = c
        return cls(n, terms)

    @property
    def ring_element(self) -> PolyElement:
        return self._poly

    @property
    def terms(self) -> Dict[Monomial, Fraction]:
        return {m: _from_qq(c) for m, c in self._poly.terms()}

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self._poly.keys()), default=0)

    def is_zero(self) -> bool:
        return not self._poly

    def coefficient(self, mono: Monomial) -> Fraction:
        c = self._poly.get(tuple(mono))
        return _from_qq(c) if c is not None else Fraction(0)

    def _check(self, other: 'PolyQ'):
        if other.n != self.n:
            raise DimensionError(f"Polynomials over {self.n}x{self.n} and {other.n}x{other.n} matrices")

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyQ) and self.n == other.n and self._poly == other._poly

    def __hash__(self) -> int:
        return hash((self.n, self._poly))

    def __add__(self, other: 'PolyQ') -> 'PolyQ':
        self._check(other)
        return PolyQ.from_ring(self.n, self._poly + other._poly)

    def __neg__(self) -> 'PolyQ':
        return PolyQ.from_ring(self.n, -self._poly)

    def __sub__(self, other: 'PolyQ') -> 'PolyQ':
        self._check(other)
        return PolyQ.from_ring(self.n, self._poly - other._poly)

    def __mul__(self, other) -> 'PolyQ':
        if not isinstance(other, PolyQ):
            return self.scale(other)
        self._check(other)
        return PolyQ.from_ring(self.n, self._poly * other._poly)

    __rmul__ = __mul__

    def scale(self, c: RationalLike) -> 'PolyQ':
        return PolyQ.from_ring(self.n, self._poly.mul_ground(_to_qq(to_rational(c))))

    def evaluate(self, m: RationalMatrix) -> Fraction:
        return evaluate(self, m)

    def substitute_left(self, g: RationalMatrix) -> 'PolyQ':
        return substitute_left(self, g)

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Terms from the highest monomial down, in graded-lex order"""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def __str__(self) -> str:
        if self.is_zero():
            return '0'
        parts = []
        for mono, coef in self.sorted_terms():
            factors = []
            for idx, e in enumerate(mono):
                if e:
                    name = variable_name(self.n, idx)
                    factors.append(name if e == 1 else f"{name}^{e}")
            body = '*'.join(factors)
            mag = abs(coef)
            if not body:
                term = format_rational(mag)
            elif mag == 1:
                term = body
            else:
                term = f"{format_rational(mag)}*{body}"
            sign = '-' if coef < 0 else '+'
            parts.append((sign, term))
        first_sign, first_term = parts[0]
        text = ('-' if first_sign == '-' else '') + first_term
        for sign, term in parts[1:]:
            text += f" {sign} {term}"
        return text

    def __repr__(self) -> str:
        return f"PolyQ(n={self.n}, {self})"


def evaluate(f: PolyQ, m: RationalMatrix) -> Fraction:
    """Exact value of f at the matrix m"""
    if (m.rows, m.cols) != (f.n, f.n):
        raise DimensionError(f"Cannot evaluate a polynomial over {f.n}x{f.n} matrices at a {m.rows}x{m.cols} matrix")
    values = [_to_qq(x) for row in m.entries for x in row]
    return _from_qq(f.ring_element(*values))


def _left_images(g: RationalMatrix) -> List[Tuple[PolyElement, PolyElement]]:
    # x_rs -> (g X)_rs = sum_t g_rt x_ts
    n = g.rows
    ring_ = polynomial_ring(n)
    gens = ring_.gens
    images = []
    for idx in range(n * n):
        r, s = divmod(idx, n)
        image = ring_.zero
        for t in range(n):
            if g[r, t]:
                image += gens[t * n + s].mul_ground(_to_qq(g[r, t]))
        images.append((gens[idx], image))
    return images


def substitute_left(f: PolyQ, g: RationalMatrix) -> PolyQ:
    """The polynomial X -> f(g X)"""
    if (g.rows, g.cols) != (f.n, f.n):
        raise DimensionError(f"Cannot substitute a {g.rows}x{g.cols} matrix into a polynomial over {f.n}x{f.n}")
    return PolyQ.from_ring(f.n, f.ring_element.compose(_left_images(g)))


def generator_fingerprint(generators: Sequence[RationalMatrix]) -> str:
    digest = hashlib.sha256('|'.join(g.key() for g in generators).encode('utf-8'))
    return digest.hexdigest()


def check_generators(generators: Sequence[RationalMatrix]) -> int:
    """Validate a generator list and return the common dimension"""
    if not generators:
        raise ValidationError("At least one generator is required")
    n = generators[0].rows
    for i, g in enumerate(generators):
        if not g.is_square or g.rows != n:
            raise DimensionError(f"Generator {i} is {g.rows}x{g.cols}, expected {n}x{n}")
        if not g.is_orthogonal():
            raise ValidationError(f"Generator {i} is not orthogonal")
    return n


@dataclass
class InvariantBasis:
    """Basis of V_d: polynomials of degree <= d vanishing at I and invariant under each generator"""
    n: int
    d: int
    polys: List[PolyQ]
    generator_fingerprint: str

    @property
    def dimension(self) -> int:
        return len(self.polys)

    def evaluate_all(self, m: RationalMatrix) -> List[Fraction]:
        return [evaluate(f, m) for f in self.polys]

    def vanishes_at(self, m: RationalMatrix) -> bool:
        return all(evaluate(f, m) == 0 for f in self.polys)


def invariant_basis(generators: Sequence[RationalMatrix], d: int, progress: bool = False) -> InvariantBasis:
    """Solve f(I) = 0 and f(X_j X) = f(X) for all j over the monomials of degree <= d"""
    n = check_generators(generators)
    monos = monomial_basis(n, d)
    index = {m: i for i, m in enumerate(monos)}
    ncols = len(monos)
    logger.info(f"Assembling invariant system: n={n}, d={d}, {ncols} monomials, {len(generators)} generators")

    ring_ = polynomial_ring(n)
    rows: List[List[Fraction]] = []
    for g in tqdm(generators, desc="Generators", disable=not progress):
        images = _left_images(g)
        block = [[Fraction(0)] * ncols for _ in range(ncols)]
        for col, mono in enumerate(monos):
            image = ring_.from_dict({mono: QQ.one}).compose(images)
            for image_mono, coef in image.terms():
                block[index[image_mono]][col] += _from_qq(coef)
            block[col][col] -= 1
        rows.extend(r for r in block if any(r))

    # f(I) = 0: a monomial is 1 at I when it only uses diagonal entries
    diagonal = {r * n + r for r in range(n)}
    rows.append([Fraction(int(all(e == 0 or i in diagonal for i, e in enumerate(m)))) for m in monos])

    polys = []
    for vec in nullspace_from_rows(rows, ncols):
        coeffs = list(vec.entries)
        # last nonzero coefficient in monomial_basis order is positive
        if next(c for c in reversed(coeffs) if c) < 0:
            coeffs = [-c for c in coeffs]
        polys.append(PolyQ(n, {monos[i]: c for i, c in enumerate(coeffs) if c}))
    logger.info(f"V_{d} has dimension {len(polys)}")
    return InvariantBasis(n=n, d=d, polys=polys, generator_fingerprint=generator_fingerprint(generators))


def enumerate_invariants(generators: Sequence[RationalMatrix], max_degree: int) -> Iterator[InvariantBasis]:
    """Bases of V_1, V_2, ... up to max_degree"""
    for d in range(1, max_degree + 1):
        yield invariant_basis(generators, d)


def in_span(basis: InvariantBasis, f: PolyQ) -> bool:
    """Whether f is a rational linear combination of the basis polynomials"""
    if f.n != basis.n:
        raise DimensionError(f"Polynomial over {f.n}x{f.n} tested against basis over {basis.n}x{basis.n}")
    if f.is_zero():
        return True
    if f.degree > basis.d:
        return False
    monos = monomial_basis(basis.n, basis.d)
    rows = [[p.coefficient(m) for m in monos] for p in basis.polys]
    base_rank = rank(RationalMatrix(rows)) if rows else 0
    extended = RationalMatrix(rows + [[f.coefficient(m) for m in monos]])
    return rank(extended) == base_rank


class ClosureStatus(Enum):
    FINITE = 'finite'
    BUDGET_EXCEEDED = 'budget-exceeded'


@dataclass
class ClosureResult:
    status: ClosureStatus
    cap: int
    elements: List[RationalMatrix] = field(default_factory=list)
    words: List[Tuple[str, ...]] = field(default_factory=list)
    explored: int = 0
    identity_word: Optional[Tuple[str, ...]] = None

    @property
    def is_finite(self) -> bool:
        return self.status is ClosureStatus.FINITE

    @property
    def order(self) -> Optional[int]:
        return len(self.elements) if self.is_finite else None


def semigroup_closure(generators: Sequence[RationalMatrix], cap: int,
                      labels: Optional[Sequence[str]] = None, progress: bool = False) -> ClosureResult:
    """Breadth-first product closure {X_w} with exact dedup

    Each discovered element keeps the first generator word reaching it.
    When the closure stabilizes within cap elements it is a finite group;
    identity and inverses are checked before returning, and the first
    non-empty word reaching the identity is kept.
    """
    n = check_generators(generators)
    if cap < 1:
        raise ValueError(f"cap must be at least 1, got {cap}")
    labels = list(labels) if labels is not None else [str(i) for i in range(len(generators))]
    logger.info(f"Running closure with cap {cap} over {len(generators)} generators")

    identity = RationalMatrix.identity(n)
    elements = [identity]
    words: List[Tuple[str, ...]] = [()]
    seen = {identity.key(): 0}
    identity_word: Optional[Tuple[str, ...]] = None
    head = 0
    bar = tqdm(total=cap, desc="Closure", disable=not progress)
    try:
        while head < len(elements):
            current, word = elements[head], words[head]
            head += 1
            for label, g in zip(labels, generators):
                product = mat_mul(current, g)
                key = product.key()
                if key in seen:
                    if identity_word is None and seen[key] == 0:
                        identity_word = word + (label,)
                    continue
                seen[key] = len(elements)
                elements.append(product)
                words.append(word + (label,))
                bar.update(1)
                if len(elements) > cap:
                    logger.warning(f"Closure exceeded cap {cap} after expanding {head} elements")
                    return ClosureResult(ClosureStatus.BUDGET_EXCEEDED, cap, explored=len(elements))
    finally:
        bar.close()

    if identity_word is None:
        raise QfaError("Closure stabilized without any non-empty product reaching the identity")
    for i, m in enumerate(elements):
        if m.transpose().key() not in seen:
            raise QfaError(f"Closure element {i} has no inverse in the element set")
    logger.info(f"Closure is a finite group of order {len(elements)}")
    return ClosureResult(ClosureStatus.FINITE, cap, elements=elements, words=words,
                         explored=len(elements), identity_word=identity_word)


@dataclass
class VanishingReport:
    passed: bool
    words_checked: int
    distinct_matrices: int
    polys_checked: int
    counterexample: Optional[Dict[str, object]] = None


def vanishing_report(basis: InvariantBasis, generators: Sequence[RationalMatrix], max_word_len: int,
                     labels: Optional[Sequence[str]] = None) -> VanishingReport:
    """Evaluate every basis polynomial at X_w for all words |w| <= max_word_len"""
    n = check_generators(generators)
    if n != basis.n:
        raise DimensionError(f"Basis over {basis.n}x{basis.n} matrices, generators are {n}x{n}")
    labels = list(labels) if labels is not None else [str(i) for i in range(len(generators))]
    level = [((), RationalMatrix.identity(n))]
    checked = {}
    words_checked = 0
    for length in range(max_word_len + 1):
        if length > 0:
            level = [(w + (lab,), mat_mul(m, g)) for w, m in level for lab, g in zip(labels, generators)]
        for word, m in level:
            words_checked += 1
            key = m.key()
            if key in checked:
                continue
            checked[key] = True
            for i, f in enumerate(basis.polys):
                val = evaluate(f, m)
                if val != 0:
                    logger.error(f"Basis polynomial {i} does not vanish at X_{''.join(word)}")
                    return VanishingReport(False, words_checked, len(checked), len(basis.polys), {
                        'word': list(word), 'poly_index': i, 'value': format_rational(val)})
    return VanishingReport(True, words_checked, len(checked), len(basis.polys))


def zero_set_check(basis: InvariantBasis, matrices: Sequence[RationalMatrix]) -> List[bool]:
    """For each matrix, whether all basis polynomials vanish there"""
    return [basis.vanishes_at(m) for m in matrices]
