import numbers
import re
import logging
from decimal import Decimal, ROUND_HALF_EVEN, localcontext
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import DimensionError, FormatError

logger = logging.getLogger(__name__)

Rational = Fraction
RationalLike = Union[Fraction, int, str]

_RATIONAL_RE = re.compile(r'^\s*[+-]?\d+(\s*/\s*\d+)?\s*$')


def to_rational(value: RationalLike) -> Fraction:
    """Coerce an int, Fraction or "p/q" string to an exact Fraction"""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise FormatError(f"Expected a rational, got boolean {value!r}")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return parse_rational(value)
    # floats are refused: the trusted path never holds binary approximations
    raise FormatError(f"Expected int, Fraction or 'p/q' string, got {type(value).__name__}")


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" or "p" exactly"""
    if not _RATIONAL_RE.match(text):
        raise FormatError(f"Not an exact rational literal: {text!r}")
    try:
        return Fraction(text.replace(' ', ''))
    except ZeroDivisionError:
        raise FormatError(f"Zero denominator in {text!r}")


def format_rational(q: Fraction) -> str:
    """Serialize as "p/q", or "p" when q = 1"""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def format_approx(q: Fraction, digits: int) -> str:
    """Decimal rendering rounded half-to-even; display only"""
    with localcontext() as ctx:
        ctx.prec = max(28, digits + len(str(abs(q.numerator) // q.denominator)) + 5)
        d = Decimal(q.numerator) / Decimal(q.denominator)
        return str(d.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))


class RationalVector:
    """Immutable exact row vector"""

    __slots__ = ('_entries',)

    def __init__(self, entries: Iterable[RationalLike]):
        values = tuple(to_rational(e) for e in entries)
        if not values:
            raise DimensionError("A vector needs at least one entry")
        self._entries = values

    @classmethod
    def zeros(cls, length: int) -> 'RationalVector':
        return cls([0] * length)

    @property
    def entries(self) -> Tuple[Fraction, ...]:
        return self._entries

    @property
    def length(self) -> int:
        return len(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self._entries)

    def __getitem__(self, i):
        return self._entries[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalVector) and self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __repr__(self) -> str:
        return f"RationalVector([{', '.join(format_rational(e) for e in self._entries)}])"

    def __add__(self, other: 'RationalVector') -> 'RationalVector':
        if self.length != other.length:
            raise DimensionError(f"Cannot add vectors of length {self.length} and {other.length}")
        return RationalVector(a + b for a, b in zip(self._entries, other._entries))

    def __sub__(self, other: 'RationalVector') -> 'RationalVector':
        if self.length != other.length:
            raise DimensionError(f"Cannot subtract vectors of length {self.length} and {other.length}")
        return RationalVector(a - b for a, b in zip(self._entries, other._entries))

    def scale(self, c: RationalLike) -> 'RationalVector':
        c = to_rational(c)
        return RationalVector(c * e for e in self._entries)

    def concat(self, other: 'RationalVector') -> 'RationalVector':
        return RationalVector(self._entries + other._entries)

    def is_zero(self) -> bool:
        return all(e == 0 for e in self._entries)

    def key(self) -> str:
        """Canonical serialization, usable as a set key"""
        return ','.join(format_rational(e) for e in self._entries)


class RationalMatrix:
    """Immutable dense exact matrix stored row-major"""

    __slots__ = ('_rows', '_nrows', '_ncols')

    def __init__(self, rows: Iterable[Iterable[RationalLike]]):
        grid = tuple(tuple(to_rational(e) for e in row) for row in rows)
        if not grid or not grid[0]:
            raise DimensionError("A matrix needs at least one row and one column")
        width = len(grid[0])
        for i, row in enumerate(grid):
            if len(row) != width:
                raise DimensionError(f"Row {i} has {len(row)} entries, expected {width}")
        self._rows = grid
        self._nrows = len(grid)
        self._ncols = width

    @classmethod
    def _trusted(cls, grid: Tuple[Tuple[Fraction, ...], ...]) -> 'RationalMatrix':
        # skips coercion for grids built internally from Fractions
        m = cls.__new__(cls)
        m._rows = grid
        m._nrows = len(grid)
        m._ncols = len(grid[0])
        return m

    @classmethod
    def identity(cls, n: int) -> 'RationalMatrix':
        one, zero = Fraction(1), Fraction(0)
        return cls._trusted(tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> 'RationalMatrix':
        zero = Fraction(0)
        return cls._trusted(tuple(tuple(zero for _ in range(cols)) for _ in range(rows)))

    @classmethod
    def diagonal(cls, entries: Sequence[RationalLike]) -> 'RationalMatrix':
        values = [to_rational(e) for e in entries]
        n = len(values)
        zero = Fraction(0)
        return cls._trusted(tuple(tuple(values[i] if i == j else zero for j in range(n)) for i in range(n)))

    @property
    def rows(self) -> int:
        return self._nrows

    @property
    def cols(self) -> int:
        return self._ncols

    @property
    def entries(self) -> Tuple[Tuple[Fraction, ...], ...]:
        return self._rows

    @property
    def is_square(self) -> bool:
        return self._nrows == self._ncols

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self._rows[i][j]

    def row(self, i: int) -> RationalVector:
        return RationalVector(self._rows[i])

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalMatrix) and self._rows == other._rows

    def __hash__(self) -> int:
        return hash(self._rows)

    def __repr__(self) -> str:
        body = '; '.join(' '.join(format_rational(e) for e in row) for row in self._rows)
        return f"RationalMatrix([{body}])"

    def __matmul__(self, other: 'RationalMatrix') -> 'RationalMatrix':
        return mat_mul(self, other)

    def __add__(self, other: 'RationalMatrix') -> 'RationalMatrix':
        self._check_same_shape(other)
        return RationalMatrix._trusted(tuple(
            tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self._rows, other._rows)))

    def __sub__(self, other: 'RationalMatrix') -> 'RationalMatrix':
        self._check_same_shape(other)
        return RationalMatrix._trusted(tuple(
            tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(self._rows, other._rows)))

    def _check_same_shape(self, other: 'RationalMatrix'):
        if (self._nrows, self._ncols) != (other._nrows, other._ncols):
            raise DimensionError(
                f"Shape mismatch: {self._nrows}x{self._ncols} vs {other._nrows}x{other._ncols}")

    def scale(self, c: RationalLike) -> 'RationalMatrix':
        c = to_rational(c)
        return RationalMatrix._trusted(tuple(tuple(c * e for e in row) for row in self._rows))

    def transpose(self) -> 'RationalMatrix':
        return RationalMatrix._trusted(tuple(zip(*self._rows)))

    @property
    def T(self) -> 'RationalMatrix':
        return self.transpose()

    def is_orthogonal(self) -> bool:
        """Exact test of X X^T = I"""
        if not self.is_square:
            return False
        return mat_mul(self, self.transpose()) == RationalMatrix.identity(self._nrows)

    def is_projection(self) -> bool:
        """Exact test of P^2 = P and P^T = P"""
        if not self.is_square:
            return False
        return self.transpose() == self and mat_mul(self, self) == self

    def key(self) -> str:
        """Canonical serialization, usable as a set key"""
        return ';'.join(','.join(format_rational(e) for e in row) for row in self._rows)

    def to_lists(self) -> List[List[str]]:
        return [[format_rational(e) for e in row] for row in self._rows]


def mat_mul(a: RationalMatrix, b: RationalMatrix) -> RationalMatrix:
    """Exact matrix product"""
    if a.cols != b.rows:
        raise DimensionError(f"Cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    b_cols = tuple(zip(*b.entries))
    zero = Fraction(0)
    grid = []
    for row in a.entries:
        nz = [(k, x) for k, x in enumerate(row) if x]
        grid.append(tuple(sum((x * col[k] for k, x in nz), zero) for col in b_cols))
    return RationalMatrix._trusted(tuple(grid))


def row_apply(v: RationalVector, m: RationalMatrix) -> RationalVector:
    """Exact row-vector times matrix"""
    if v.length != m.rows:
        raise DimensionError(f"Cannot apply a {m.rows}x{m.cols} matrix to a vector of length {v.length}")
    zero = Fraction(0)
    nz = [(k, x) for k, x in enumerate(v.entries) if x]
    result = [zero] * m.cols
    grid = m.entries
    for k, x in nz:
        row = grid[k]
        for j in range(m.cols):
            if row[j]:
                result[j] += x * row[j]
    vec = RationalVector.__new__(RationalVector)
    vec._entries = tuple(result)
    return vec


def norm_sq(v: RationalVector) -> Fraction:
    """Exact sum of squares"""
    return sum((e * e for e in v.entries), Fraction(0))


def block_diag(blocks: Sequence[RationalMatrix]) -> RationalMatrix:
    """Block-diagonal matrix from square or rectangular blocks"""
    total_cols = sum(b.cols for b in blocks)
    zero = Fraction(0)
    grid = []
    offset = 0
    for b in blocks:
        for row in b.entries:
            grid.append((zero,) * offset + row + (zero,) * (total_cols - offset - b.cols))
        offset += b.cols
    return RationalMatrix._trusted(tuple(grid))


def from_blocks(blocks: Sequence[Sequence[RationalMatrix]]) -> RationalMatrix:
    """Assemble a matrix from a grid of equally sized blocks"""
    grid = []
    for block_row in blocks:
        height = block_row[0].rows
        for b in block_row:
            if b.rows != height:
                raise DimensionError("Blocks in one block row must have equal heights")
        for i in range(height):
            grid.append(tuple(e for b in block_row for e in b.entries[i]))
    return RationalMatrix(grid)


def _rref(rows: List[List[Fraction]], ncols: int) -> Tuple[List[List[Fraction]], List[int]]:
    # Gauss-Jordan; the pivot is the first nonzero entry in column order
    m = [list(r) for r in rows]
    pivots = []
    piv_r = 0
    for piv_c in range(ncols):
        if piv_r == len(m):
            break
        for i_row in range(piv_r, len(m)):
            if m[i_row][piv_c] != 0:
                break
        else:
            continue
        if i_row != piv_r:
            m[piv_r], m[i_row] = m[i_row], m[piv_r]
        fp = m[piv_r][piv_c]
        if fp != 1:
            m[piv_r] = [x / fp for x in m[piv_r]]
        pivot_row = m[piv_r]
        nz_cols = [c for c in range(piv_c, ncols) if pivot_row[c]]
        for r in range(len(m)):
            if r == piv_r:
                continue
            fr = m[r][piv_c]
            if fr == 0:
                continue
            row = m[r]
            for c in nz_cols:
                row[c] -= fr * pivot_row[c]
        pivots.append(piv_c)
        piv_r += 1
    return m[:len(pivots)], pivots


def rref(m: RationalMatrix) -> Tuple[RationalMatrix, List[int]]:
    """Reduced row echelon form and pivot columns"""
    reduced, pivots = _rref([list(r) for r in m.entries], m.cols)
    if not reduced:
        return RationalMatrix.zeros(1, m.cols), []
    return RationalMatrix(reduced), pivots


def rank(m: RationalMatrix) -> int:
    return len(_rref([list(r) for r in m.entries], m.cols)[1])


def clear_denominators(values: Sequence[Fraction]) -> List[Fraction]:
    """Scale by the LCM of denominators, then divide by the GCD of numerators"""
    lcm = 1
    for v in values:
        lcm = lcm * v.denominator // gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in values]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        return [Fraction(0)] * len(values)
    return [Fraction(x // g) for x in ints]


def nullspace_from_rows(rows: List[List[Fraction]], ncols: int) -> List[RationalVector]:
    reduced, pivots = _rref(rows, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [Fraction(0)] * ncols
        vec[free] = Fraction(1)
        for r, c in enumerate(pivots):
            if c < free:
                vec[c] = -reduced[r][free]
        lead = next(x for x in vec if x)
        if lead < 0:
            vec = [-x for x in vec]
        basis.append(RationalVector(clear_denominators(vec)))
    return basis


def nullspace_basis(m: RationalMatrix) -> List[RationalVector]:
    """Canonical integer basis of the right nullspace over Q

    One vector per non-pivot column of the reduced echelon form, in column
    order; each vector is scaled to coprime integers with its first nonzero
    coordinate positive.
    """
    basis = nullspace_from_rows([list(r) for r in m.entries], m.cols)
    logger.debug(f"Nullspace of {m.rows}x{m.cols} matrix has dimension {len(basis)}")
    return basis


def determinant(m: RationalMatrix) -> Fraction:
    if not m.is_square:
        raise DimensionError(f"Determinant of non-square {m.rows}x{m.cols} matrix")
    a = [list(r) for r in m.entries]
    n = m.rows
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if a[r][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            if f:
                for k in range(c, n):
                    a[r][k] -= f * a[c][k]
    return det


def inverse(m: RationalMatrix) -> RationalMatrix:
    """Gauss-Jordan inverse; raises DimensionError when singular"""
    if not m.is_square:
        raise DimensionError(f"Inverse of non-square {m.rows}x{m.cols} matrix")
    n = m.rows
    augmented = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m.entries)]
    reduced, pivots = _rref(augmented, 2 * n)
    if pivots[:n] != list(range(n)) or len(reduced) < n:
        raise DimensionError("Matrix is singular")
    return RationalMatrix(row[n:] for row in reduced[:n])


def cayley_orthogonal(skew: RationalMatrix) -> RationalMatrix:
    """Rational orthogonal matrix (I - S)(I + S)^-1 for skew-symmetric S"""
    if skew.transpose() != skew.scale(-1):
        raise DimensionError("Cayley transform needs a skew-symmetric matrix")
    ident = RationalMatrix.identity(skew.rows)
    return mat_mul(ident - skew, inverse(ident + skew))


def matrix_from_lists(rows: Sequence[Sequence[RationalLike]], name: Optional[str] = None) -> RationalMatrix:
    try:
        return RationalMatrix(rows)
    except FormatError as e:
        raise FormatError(f"{name or 'matrix'}: {e}") from e
