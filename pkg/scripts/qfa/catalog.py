"""Reference automata and PCP instances used by the selftest, the CLI and the tests."""

from fractions import Fraction
from typing import Dict, List, Tuple

from .automaton import Qfa, make_qfa
from .exactmath import RationalMatrix, RationalVector
from .pcp_reduction import PcpInstance, rotation_generators


def rotation_automaton() -> Qfa:
    """A*: one letter acting as X_a, s = (3/5, 0, 4/5), P = diag(0, 1, 0)"""
    x_a, _ = rotation_generators()
    return Qfa(('a',), {'a': x_a}, RationalVector(['3/5', 0, '4/5']), RationalMatrix.diagonal([0, 1, 0]))


def c4_automaton() -> Qfa:
    """Quarter-turn rotation, s = (1, 0), P = diag(1, 0); the closure is cyclic of order 4"""
    return make_qfa(('a',), {'a': [[0, -1], [1, 0]]}, [1, 0], [[1, 0], [0, 0]])


def free_pair_automaton() -> Qfa:
    """Both rotation generators, s = (3/5, 0, 4/5), P = diag(0, 1, 0)"""
    x_a, x_b = rotation_generators()
    return Qfa(('a', 'b'), {'a': x_a, 'b': x_b}, RationalVector(['3/5', 0, '4/5']),
               RationalMatrix.diagonal([0, 1, 0]))


def pcp(*pairs: Tuple[str, str]) -> PcpInstance:
    return PcpInstance(tuple(pairs))


# instance -> a planted solution
PLANTED_INSTANCES: List[Tuple[PcpInstance, str]] = [
    (pcp(('a', 'aa'), ('aa', 'a')), '12'),
    (pcp(('a', 'a')), '1'),
    (pcp(('ab', 'a'), ('b', 'bb')), '12'),
    (pcp(('a', 'ab'), ('ba', 'a')), '12'),
    (pcp(('ab', 'a'), ('b', 'bb'), ('a', 'b')), '12'),
]

# every u_i shorter than v_i, or first letters that never agree
SOLUTION_FREE_INSTANCES: List[PcpInstance] = [
    pcp(('a', 'b')),
    pcp(('a', 'aa'), ('a', 'aaa')),
    pcp(('a', 'ab'), ('b', 'ba')),
    pcp(('b', 'ab'), ('ab', 'bab'), ('a', 'aa')),
    pcp(('a', 'b'), ('ab', 'ba')),
]

# k in {1, 2}, with and without zero-value words
TWO_MATRIX_INSTANCES: Dict[str, PcpInstance] = {
    'k1-solvable': pcp(('a', 'a')),
    'k1-solution-free': pcp(('a', 'b')),
    'k2-solvable': pcp(('a', 'aa'), ('aa', 'a')),
    'k2-solution-free': pcp(('a', 'aa'), ('a', 'aaa')),
}

SHIFT_THRESHOLDS = [Fraction(0), Fraction(1, 2), Fraction(3, 7), Fraction(9, 10), Fraction(1)]
