from .errors import (
    QfaError,
    DimensionError,
    UnknownSymbolError,
    ValidationError,
    ReducedWordError,
    FormatError,
)
from .exactmath import (
    Rational,
    RationalVector,
    RationalMatrix,
    to_rational,
    parse_rational,
    format_rational,
    format_approx,
    mat_mul,
    row_apply,
    norm_sq,
    nullspace_basis,
    rank,
    determinant,
    inverse,
    block_diag,
    cayley_orthogonal,
)
from .automaton import (
    Qfa,
    Relation,
    ThresholdSpec,
    validate,
    word_matrix,
    value,
    bounded_search,
    iter_word_values,
    value_polynomial,
    parse_word,
    format_word,
)
from .invariant_algebra import (
    PolyQ,
    InvariantBasis,
    ClosureResult,
    monomial_basis,
    substitute_left,
    evaluate,
    invariant_basis,
    enumerate_invariants,
    in_span,
    semigroup_closure,
    vanishing_report,
    zero_set_check,
)
from .pcp_reduction import (
    PcpInstance,
    SignedLetter,
    FiveAdicForm,
    TwoMatrixSystem,
    rotation_generators,
    five_adic_form,
    reduce_signed_word,
    parse_signed_word,
    check_freeness_certificate,
    check_injectivity,
    encode_word,
    build_pcp_qfa,
    build_complement_qfa,
    pcp_solution_predicate,
    build_two_matrix_system,
    check_two_matrix_claim,
)
from .threshold_shift import (
    FourSquares,
    four_squares,
    shift_affine,
    verify_shift,
    language_check,
    PRESETS,
)
from .decision import (
    Verdict,
    VerdictKind,
    Budget,
    FormulaBackend,
    TrivialBoundsBackend,
    FiniteClosureBackend,
    decide,
    decide_strict_above,
    decide_strict_below,
    recheck_verdict,
    bounded_emptiness_table,
)

__all__ = [
    'QfaError',
    'DimensionError',
    'UnknownSymbolError',
    'ValidationError',
    'ReducedWordError',
    'FormatError',
    'Rational',
    'RationalVector',
    'RationalMatrix',
    'to_rational',
    'parse_rational',
    'format_rational',
    'format_approx',
    'mat_mul',
    'row_apply',
    'norm_sq',
    'nullspace_basis',
    'rank',
    'determinant',
    'inverse',
    'block_diag',
    'cayley_orthogonal',
    'Qfa',
    'Relation',
    'ThresholdSpec',
    'validate',
    'word_matrix',
    'value',
    'bounded_search',
    'iter_word_values',
    'value_polynomial',
    'parse_word',
    'format_word',
    'PolyQ',
    'InvariantBasis',
    'ClosureResult',
    'monomial_basis',
    'substitute_left',
    'evaluate',
    'invariant_basis',
    'enumerate_invariants',
    'in_span',
    'semigroup_closure',
    'vanishing_report',
    'zero_set_check',
    'PcpInstance',
    'SignedLetter',
    'FiveAdicForm',
    'TwoMatrixSystem',
    'rotation_generators',
    'five_adic_form',
    'reduce_signed_word',
    'parse_signed_word',
    'check_freeness_certificate',
    'check_injectivity',
    'encode_word',
    'build_pcp_qfa',
    'build_complement_qfa',
    'pcp_solution_predicate',
    'build_two_matrix_system',
    'check_two_matrix_claim',
    'FourSquares',
    'four_squares',
    'shift_affine',
    'verify_shift',
    'language_check',
    'PRESETS',
    'Verdict',
    'VerdictKind',
    'Budget',
    'FormulaBackend',
    'TrivialBoundsBackend',
    'FiniteClosureBackend',
    'decide',
    'decide_strict_above',
    'decide_strict_below',
    'recheck_verdict',
    'bounded_emptiness_table',
]
