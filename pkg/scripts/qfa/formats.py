"""
JSON artifacts: automata, PCP instances, invariant bases, closures and verdicts.

Rationals are always written as "p/q" strings (or "p" when q = 1), so every
document re-loads bit-exactly. Documents emitted with --json carry a schema
stamp.
"""

import json
import logging
from dataclasses import asdict, is_dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np

from .automaton import Qfa, Relation, ensure_valid, format_word, parse_word
from .decision import Verdict, VerdictKind
from .errors import FormatError, QfaError
from .exactmath import RationalMatrix, RationalVector, format_rational, matrix_from_lists, to_rational
from .invariant_algebra import ClosureResult, ClosureStatus, InvariantBasis, PolyQ, variable_name
from .pcp_reduction import PcpInstance, TwoMatrixSystem

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 'qfa-toolkit/1'

PathLike = Union[str, Path]


def jsonable(obj: Any) -> Any:
    """Recursively convert to JSON-ready values; Fractions become "p/q" strings"""
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, RationalMatrix):
        return obj.to_lists()
    if isinstance(obj, RationalVector):
        return [format_rational(x) for x in obj.entries]
    if is_dataclass(obj) and not isinstance(obj, type):
        return jsonable(asdict(obj))
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return obj


def dumps(doc: Dict[str, Any]) -> str:
    """Deterministic rendering with the schema stamp"""
    stamped = dict(jsonable(doc))
    stamped['schema'] = SCHEMA_VERSION
    return json.dumps(stamped, sort_keys=True, indent=2, ensure_ascii=False)


def write_json(doc: Dict[str, Any], path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc) + '\n', encoding='utf-8')
    logger.info(f"Wrote {path}")


def read_json(path: PathLike) -> Dict[str, Any]:
    try:
        with open(path, encoding='utf-8') as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: malformed JSON ({e})") from e
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: expected a JSON object at top level")
    schema = doc.get('schema')
    if schema is not None and schema != SCHEMA_VERSION:
        logger.warning(f"{path}: schema {schema!r} differs from {SCHEMA_VERSION!r}")
    return doc


def _require(doc: Mapping[str, Any], key: str, kind: str) -> Any:
    if key not in doc:
        raise FormatError(f"{kind} document is missing {key!r}")
    return doc[key]


def _matrix(value: Any, name: str) -> RationalMatrix:
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise FormatError(f"{name} must be a list of rows")
    return matrix_from_lists(value, name)


def _vector(value: Any, name: str) -> RationalVector:
    if not isinstance(value, list):
        raise FormatError(f"{name} must be a list")
    return RationalVector(value)


def qfa_to_dict(a: Qfa) -> Dict[str, Any]:
    return {
        'alphabet': list(a.alphabet),
        'n': a.n,
        'transitions': {s: a.transitions[s].to_lists() for s in a.alphabet},
        'initial': [format_rational(x) for x in a.initial.entries],
        'projection': a.projection.to_lists(),
    }


def qfa_from_dict(doc: Mapping[str, Any], validate: bool = True) -> Qfa:
    alphabet = _require(doc, 'alphabet', 'automaton')
    transitions = _require(doc, 'transitions', 'automaton')
    if not isinstance(alphabet, list) or not isinstance(transitions, dict):
        raise FormatError("automaton 'alphabet' must be a list and 'transitions' an object")
    a = Qfa(
        alphabet,
        {str(s): _matrix(m, f"transition {s!r}") for s, m in transitions.items()},
        _vector(_require(doc, 'initial', 'automaton'), 'initial'),
        _matrix(_require(doc, 'projection', 'automaton'), 'projection'),
    )
    if 'n' in doc and doc['n'] != a.n:
        raise FormatError(f"declared n={doc['n']} but the initial vector has length {a.n}")
    if validate:
        ensure_valid(a)
    return a


def load_qfa(path: PathLike, validate: bool = True) -> Qfa:
    a = qfa_from_dict(read_json(path), validate=validate)
    logger.info(f"Loaded {a} from {path}")
    return a


def dump_qfa(a: Qfa, path: PathLike):
    write_json(qfa_to_dict(a), path)


def pcp_to_dict(p: PcpInstance) -> Dict[str, Any]:
    return {'pairs': [list(pair) for pair in p.pairs]}


def pcp_from_dict(doc: Mapping[str, Any]) -> PcpInstance:
    pairs = _require(doc, 'pairs', 'PCP instance')
    if not isinstance(pairs, list) or not all(isinstance(x, list) and len(x) == 2 for x in pairs):
        raise FormatError("'pairs' must be a list of [u, v] word pairs")
    return PcpInstance(tuple((str(u), str(v)) for u, v in pairs))


def load_pcp_instance(path: PathLike) -> PcpInstance:
    return pcp_from_dict(read_json(path))


def poly_to_dict(f: PolyQ) -> Dict[str, Any]:
    return {
        'terms': [[list(m), format_rational(c)] for m, c in f.sorted_terms()],
        'text': str(f),
    }


def poly_from_dict(n: int, doc: Mapping[str, Any]) -> PolyQ:
    terms = {}
    for mono, coef in _require(doc, 'terms', 'polynomial'):
        if len(mono) != n * n:
            raise FormatError(f"monomial {mono} has {len(mono)} exponents, expected {n * n}")
        terms[tuple(int(e) for e in mono)] = to_rational(coef)
    return PolyQ(n, terms)


def basis_to_dict(basis: InvariantBasis) -> Dict[str, Any]:
    return {
        'n': basis.n,
        'degree': basis.d,
        'dimension': basis.dimension,
        'generator_fingerprint': basis.generator_fingerprint,
        'variables': [variable_name(basis.n, i) for i in range(basis.n * basis.n)],
        'polys': [poly_to_dict(f) for f in basis.polys],
    }


def basis_from_dict(doc: Mapping[str, Any]) -> InvariantBasis:
    n = int(_require(doc, 'n', 'basis'))
    return InvariantBasis(
        n=n,
        d=int(_require(doc, 'degree', 'basis')),
        polys=[poly_from_dict(n, p) for p in _require(doc, 'polys', 'basis')],
        generator_fingerprint=str(_require(doc, 'generator_fingerprint', 'basis')),
    )


def closure_to_dict(result: ClosureResult, include_elements: bool = True) -> Dict[str, Any]:
    doc = {
        'status': result.status.value,
        'cap': result.cap,
        'explored': result.explored,
        'order': result.order,
    }
    if result.is_finite:
        doc['words'] = [format_word(w) for w in result.words]
        doc['identity_word'] = format_word(result.identity_word) if result.identity_word else None
        if include_elements:
            doc['elements'] = [m.to_lists() for m in result.elements]
    return doc


def closure_from_dict(doc: Mapping[str, Any]) -> ClosureResult:
    try:
        status = ClosureStatus(_require(doc, 'status', 'closure'))
    except ValueError as e:
        raise FormatError(str(e)) from e
    identity_word = doc.get('identity_word')
    return ClosureResult(
        status=status,
        cap=int(_require(doc, 'cap', 'closure')),
        elements=[_matrix(m, 'closure element') for m in doc.get('elements', [])],
        words=[parse_word(w) for w in doc.get('words', [])],
        explored=int(doc.get('explored', 0)),
        identity_word=parse_word(identity_word) if identity_word is not None else None,
    )


def two_matrix_to_dict(system: TwoMatrixSystem) -> Dict[str, Any]:
    return {
        'k': system.k,
        'dimension': system.dimension,
        'z0': system.z0.to_lists(),
        'z1': system.z1.to_lists(),
        'x': [format_rational(c) for c in system.x.entries],
        'q': system.q.to_lists(),
    }


def two_matrix_from_dict(doc: Mapping[str, Any]) -> TwoMatrixSystem:
    system = TwoMatrixSystem(
        z0=_matrix(_require(doc, 'z0', 'two-matrix'), 'z0'),
        z1=_matrix(_require(doc, 'z1', 'two-matrix'), 'z1'),
        x=_vector(_require(doc, 'x', 'two-matrix'), 'x'),
        q=_matrix(_require(doc, 'q', 'two-matrix'), 'q'),
        k=int(_require(doc, 'k', 'two-matrix')),
    )
    if system.z0.rows != 6 * system.k:
        raise FormatError(f"declared k={system.k} but Z0 has dimension {system.z0.rows}")
    return system


def load_two_matrix(path: PathLike) -> TwoMatrixSystem:
    return two_matrix_from_dict(read_json(path))


def verdict_to_dict(v: Verdict) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        'verdict': v.kind.value,
        'relation': v.relation.value,
        'lambda': format_rational(v.lam),
        'witness': None,
        'certificate': jsonable(v.certificate),
        'budget_spent': dict(v.budget_spent),
        'diagnostics': list(v.diagnostics),
    }
    if v.witness is not None:
        word, val = v.witness
        doc['witness'] = {'word': list(word), 'text': format_word(word), 'value': format_rational(val)}
    return doc


def _certificate_from_dict(cert: Optional[Mapping[str, Any]]) -> Optional[Dict[str, Any]]:
    if cert is None:
        return None
    out = dict(cert)
    for key in ('extremum', 'bound'):
        if key in out:
            out[key] = to_rational(out[key])
    if 'words' in out:
        out['words'] = [tuple(w) for w in out['words']]
    if 'extremal_word' in out:
        out['extremal_word'] = tuple(out['extremal_word'])
    return out


def verdict_from_dict(doc: Mapping[str, Any]) -> Verdict:
    try:
        kind = VerdictKind(_require(doc, 'verdict', 'verdict'))
        relation = Relation.parse(_require(doc, 'relation', 'verdict'))
    except ValueError as e:
        if isinstance(e, QfaError):
            raise
        raise FormatError(str(e)) from e
    witness = None
    if doc.get('witness'):
        w = doc['witness']
        witness = (tuple(w['word']), to_rational(w['value']))
    return Verdict(
        kind=kind,
        relation=relation,
        lam=to_rational(_require(doc, 'lambda', 'verdict')),
        witness=witness,
        certificate=_certificate_from_dict(doc.get('certificate')),
        budget_spent=dict(doc.get('budget_spent', {})),
        diagnostics=list(doc.get('diagnostics', [])),
    )
