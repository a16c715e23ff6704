import logging
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Optional, Tuple

import pandas as pd
from tabulate import tabulate

from .automaton import Word, format_word
from .config import DEFAULTS
from .decision import Verdict
from .exactmath import format_approx, format_rational, parse_rational
from .invariant_algebra import ClosureResult, InvariantBasis

logger = logging.getLogger(__name__)


def render_table(df: pd.DataFrame, tablefmt: str = 'github') -> str:
    return tabulate(df, headers='keys', tablefmt=tablefmt, showindex=False)


def add_approx_column(df: pd.DataFrame, column: str, digits: Optional[int]) -> pd.DataFrame:
    """Append '<column> (approx)' next to an exact "p/q" column; display only"""
    if digits is None or column not in df.columns:
        return df
    out = df.copy()
    out[f"{column} (approx)"] = [format_approx(parse_rational(x), digits) if x else '' for x in df[column]]
    return out


def save_results(df: pd.DataFrame, name: str, results_dir: Optional[str] = None) -> Path:
    """Save a report table as CSV under the results directory"""
    directory = Path(results_dir or DEFAULTS['results_dir'])
    directory.mkdir(parents=True, exist_ok=True)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    filename = directory / f"{name}_{timestamp}.csv"
    df.to_csv(filename, index=False)
    logger.info(f"Results saved to {filename}")
    return filename


def word_values_frame(rows: Iterable[Tuple[Word, Fraction]]) -> pd.DataFrame:
    return pd.DataFrame(
        [{'word': format_word(w), 'length': len(w), 'value': format_rational(v)} for w, v in rows],
        columns=['word', 'length', 'value'])


def render_value(q: Fraction, digits: Optional[int]) -> str:
    text = format_rational(q)
    if digits is not None:
        text += f"  (~{format_approx(q, digits)}, display only)"
    return text


def render_verdict(v: Verdict, digits: Optional[int] = None) -> str:
    lines = [f"Verdict: {v.kind.value} for Val {v.relation.value} {format_rational(v.lam)}"]
    if v.witness is not None:
        word, val = v.witness
        lines.append(f"Witness: {format_word(word)} with value {render_value(val, digits)}")
    cert = v.certificate or {}
    if cert.get('kind') == 'finite-closure':
        lines.append(f"Certificate: finite group of order {cert['group_order']}, "
                     f"extremum {render_value(cert['extremum'], digits)} "
                     f"at {format_word(cert['extremal_word'])}")
    elif cert.get('kind') == 'value-bound':
        lines.append(f"Certificate: every value is bounded by {format_rational(cert['bound'])}")
    elif cert.get('kind') == 'invariant-basis':
        dims = ', '.join(f"V_{d}={n}" for d, n in sorted(cert['dimensions'].items()))
        lines.append(f"Invariant evidence: {dims}")
    spent = ', '.join(f"{k}={val}" for k, val in v.budget_spent.items())
    lines.append(f"Budget spent: {spent}")
    lines.extend(f"Note: {d}" for d in v.diagnostics)
    return '\n'.join(lines)


def render_basis(basis: InvariantBasis) -> str:
    lines = [f"V_{basis.d} over {basis.n}x{basis.n} matrices: dimension {basis.dimension}"]
    lines.extend(f"  f{i + 1} = {f}" for i, f in enumerate(basis.polys))
    return '\n'.join(lines)


def render_closure(result: ClosureResult, max_listed: int = 20) -> str:
    if not result.is_finite:
        return f"Closure: budget exceeded (more than {result.cap} elements)"
    lines = [f"Closure: finite group of order {result.order}"]
    words: List[str] = [format_word(w) for w in result.words[:max_listed]]
    lines.append(f"Words: {', '.join(words)}" + (' ...' if result.order > max_listed else ''))
    return '\n'.join(lines)


def render_selftest(doc: Mapping[str, Any]) -> str:
    df = pd.DataFrame([{'check': c['name'], 'passed': c['passed'], 'error': c.get('error', '')}
                       for c in doc['checks']])
    return render_table(df) + f"\n\nSelftest: {'PASS' if doc['passed'] else 'FAIL'}"
