#!/usr/bin/env python3
"""
QFA Runner - command-line front end for the threshold toolkit
"""

import click
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add the parent directory to path to import the package
sys.path.append(str(Path(__file__).parent.parent))

from scripts.qfa import (
    Budget,
    QfaError,
    Relation,
    ThresholdSpec,
    bounded_emptiness_table,
    bounded_search,
    build_complement_qfa,
    build_pcp_qfa,
    build_two_matrix_system,
    check_freeness_certificate,
    check_injectivity,
    check_two_matrix_claim,
    decide,
    format_rational,
    format_word,
    invariant_basis,
    parse_word,
    pcp_solution_predicate,
    recheck_verdict,
    semigroup_closure,
    shift_affine,
    to_rational,
    validate,
    value,
    vanishing_report,
    verify_shift,
)
from scripts.qfa.config import DEFAULTS, configure_logging, progress_enabled
from scripts.qfa.formats import (
    basis_to_dict,
    closure_to_dict,
    dump_qfa,
    dumps,
    load_pcp_instance,
    load_qfa,
    qfa_from_dict,
    qfa_to_dict,
    read_json,
    two_matrix_to_dict,
    verdict_from_dict,
    verdict_to_dict,
    write_json,
)
from scripts.qfa.reports import (
    add_approx_column,
    render_basis,
    render_closure,
    render_selftest,
    render_table,
    render_value,
    render_verdict,
    save_results,
    word_values_frame,
)
from scripts.qfa.selftest import run_selftest
from scripts.qfa.threshold_shift import PRESETS, preset_parameters

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70


class RationalParam(click.ParamType):
    """Exact "p/q" literal"""
    name = 'rational'

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return to_rational(str(value))
        except QfaError as e:
            self.fail(str(e), param, ctx)


RATIONAL = RationalParam()
RELATIONS = [r.value for r in Relation]


def json_option(f):
    return click.option('--json', 'as_json', is_flag=True, help='Emit a machine-readable JSON document')(f)


def output_options(f):
    f = click.option('--approx', type=click.IntRange(0, 60), default=None,
                     help='Also show decimal approximations with this many digits (display only)')(f)
    return json_option(f)


def qfa_input(f):
    f = click.option('--no-validate', is_flag=True, help='Accept automata that fail validation')(f)
    f = click.option('--in', 'in_path', type=click.Path(exists=True, dir_okay=False), required=True,
                     help='Automaton JSON file')(f)
    return f


def emit(as_json: bool, doc: Dict[str, Any], text: str):
    click.echo(dumps(doc) if as_json else text)


@click.group()
@click.option('--log-level', type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
              default=None, help='Logging level (default from QFA_LOG_LEVEL)')
@click.option('--threads', type=click.IntRange(1, 256), default=None,
              help='Worker threads for word enumeration (default single-threaded)')
@click.option('--progress/--no-progress', default=None, help='Show progress bars on stderr')
@click.pass_context
def cli(ctx, log_level, threads, progress):
    """Exact toolkit for measure-once quantum finite automata"""
    configure_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj['threads'] = threads or DEFAULTS['threads']
    ctx.obj['progress'] = progress_enabled() if progress is None else progress


@cli.command('eval')
@qfa_input
@click.option('--word', 'words', multiple=True, required=True, help="Word to evaluate ('' or eps for the empty word)")
@output_options
def eval_cmd(in_path, no_validate, words, as_json, approx):
    """Exact value ||s X_w P||^2 of each word"""
    a = load_qfa(in_path, validate=not no_validate)
    rows = [(w, value(a, w)) for w in (parse_word(text) for text in words)]
    if len(rows) == 1 and not as_json:
        click.echo(render_value(rows[0][1], approx))
        return EXIT_OK
    df = add_approx_column(word_values_frame(rows), 'value', approx)
    emit(as_json, {'values': df.to_dict(orient='records')}, render_table(df))
    return EXIT_OK


@cli.command()
@qfa_input
@click.option('--lambda', 'lam', type=RATIONAL, required=True, help='Threshold')
@click.option('--relation', type=click.Choice(RELATIONS), default='>', show_default=True)
@click.option('--max-len', type=click.IntRange(0), default=DEFAULTS['budget']['max_word_len'], show_default=True)
@click.option('--include-empty/--exclude-empty', default=True, show_default=True)
@output_options
@click.pass_context
def search(ctx, in_path, no_validate, lam, relation, max_len, include_empty, as_json, approx):
    """Length-lexicographically first word in the threshold language"""
    a = load_qfa(in_path, validate=not no_validate)
    found = bounded_search(a, ThresholdSpec(lam, Relation.parse(relation)), max_len,
                           include_empty=include_empty, threads=ctx.obj['threads'], progress=ctx.obj['progress'])
    doc = {'relation': relation, 'lambda': lam, 'max_len': max_len, 'found': found is not None,
           'word': list(found[0]) if found else None, 'value': found[1] if found else None}
    if found:
        text = f"Witness: {format_word(found[0])} with value {render_value(found[1], approx)}"
    else:
        text = f"No word of length <= {max_len} has value {relation} {format_rational(lam)}"
    emit(as_json, doc, text)
    return EXIT_OK


@cli.command('reduce-pcp')
@click.option('--instance', 'instance_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None, help='Write the automaton here')
@click.option('--complement', is_flag=True, help='Measure with I - P: value 1 exactly on solutions')
@click.option('--check', 'check_words', multiple=True, help='Index word to test as a solution')
@output_options
def reduce_pcp(instance_path, out_path, complement, check_words, as_json, approx):
    """Build the six-dimensional automaton of a PCP instance"""
    p = load_pcp_instance(instance_path)
    a = build_complement_qfa(p) if complement else build_pcp_qfa(p)
    if out_path:
        dump_qfa(a, out_path)
    checks = []
    base = build_pcp_qfa(p)
    for text in check_words:
        result = pcp_solution_predicate(p, parse_word(text), base)
        checks.append({'word': text, 'is_solution': result.is_solution, 'u': result.u_word,
                       'v': result.v_word, 'value': result.value, 'agrees': result.agrees})
    doc = {'k': p.k, 'complement': complement, 'automaton': qfa_to_dict(a), 'checks': checks}
    lines = [f"PCP automaton: {p.k} letters, dimension {a.n}" + (f", written to {out_path}" if out_path else '')]
    for c in checks:
        lines.append(f"{c['word']}: u={c['u']} v={c['v']} solution={c['is_solution']} "
                     f"value={render_value(c['value'], approx)}")
    emit(as_json, doc, '\n'.join(lines))
    return EXIT_OK if all(c['agrees'] for c in checks) else EXIT_DATA


@cli.command('two-matrix')
@click.option('--instance', 'instance_path', type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None, help='Write the system here')
@click.option('--check/--no-check', default=False, help='Compare zero-value witnesses on both sides')
@click.option('--max-len-w', type=click.IntRange(1), default=4, show_default=True)
@click.option('--max-len-nu', type=click.IntRange(1), default=None, help='Default 20k')
@json_option
def two_matrix(instance_path, out_path, check, max_len_w, max_len_nu, as_json):
    """Pack a PCP instance into two orthogonal matrices of dimension 6k"""
    p = load_pcp_instance(instance_path)
    system = build_two_matrix_system(p)
    if out_path:
        write_json(two_matrix_to_dict(system), out_path)
    doc: Dict[str, Any] = {'k': p.k, 'dimension': system.dimension}
    lines = [f"Two-matrix system: k={p.k}, dimension {system.dimension}"]
    if check:
        report = check_two_matrix_claim(p, max_len_w, max_len_nu or 20 * p.k)
        doc['check'] = {
            'w_witness': format_word(report.w_witness) if report.w_witness else None,
            'nu_witness': report.nu_witness,
            'nu_index_word': format_word(report.nu_index_word) if report.nu_index_word else None,
            'nu_value': report.nu_value,
            'nu_states': report.nu_states,
            'nu_truncated': report.nu_truncated,
            'literal_nu_witness': report.literal_nu_witness,
            'agree': report.agree,
        }
        lines.append(f"w witness (|w| <= {max_len_w}): {doc['check']['w_witness']}")
        lines.append(f"nu witness: {report.nu_witness} selecting {doc['check']['nu_index_word']}")
        lines.append(f"Agree: {report.agree}")
    emit(as_json, doc, '\n'.join(lines))
    return EXIT_OK


@cli.command()
@click.option('--max-len', type=click.IntRange(1), default=DEFAULTS['freeness_max_len'], show_default=True)
@click.option('--injectivity', type=click.IntRange(0), default=None,
              help='Also check t X_u is injective on reduced words up to this length')
@json_option
@click.pass_context
def freeness(ctx, max_len, injectivity, as_json):
    """5-adic certificate that X_a and X_b generate a free group"""
    report = check_freeness_certificate(max_len, progress=ctx.obj['progress'])
    doc: Dict[str, Any] = {'max_len': max_len, 'words_checked': report.words_checked, 'passed': report.passed,
                           'first_failure': report.first_failure}
    if report.passed:
        text = f"all reduced words pass: {report.words_checked} words of length 1..{max_len}"
    else:
        text = f"certificate fails at {report.first_failure}"
    passed = report.passed
    if injectivity is not None:
        inj = check_injectivity(injectivity)
        doc['injectivity'] = {'max_len': injectivity, 'words_checked': inj.words_checked,
                              'collision': list(inj.collision) if inj.collision else None}
        text += f"\ninjectivity up to length {injectivity}: " + ('ok' if inj.passed else f"collision {inj.collision}")
        passed = passed and inj.passed
    emit(as_json, doc, text)
    return EXIT_OK if passed else 1


@cli.command()
@qfa_input
@click.option('--alpha', type=RATIONAL, default=None)
@click.option('--beta', type=RATIONAL, default=None)
@click.option('--preset', type=click.Choice(sorted(PRESETS)), default=None)
@click.option('--lambda', 'lam', type=RATIONAL, default=None, help='Threshold for --preset')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None)
@click.option('--verify', 'verify_len', type=click.IntRange(0), default=None,
              help='Check the value identity on all words up to this length')
@json_option
def shift(in_path, no_validate, alpha, beta, preset, lam, out_path, verify_len, as_json):
    """Embed an automaton so that Val_B = alpha Val_A + beta"""
    if preset:
        if lam is None or alpha is not None or beta is not None:
            raise click.UsageError('--preset needs --lambda and excludes --alpha/--beta')
        alpha, beta = preset_parameters(preset, lam)
    elif alpha is None:
        raise click.UsageError('give --alpha [--beta] or --preset with --lambda')
    beta = beta if beta is not None else Fraction(0)
    a = load_qfa(in_path, validate=not no_validate)
    b = shift_affine(a, alpha, beta)
    if out_path:
        dump_qfa(b, out_path)
    doc: Dict[str, Any] = {'alpha': alpha, 'beta': beta, 'dimension': b.n, 'automaton': qfa_to_dict(b)}
    lines = [f"Shifted automaton: dimension {b.n}, Val_B = {format_rational(alpha)} Val_A + {format_rational(beta)}"]
    passed = True
    if verify_len is not None:
        report = verify_shift(a, b, alpha, beta, verify_len)
        passed = report.passed
        doc['verify'] = {'words_checked': report.words_checked, 'passed': report.passed,
                         'counterexample': format_word(report.counterexample) if report.counterexample is not None
                         else None}
        lines.append(f"Identity checked on {report.words_checked} words: {'pass' if passed else 'FAIL'}")
    emit(as_json, doc, '\n'.join(lines))
    return EXIT_OK if passed else EXIT_DATA


@cli.command()
@qfa_input
@click.option('--degree', type=click.IntRange(1), default=2, show_default=True)
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None)
@click.option('--check-len', type=click.IntRange(0), default=None,
              help='Also evaluate the basis at X_w for all words up to this length')
@json_option
@click.pass_context
def invariants(ctx, in_path, no_validate, degree, out_path, check_len, as_json):
    """Basis of the invariant polynomials of degree <= d"""
    a = load_qfa(in_path, validate=not no_validate)
    generators = [a.transitions[s] for s in a.alphabet]
    basis = invariant_basis(generators, degree, progress=ctx.obj['progress'])
    doc = basis_to_dict(basis)
    if out_path:
        write_json(doc, out_path)
    text = render_basis(basis)
    if check_len is not None:
        report = vanishing_report(basis, generators, check_len, labels=a.alphabet)
        doc = dict(doc, vanishing={'passed': report.passed, 'words_checked': report.words_checked,
                                   'counterexample': report.counterexample})
        text += f"\nVanishing on words up to length {check_len}: {'pass' if report.passed else 'FAIL'}"
    emit(as_json, doc, text)
    return EXIT_OK


@cli.command()
@qfa_input
@click.option('--cap', type=click.IntRange(1), default=DEFAULTS['budget']['closure_cap'], show_default=True)
@json_option
@click.pass_context
def closure(ctx, in_path, no_validate, cap, as_json):
    """Finite closure of the transition matrices, or budget exceeded"""
    a = load_qfa(in_path, validate=not no_validate)
    result = semigroup_closure([a.transitions[s] for s in a.alphabet], cap, labels=a.alphabet,
                               progress=ctx.obj['progress'])
    emit(as_json, closure_to_dict(result), render_closure(result))
    return EXIT_OK


@cli.command('decide')
@qfa_input
@click.option('--lambda', 'lam', type=RATIONAL, required=True)
@click.option('--relation', type=click.Choice(['>', '<']), default='>', show_default=True)
@click.option('--max-len', type=click.IntRange(1), default=None, help='Word length budget')
@click.option('--closure-cap', type=click.IntRange(1), default=None)
@click.option('--max-degree', type=click.IntRange(1), default=None)
@click.option('--round-schedule', type=click.IntRange(1), default=None, help='Word length of the first round')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None, help='Write the verdict here')
@output_options
@click.pass_context
def decide_cmd(ctx, in_path, no_validate, lam, relation, max_len, closure_cap, max_degree, round_schedule,
               out_path, as_json, approx):
    """Strict-threshold emptiness: exit 0 WITNESS, 1 EMPTY, 2 UNKNOWN"""
    a = load_qfa(in_path, validate=not no_validate)
    budget = Budget.from_config(max_word_len=max_len, closure_cap=closure_cap, max_degree=max_degree,
                                round_schedule=round_schedule)
    verdict = decide(a, lam, Relation.parse(relation), budget, threads=ctx.obj['threads'],
                     progress=ctx.obj['progress'])
    problems = recheck_verdict(a, verdict)
    if problems:
        raise QfaError(f"Verdict failed its own re-check: {'; '.join(problems)}")
    doc = verdict_to_dict(verdict)
    if out_path:
        write_json(doc, out_path)
    emit(as_json, doc, render_verdict(verdict, approx))
    return verdict.kind.exit_code


@cli.command('validate')
@click.option('--in', 'in_path', type=click.Path(exists=True, dir_okay=False), required=True,
              help='Automaton JSON file')
@click.option('--verdict', 'verdict_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Also re-check a stored verdict against the automaton')
@json_option
def validate_cmd(in_path, verdict_path, as_json):
    """Report every violated automaton invariant"""
    a = qfa_from_dict(read_json(in_path), validate=False)
    violations = validate(a)
    doc: Dict[str, Any] = {'valid': not violations, 'violations': violations}
    lines = ['valid' if not violations else 'invalid:'] + [f"  - {v}" for v in violations]
    if verdict_path:
        problems = recheck_verdict(a, verdict_from_dict(read_json(verdict_path)))
        doc['verdict_problems'] = problems
        lines.append('verdict re-check: ' + ('ok' if not problems else '; '.join(problems)))
        violations = violations + problems
    emit(as_json, doc, '\n'.join(lines))
    return EXIT_OK if not violations else EXIT_DATA


@cli.command()
@qfa_input
@click.option('--lambda', 'lam', type=RATIONAL, required=True)
@click.option('--max-len', type=click.IntRange(0), default=DEFAULTS['budget']['max_word_len'], show_default=True)
@click.option('--csv', 'save_csv', is_flag=True, help='Also save the table as CSV under the results directory')
@click.option('--include-empty/--exclude-empty', default=True, show_default=True)
@output_options
@click.pass_context
def table(ctx, in_path, no_validate, lam, max_len, save_csv, include_empty, as_json, approx):
    """Bounded emptiness status of L_>=, L_>, L_<=, L_<"""
    a = load_qfa(in_path, validate=not no_validate)
    df = bounded_emptiness_table(a, lam, max_len, include_empty=include_empty, threads=ctx.obj['threads'])
    if save_csv:
        save_results(df, 'emptiness_table')
    shown = add_approx_column(df, 'value', approx)
    emit(as_json, {'lambda': lam, 'max_len': max_len, 'include_empty': include_empty,
                   'rows': df.to_dict(orient='records')}, render_table(shown))
    return EXIT_OK


@cli.command()
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), default=None)
@json_option
@click.pass_context
def selftest(ctx, out_path, as_json):
    """Run the acceptance checks; the JSON document is deterministic"""
    doc = run_selftest(progress=ctx.obj['progress'])
    if out_path:
        write_json(doc, out_path)
    emit(as_json, doc, render_selftest(doc))
    return EXIT_OK if doc['passed'] else 1


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command and map the outcome to an exit code"""
    try:
        rv = cli.main(args=argv, prog_name='qfa', standalone_mode=False)
    except click.UsageError as e:
        e.show()
        return EXIT_USAGE
    except ValueError as e:
        # QfaError and the library's input checks
        logger.error(f"{type(e).__name__}: {e}")
        click.echo(f"Error: {e}", err=True)
        return EXIT_DATA
    except click.ClickException as e:
        e.show()
        return EXIT_DATA
    except click.exceptions.Abort:
        click.echo('Aborted', err=True)
        return EXIT_INTERNAL
    except Exception as e:
        logger.exception(f"Internal error: {e}")
        return EXIT_INTERNAL
    return rv if isinstance(rv, int) else EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
