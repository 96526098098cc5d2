import argparse
import json
import logging
import os
import sys
import time

import jsonschema
import numpy as np
from sqlalchemy.exc import SQLAlchemyError

from config import (
    CALC_TOL, DD_HORIZON, DEFAULT_SEED, DEFAULT_THREADS, IDENTITY_K, LEDGER_URL, LOG_LEVEL, MC_SAMPLES,
    POWER_HORIZON, PROBE_COUNT, RBOUND_TRIALS, REPORT_SCHEMA_VERSION, SWEEP_CLOSEST,
)
from database import default_ledger_url, get_session_scope, init_db, record_run
from enums import BasisKind, CalcMethod, GammaMethod, IdentitySuite, Subcommand
from errors import BadParameters, ConfigError, EmptyFamily, NumericalError
from holo import HoloFn
from numkernel import Operator
from utils import report_digest, write_json

# Logging setup
logging.basicConfig(
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    level=getattr(logging, LOG_LEVEL.upper(), logging.INFO),
    stream=sys.stderr,
)

logger = logging.getLogger(__name__)

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'schemas')

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO, EXIT_INTERNAL = 0, 1, 2, 3, 4


class ArgumentParser(argparse.ArgumentParser):
    """argparse that raises ConfigError instead of exiting on bad input."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


# ==================== INPUT FILES ====================

def load_schema(name):
    with open(os.path.join(SCHEMA_DIR, name), encoding='utf-8') as fh:
        return json.load(fh)


def load_json(path, schema_name):
    with open(path, encoding='utf-8') as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    validate(data, schema_name, path)
    return data


def validate(data, schema_name, source):
    try:
        jsonschema.validate(instance=data, schema=load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        where = '/'.join(str(part) for part in exc.absolute_path) or '<root>'
        raise ConfigError(f"{source}: {where}: {exc.message}") from exc


def load_operator(path, p=None):
    """Operator file to (Operator, label): explicit matrix records or zoo specs."""
    from zoo import ZooSpec, generate, operator_id
    data = load_json(path, 'operator.schema.json')
    if 'kind' in data:
        spec = ZooSpec.from_dict(data)
        if p is not None:
            spec = spec.with_p(p)
        return generate(spec), operator_id(spec)
    T = Operator.from_dict(data)
    if p is not None:
        T = T.with_p(p)
    return T, os.path.basename(path)


def load_zoo_spec(data, source):
    from zoo import ZooSpec
    validate(data, 'operator.schema.json', source)
    if 'kind' not in data:
        raise BadParameters(f"{source}: the equivalence table needs zoo specs, not explicit matrices")
    return ZooSpec.from_dict(data)


def parse_coefficients(text):
    try:
        return [complex(tok.strip().replace(' ', '').replace('i', 'j')) for tok in text.split(',')]
    except ValueError as exc:
        raise BadParameters(f"Bad coefficient list '{text}': {exc}") from exc


def parse_function(text):
    """poly:c0,c1,.. | rational:a0,../b0,.. | monomial:n | cayley"""
    head, _, body = text.partition(':')
    head = head.strip().lower()
    if head == 'poly' and body:
        return HoloFn.polynomial(parse_coefficients(body), label=text)
    if head == 'rational' and '/' in body:
        num, den = body.split('/', 1)
        return HoloFn.rational(parse_coefficients(num), parse_coefficients(den), label=text)
    if head == 'monomial' and body.strip().isdigit():
        return HoloFn.monomial_power(int(body))
    if head == 'cayley' and not body:
        return HoloFn.cayley()
    raise BadParameters(f"Cannot parse function '{text}'")


# ==================== SETTINGS ====================

class Settings:
    """Flag value, else config-file value, else the default."""

    def __init__(self, args, file_config):
        self.args = args
        self.file_config = file_config

    def get(self, name, default=None):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        return self.file_config.get(name, default)

    @property
    def seed(self):
        return int(self.get('seed', DEFAULT_SEED))

    @property
    def threads(self):
        return int(self.get('threads', DEFAULT_THREADS))


def out_path(args, name):
    return os.path.join(args.out, name)


# ==================== SUBCOMMANDS ====================

def run_diagnose(args, settings):
    from diagnostics import diagnose, ritt_grid_csv
    from plots import plot_resolvent_grid
    T, label = load_operator(args.op, settings.get('p'))
    report = diagnose(
        T,
        power_horizon=int(settings.get('power_horizon', POWER_HORIZON)),
        dd_horizon=int(settings.get('dd_horizon', DD_HORIZON)),
        with_rbound=args.rbound,
        rbound_trials=int(settings.get('rbound_trials', RBOUND_TRIALS)),
        seed=settings.seed,
        threads=settings.threads,
    )
    grid = ritt_grid_csv(report.ritt, out_path(args, 'resolvent_grid.csv'))
    result = {'operator_id': label, 'n': T.dim, 'p': T.space_p, 'diagnostics': report}
    return result, label, [(grid, plot_resolvent_grid)]


def run_calc(args, settings):
    from funcalc import ContourCalculus, calc, calc_contour, calc_eigen_oracle, calc_regularized
    from plots import plot_contour
    T, label = load_operator(args.op, settings.get('p'))
    f = parse_function(args.f)
    theta = float(settings.get('theta', 2.0))
    tol = float(settings.get('tol', CALC_TOL))
    method = args.method
    side = []
    if method == CalcMethod.EIGEN_ORACLE.value:
        value = calc_eigen_oracle(T, f)
    else:
        calculus = ContourCalculus(T, theta)
        solver = {'auto': calc, CalcMethod.CONTOUR.value: calc_contour,
                  CalcMethod.REGULARIZED.value: calc_regularized}[method]
        value = solver(T, f, theta, tol, calculus)
        side.append((calculus.base.nodes_csv(out_path(args, 'contour.csv')), plot_contour))
    result = {'operator_id': label, 'function': f.to_dict(), 'theta': theta, 'tol': tol, 'calc': value}
    return result, label, side


def run_sqf(args, settings):
    from plots import plot_sequence_decay
    from squarefn import SqfSequence, phi_m_estimate, sequence_csv, trace_pairing_norm
    T, label = load_operator(args.op, settings.get('p'))
    m = int(settings.get('m', 1))
    source = T.adjoint() if args.dual else T
    method = GammaMethod(args.method) if args.method else None
    probes = int(settings.get('probes', PROBE_COUNT))
    mc_samples = int(settings.get('mc_samples', MC_SAMPLES))
    estimate = phi_m_estimate(source, m, probes, method, mc_samples, settings.seed, settings.threads)
    result = {'operator_id': label, 'm': m, 'dual': args.dual, 'space_p': source.space_p, 'norm': estimate}
    if args.trace_pairing:
        result['trace_pairing'] = trace_pairing_norm(T, m, probes, mc_samples, settings.seed)
    first = np.zeros(source.dim, dtype=np.complex128)
    first[0] = 1.0
    seq = sequence_csv(SqfSequence(source, first, m), out_path(args, 'sequence.csv'))
    return result, label, [(seq, plot_sequence_decay)]


def run_basis_sweep(args, settings):
    from basis import stolz_grid, sweep_csv
    from experiments import run_basis_sweep as sweep
    from plots import plot_sweep
    from stolz import StolzDomain
    omega = float(settings.get('omega', 2.0))
    m = int(settings.get('m', 1))
    kinds = settings.get('kinds') or [k.value for k in BasisKind]
    grid_config = dict(settings.file_config.get('grid', {}))
    for name in ('n_phi', 'n_u', 'closest'):
        if getattr(args, name) is not None:
            grid_config[name] = getattr(args, name)
    grid = stolz_grid(StolzDomain(omega), int(grid_config.get('n_phi', 20)), int(grid_config.get('n_u', 25)),
                      float(grid_config.get('closest', SWEEP_CLOSEST)))
    summary = sweep(omega, m, grid, [BasisKind(k) for k in kinds], fit=not args.no_fit, threads=settings.threads)
    tables = [t for kind in summary.tables.values() for t in kind]
    csv = sweep_csv(tables, out_path(args, 'sweep.csv'))
    return {'sweep': summary}, f"omega={omega:g},m={m}", [(csv, plot_sweep)]


def run_verify_identities(args, settings):
    from experiments import run_identity_audit
    from enums import Verdict
    suite = IdentitySuite(settings.get('suite', IdentitySuite.ALL.value))
    K = int(settings.get('K', IDENTITY_K))
    reports = run_identity_audit(suite, K)
    result = {
        'suite': suite,
        'K': K,
        'reports': reports,
        'all_verified': all(r.verdict == Verdict.VERIFIED for r in reports),
    }
    return result, suite.value, []


def run_equivalence(args, settings):
    from experiments import check_implications, equivalence_csv, run_equivalence as table
    from experiments import run_tangential_sweep, tangential_csv
    specs = [load_zoo_spec(data, f"{args.config}:operators[{i}]")
             for i, data in enumerate(settings.file_config.get('operators', []))]
    for path in args.op or []:
        with open(path, encoding='utf-8') as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
        specs.append(load_zoo_spec(data, path))
    if not specs:
        raise EmptyFamily("The equivalence table needs at least one operator (--op or config 'operators')")
    p = float(settings.get('p', 2.0))
    nu = settings.get('nu')
    budgets = settings.file_config.get('budgets', {})
    rows = table(specs, p, None if nu is None else float(nu), settings.seed, budgets, settings.threads)
    result = {'p': p, 'rows': rows, 'implications': check_implications(rows)}
    side = [(equivalence_csv(rows, out_path(args, 'equivalence.csv')), None)]
    ns = settings.file_config.get('tangential_ns')
    if ns:
        tangential = run_tangential_sweep(ns, p, int(budgets.get('dd', DD_HORIZON)))
        result['tangential'] = tangential
        side.append((tangential_csv(tangential, out_path(args, 'tangential.csv')), None))
    return result, f"{len(specs)} operators", side


RUNNERS = {
    Subcommand.DIAGNOSE: run_diagnose,
    Subcommand.CALC: run_calc,
    Subcommand.SQF: run_sqf,
    Subcommand.BASIS_SWEEP: run_basis_sweep,
    Subcommand.VERIFY_IDENTITIES: run_verify_identities,
    Subcommand.EQUIVALENCE: run_equivalence,
}


# ==================== PARSER ====================

def build_parser():
    common = ArgumentParser(add_help=False)
    common.add_argument('--out', required=True, help='output directory for report.json and CSV side files')
    common.add_argument('--config', help='experiment config JSON (flags override its values)')
    common.add_argument('--seed', type=int, help=f'root seed (default {DEFAULT_SEED})')
    common.add_argument('--threads', type=int, help=f'worker threads (default {DEFAULT_THREADS})')
    common.add_argument('--ledger', help='SQLAlchemy URL of the run ledger (default sqlite:///<out>/ledger.db)')
    common.add_argument('--no-ledger', action='store_true', help='do not record the run')
    common.add_argument('--plot', action='store_true', help='render PNGs next to the CSV side files')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='log at DEBUG')
    verbosity.add_argument('--quiet', action='store_true', help='log at WARNING')

    parser = ArgumentParser(prog='rittlab', description='Numerical lab for Ritt operators on finite-dimensional l^p.')
    sub = parser.add_subparsers(dest='subcommand', required=True)

    p = sub.add_parser(Subcommand.DIAGNOSE.value, parents=[common], help='resolvent, power and Ritt diagnostics')
    p.add_argument('--op', required=True, help='operator file (matrix record or zoo spec)')
    p.add_argument('--p', type=float, help='override the norm exponent')
    p.add_argument('--power-horizon', type=int, help=f'power horizon (default {POWER_HORIZON})')
    p.add_argument('--dd-horizon', type=int, help=f'discrete-derivative horizon (default {DD_HORIZON})')
    p.add_argument('--rbound', action='store_true', help='estimate the R-bound of the Ritt families')
    p.add_argument('--rbound-trials', type=int, help=f'R-bound trials (default {RBOUND_TRIALS})')

    p = sub.add_parser(Subcommand.CALC.value, parents=[common], help='holomorphic functional calculus f(T)')
    p.add_argument('--op', required=True)
    p.add_argument('--p', type=float)
    p.add_argument('--f', required=True, help='poly:c0,c1,.. | rational:a0,../b0,.. | monomial:n | cayley')
    p.add_argument('--theta', type=float, help='Stolz parameter of the contour (default 2)')
    p.add_argument('--tol', type=float, help=f'quadrature tolerance (default {CALC_TOL:g})')
    p.add_argument('--method', default='auto',
                   choices=['auto'] + [m.value for m in CalcMethod], help='evaluation path (default auto)')

    p = sub.add_parser(Subcommand.SQF.value, parents=[common], help='square-function norms')
    p.add_argument('--op', required=True)
    p.add_argument('--p', type=float)
    p.add_argument('--m', type=int, help='square-function order (default 1)')
    p.add_argument('--method', choices=[m.value for m in GammaMethod],
                   help='gamma-norm method (default hilbert_exact on p=2, gaussian_mc otherwise)')
    p.add_argument('--probes', type=int, help=f'random probe vectors (default {PROBE_COUNT})')
    p.add_argument('--mc-samples', type=int, help=f'Monte-Carlo samples (default {MC_SAMPLES})')
    p.add_argument('--dual', action='store_true', help='square function of the adjoint on l^q')
    p.add_argument('--trace-pairing', action='store_true', help='also report the trace-pairing lower estimate')

    p = sub.add_parser(Subcommand.BASIS_SWEEP.value, parents=[common], help='l1 pairings of F_m over a Stolz grid')
    p.add_argument('--omega', type=float, help='Stolz parameter of the grid (default 2)')
    p.add_argument('--m', type=int, help='order of F_m (default 1)')
    p.add_argument('--kinds', nargs='+', choices=[k.value for k in BasisKind], help='bases (default all)')
    p.add_argument('--n-phi', type=int, help='grid angles (default 20)')
    p.add_argument('--n-u', type=int, help='grid radii (default 25)')
    p.add_argument('--closest', type=float, help=f'closest approach to z=1 (default {SWEEP_CLOSEST:g})')
    p.add_argument('--no-fit', action='store_true', help='skip the blow-up exponent fits')

    p = sub.add_parser(Subcommand.VERIFY_IDENTITIES.value, parents=[common], help='audit the series identities')
    p.add_argument('--suite', choices=[s.value for s in IdentitySuite], help='suite (default all)')
    p.add_argument('--K', type=int, help=f'series truncation (default {IDENTITY_K})')

    p = sub.add_parser(Subcommand.EQUIVALENCE.value, parents=[common], help='equivalence table over zoo operators')
    p.add_argument('--op', action='append', help='zoo spec file (repeatable; adds to config operators)')
    p.add_argument('--p', type=float, help='norm exponent (default 2)')
    p.add_argument('--nu', type=float, help='Stolz parameter of the H-infinity estimate (default 2 x Stolz type)')
    return parser


# ==================== ENTRY POINT ====================

def _record(args, subcommand, exit_code, label, settings, error, report_path, digest, elapsed):
    url = args.ledger or LEDGER_URL or default_ledger_url(args.out)
    try:
        Session = init_db(url)
        with get_session_scope(Session) as session:
            record_run(session, subcommand, exit_code, operator_id=label, seed=settings.seed,
                       threads=settings.threads, error=error, report_path=report_path,
                       report_digest=digest, elapsed_seconds=elapsed)
    except (SQLAlchemyError, OSError) as e:
        logger.warning(f"Run ledger not updated: {e}")


def main(argv=None):
    started = time.monotonic()
    args = None
    settings = Settings(argparse.Namespace(), {})
    subcommand, label, error = None, None, None
    report_path, digest = None, None
    try:
        args = build_parser().parse_args(argv)
        if args.verbose:
            logging.getLogger().setLevel(logging.DEBUG)
        elif args.quiet:
            logging.getLogger().setLevel(logging.WARNING)
        subcommand = Subcommand(args.subcommand)
        file_config = load_json(args.config, 'experiment_config.schema.json') if args.config else {}
        settings = Settings(args, file_config)
        os.makedirs(args.out, exist_ok=True)

        result, label, side_files = RUNNERS[subcommand](args, settings)
        report = {
            'schema_version': REPORT_SCHEMA_VERSION,
            'subcommand': subcommand.value,
            'seed': settings.seed,
            'result': result,
        }
        report_path = out_path(args, 'report.json')
        digest = report_digest(write_json(report_path, report))
        if args.plot:
            for csv_path, recipe in side_files:
                if recipe is None:
                    continue
                png = os.path.splitext(csv_path)[0] + '.png'
                with open(png, 'wb') as fh:
                    fh.write(recipe(csv_path).getvalue())
        logger.info(f"{subcommand.value}: report written to {report_path}")
        exit_code = EXIT_OK
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        exit_code, error = EXIT_CONFIG, f"{type(e).__name__}: {e}"
    except NumericalError as e:
        logger.error(f"Numerical failure: {e}")
        exit_code, error = EXIT_NUMERICAL, f"{type(e).__name__}: {e}"
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        exit_code, error = EXIT_IO, f"{type(e).__name__}: {e}"
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        exit_code, error = EXIT_INTERNAL, f"{type(e).__name__}: {e}"

    if args is not None and subcommand is not None and not args.no_ledger:
        _record(args, subcommand.value, exit_code, label, settings, error, report_path, digest,
                time.monotonic() - started)
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
