"""
Experiment orchestration: the equivalence table over a family of operators,
the basis sweep, the tangential-family sweep and the identity audit.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from basis import blow_up_exponent, gram_condition, pairing_sweep, row_sum_audit, stolz_grid, sup_l1
from config import (
    DD_HORIZON, DEFAULT_SEED, HINF_BUDGET, IDENTITY_K, POWER_HORIZON, PROBE_COUNT, RBOUND_FAMILY_SIZE,
    RBOUND_TRIALS,
)
from diagnostics import diagnose, rbound_estimate, rritt_families
from enums import BasisKind, Classification, IdentitySuite, ZooKind
from errors import RittLabError
from funcalc import hinf_constant_estimate
from identities import run_suites
from squarefn import phi_m_dual_norm, phi_m_norm
from stolz import StolzDomain
from utils import parallel_map, write_csv
from zoo import ZooSpec, generate, operator_id, tangential_stolz_type

logger = logging.getLogger(__name__)

COLUMNS = (
    'stolz_type', 'ritt_constant', 'hinf_estimate', 'phi1_norm', 'phi1_dual_norm', 'phi2_norm',
    'rbound_powers', 'rbound_dd',
)


@dataclass(frozen=True)
class EquivalenceRow:
    operator_id: str
    stolz_type: float
    ritt_constant: float
    hinf_estimate: float
    phi1_norm: float
    phi1_dual_norm: float
    phi2_norm: float
    rbound_powers: float
    rbound_dd: float
    classification: Classification
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        out = {'operator_id': self.operator_id, 'classification': self.classification, 'flags': self.flags}
        out.update({name: getattr(self, name) for name in COLUMNS})
        return out


def _column(flags, name, fn):
    try:
        return fn()
    except RittLabError as exc:
        flags[name] = type(exc).__name__
        logger.warning(f"{name}: {exc}")
        return math.nan


def _failed_row(label, flags):
    return EquivalenceRow(label, *([math.nan] * len(COLUMNS)), Classification.INCONCLUSIVE, flags)


def equivalence_row(spec, p=2.0, nu=None, seed=DEFAULT_SEED, budgets=None):
    """One row of the equivalence table; column failures become flags."""
    budgets = budgets or {}
    spec = spec.with_p(p)
    label = operator_id(spec)
    flags = {}
    try:
        T = generate(spec)
        report = diagnose(T, budgets.get('power', POWER_HORIZON), budgets.get('dd', DD_HORIZON), seed=seed)
    except RittLabError as exc:
        flags['diagnose'] = type(exc).__name__
        logger.warning(f"{label}: diagnosis failed, row left empty: {exc}")
        return _failed_row(label, flags)
    if report.ritt.growing:
        flags['ritt_constant'] = 'growing'
    if report.classification == Classification.POWER_BOUNDED_NOT_RITT:
        flags['dd'] = 'linear_growth'
    elif report.classification == Classification.NOT_POWER_BOUNDED:
        flags['power'] = 'unbounded'
    stolz_type = report.stolz_type_spec
    if nu is None:
        nu = 2.0 * stolz_type if math.isfinite(stolz_type) else math.inf
    if math.isfinite(nu):
        hinf = _column(flags, 'hinf_estimate',
                       lambda: hinf_constant_estimate(T, nu, budget=budgets.get('hinf', HINF_BUDGET), seed=seed).value)
    else:
        flags['hinf_estimate'] = 'SpectrumOutsideContour'
        hinf = math.nan
    probes = budgets.get('probes', PROBE_COUNT)
    phi1 = _column(flags, 'phi1_norm', lambda: phi_m_norm(T, 1, probes, seed=seed))
    phi1_dual = _column(flags, 'phi1_dual_norm', lambda: phi_m_dual_norm(T, 1, probes, seed=seed))
    phi2 = _column(flags, 'phi2_norm', lambda: phi_m_norm(T, 2, probes, seed=seed))
    trials = budgets.get('rbound_trials', RBOUND_TRIALS)
    family_size = budgets.get('rbound_family', RBOUND_FAMILY_SIZE)
    families = _column(flags, 'rbound_powers', lambda: rritt_families(T, family_size))
    if isinstance(families, tuple):
        powers, derivs = families
        rb_powers = _column(flags, 'rbound_powers', lambda: rbound_estimate(powers, trials, seed=seed).value)
        rb_dd = _column(flags, 'rbound_dd', lambda: rbound_estimate(derivs, trials, seed=seed).value)
    else:
        flags['rbound_dd'] = flags['rbound_powers']
        rb_powers = rb_dd = math.nan
    return EquivalenceRow(label, stolz_type, report.ritt.value, hinf, phi1, phi1_dual, phi2,
                          rb_powers, rb_dd, report.classification, flags)


def run_equivalence(specs, p=2.0, nu=None, seed=DEFAULT_SEED, budgets=None, threads=1):
    rows = parallel_map(lambda spec: equivalence_row(spec, p, nu, seed, budgets), list(specs), threads)
    logger.info(f"Equivalence table: {len(rows)} rows")
    return rows


def check_implications(rows):
    """Finite columns on Ritt-like rows, at least one divergence flag elsewhere."""
    out = []
    for row in rows:
        values = [getattr(row, name) for name in COLUMNS]
        finite = all(isinstance(v, (int, float)) and math.isfinite(v) for v in values)
        if row.classification == Classification.RITT_LIKELY:
            holds = finite and not row.flags
            reason = 'all columns finite' if holds else f"flags {sorted(row.flags)}"
        elif row.classification == Classification.INCONCLUSIVE:
            holds, reason = True, 'inconclusive rows carry no implication'
        else:
            holds = bool(row.flags) or not finite
            reason = f"flags {sorted(row.flags)}" if holds else 'no divergence flag'
        out.append({'operator_id': row.operator_id, 'holds': holds, 'reason': reason})
    return out


def equivalence_csv(rows, path):
    header = ['operator_id', 'classification'] + list(COLUMNS) + ['flags']
    lines = ([r.operator_id, r.classification.value] + [getattr(r, c) for c in COLUMNS]
             + [';'.join(f"{k}={v}" for k, v in sorted(r.flags.items()))] for r in rows)
    return write_csv(path, header, lines)


# ==================== BASIS SWEEP ====================

@dataclass(frozen=True)
class BasisSweepSummary:
    omega: float
    m: int
    points: int
    sup_l1: dict
    skipped: dict
    blow_up_exponent: dict
    gram_condition: dict
    row_sums: list
    tables: dict = field(default_factory=dict, repr=False)

    def to_dict(self):
        return {
            'omega': self.omega,
            'm': self.m,
            'points': self.points,
            'sup_l1': self.sup_l1,
            'skipped': self.skipped,
            'blow_up_exponent': self.blow_up_exponent,
            'gram_condition': self.gram_condition,
            'row_sums': self.row_sums,
        }


def run_basis_sweep(omega, m=1, grid=None, kinds=tuple(BasisKind), gram_blocks=8, fit=True, threads=1):
    """sup l1 of the F_m pairings per basis over a Stolz grid, with the vertex blow-up exponent."""
    domain = StolzDomain(omega)
    grid = stolz_grid(domain) if grid is None else np.asarray(grid, dtype=np.complex128)
    tables, sups, skipped, exponents, conditions = {}, {}, {}, {}, {}
    for kind in kinds:
        kind = BasisKind(kind)
        tables[kind.value] = pairing_sweep(domain, m, kind, grid, threads)
        sups[kind.value] = sup_l1(tables[kind.value])
        skipped[kind.value] = sum(1 for t in tables[kind.value] if t.skipped)
        if fit:
            exponents[kind.value] = blow_up_exponent(kind, m)
        if kind != BasisKind.CANONICAL:
            conditions[kind.value] = gram_condition(kind, gram_blocks)
    logger.info(f"Basis sweep omega={omega} m={m}: sup l1 {sups}")
    return BasisSweepSummary(float(omega), m, int(grid.size), sups, skipped, exponents, conditions,
                             row_sum_audit(), tables)


# ==================== TANGENTIAL FAMILY ====================

def run_tangential_sweep(ns=(8, 16, 32, 64), p=2.0, horizon=DD_HORIZON):
    """Spectral Stolz type and discrete-derivative growth of (I + S)/2 as n doubles."""
    rows = []
    for n in ns:
        T = generate(ZooSpec(ZooKind.TANGENTIAL_AVERAGE, n=n, space_p=p))
        report = diagnose(T, dd_horizon=horizon)
        rows.append({
            'n': n,
            'stolz_type': report.stolz_type_spec,
            'stolz_type_closed_form': tangential_stolz_type(n),
            'power_bound': report.power.value,
            'dd_bound': report.dd.value,
            'dd_slope': report.dd.slope,
            'classification': report.classification,
        })
    return rows


def tangential_csv(rows, path):
    header = ['n', 'stolz_type', 'stolz_type_closed_form', 'power_bound', 'dd_bound', 'dd_slope', 'classification']
    return write_csv(path, header, ([r[h].value if h == 'classification' else r[h] for h in header] for r in rows))


def run_identity_audit(which=IdentitySuite.ALL, K=IDENTITY_K):
    return run_suites(which, K)
