import math

import pytest

import experiments
from basis import stolz_grid
from enums import BasisKind, Classification, IdentitySuite, Verdict, ZooKind
from errors import NonConvergence
from experiments import (
    check_implications, equivalence_csv, equivalence_row, run_basis_sweep, run_equivalence, run_identity_audit,
    run_tangential_sweep, tangential_csv,
)
from stolz import StolzDomain
from zoo import ZooSpec, tangential_stolz_type

SMALL_BUDGETS = {'power': 50, 'dd': 50, 'hinf': 4, 'probes': 4, 'rbound_family': 4, 'rbound_trials': 4}


@pytest.fixture
def rotation_row():
    return equivalence_row(ZooSpec(ZooKind.ROTATION), budgets=SMALL_BUDGETS)


@pytest.mark.slow
def test_jordan_row_is_ritt_like():
    row = equivalence_row(ZooSpec(ZooKind.JORDAN, lam=0.5, n=3, delta=0.2), budgets=SMALL_BUDGETS)
    assert row.classification == Classification.RITT_LIKELY
    assert row.stolz_type == pytest.approx(1.0)
    for value in (row.ritt_constant, row.phi1_norm, row.phi1_dual_norm, row.phi2_norm, row.rbound_powers):
        assert math.isfinite(value)
    assert row.hinf_estimate >= 1.0 - 1e-6


def test_rotation_row_flags_divergence(rotation_row):
    assert rotation_row.classification == Classification.POWER_BOUNDED_NOT_RITT
    assert rotation_row.flags['dd'] == 'linear_growth'
    assert rotation_row.flags['phi1_norm'] == 'NoDecay'
    assert math.isnan(rotation_row.phi1_norm)
    assert math.isnan(rotation_row.hinf_estimate)
    [verdict] = check_implications([rotation_row])
    assert verdict['holds']
    assert verdict['operator_id'] == "rotation(phi=1.5708)@p=2"


def test_equivalence_csv(tmp_path, rotation_row):
    path = equivalence_csv([rotation_row], str(tmp_path / "equivalence.csv"))
    lines = open(path, encoding="utf-8").read().splitlines()
    assert lines[0].startswith("operator_id,classification,stolz_type,ritt_constant")
    assert lines[0].endswith(",flags")
    assert len(lines) == 2


def test_run_equivalence_keeps_order():
    specs = [ZooSpec(ZooKind.ROTATION, phi=1.0), ZooSpec(ZooKind.ROTATION, phi=2.0)]
    rows = run_equivalence(specs, budgets=SMALL_BUDGETS, threads=2)
    assert [r.operator_id for r in rows] == ["rotation(phi=1)@p=2", "rotation(phi=2)@p=2"]


def test_failed_diagnosis_keeps_the_table(monkeypatch):
    real_diagnose = experiments.diagnose

    def flaky(T, *args, **kwargs):
        if abs(T.entries[0, 0] - math.cos(2.0)) < 1e-12:
            raise NonConvergence("norm iteration stalled")
        return real_diagnose(T, *args, **kwargs)

    monkeypatch.setattr(experiments, "diagnose", flaky)
    specs = [ZooSpec(ZooKind.ROTATION, phi=phi) for phi in (1.0, 2.0, 3.0)]
    rows = run_equivalence(specs, budgets=SMALL_BUDGETS)
    assert [r.operator_id for r in rows] == ["rotation(phi=1)@p=2", "rotation(phi=2)@p=2", "rotation(phi=3)@p=2"]
    failed = rows[1]
    assert failed.flags == {'diagnose': 'NonConvergence'}
    assert failed.classification == Classification.INCONCLUSIVE
    assert all(math.isnan(failed.to_dict()[name]) for name in experiments.COLUMNS)
    assert rows[0].classification == Classification.POWER_BOUNDED_NOT_RITT
    assert check_implications([failed])[0]['holds']


def test_tangential_sweep_matches_the_closed_form(tmp_path):
    rows = run_tangential_sweep((8, 16), horizon=50)
    for row in rows:
        assert row['stolz_type'] == pytest.approx(tangential_stolz_type(row['n']), rel=1e-6)
        assert math.isfinite(row['stolz_type'])
    assert rows[1]['stolz_type'] > rows[0]['stolz_type']
    path = tangential_csv(rows, str(tmp_path / "tangential.csv"))
    assert open(path, encoding="utf-8").readline().startswith("n,stolz_type,stolz_type_closed_form")


def test_basis_sweep_summary():
    grid = stolz_grid(StolzDomain(2.0), 2, 3)
    summary = run_basis_sweep(2.0, 1, grid, kinds=(BasisKind.WINDOWS,), fit=False)
    assert summary.points == 6
    assert math.isfinite(summary.sup_l1['windows'])
    assert summary.skipped['windows'] == 0
    assert summary.blow_up_exponent == {}
    assert 'windows' in summary.gram_condition
    assert len(summary.row_sums) == 5
    assert set(summary.to_dict()) >= {'sup_l1', 'row_sums', 'gram_condition'}


def test_identity_audit():
    [report] = run_identity_audit(IdentitySuite.RISING, K=200)
    assert report.verdict == Verdict.VERIFIED
