import math

import numpy as np
import pytest

from enums import IdentitySuite, LemmaConvention, Verdict
from errors import BadParameters, OutOfRange
from holo import HoloFn
from identities import (
    contour_l1_bound, lemma_identity, lemma_limit, lemma_suite, multiplier_bounds, multiplier_oracle,
    pairing_constant_closed_form, pairing_constant_probe, pairing_suite, representation_closed_form,
    representation_ratio, rising_product_identity, run_suites, step2_ratio,
)
from stolz import arc_length_oracle


@pytest.fixture
def disk_points():
    rng = np.random.default_rng(1)
    r = 0.9 * np.sqrt(rng.uniform(0.0, 1.0, 50))
    return r * np.exp(2j * math.pi * rng.uniform(0.0, 1.0, 50))


def test_shifted_lemma_sums_to_one(disk_points):
    for u in disk_points:
        for n in range(7):
            s = lemma_identity(u, n, K=500)
            assert abs(s.value - 1.0) <= s.tail_bound


def test_printed_lemma_sums_to_a_power_of_u():
    u = 0.5 + 0.2j
    for n in range(1, 5):
        s = lemma_identity(u, n, K=500, convention=LemmaConvention.PRINTED)
        assert abs(s.value - lemma_limit(u, n, LemmaConvention.PRINTED)) <= 10 * s.tail_bound
        assert lemma_limit(u, n, LemmaConvention.PRINTED) == pytest.approx(u ** (n - 1))


def test_lemma_arguments():
    with pytest.raises(OutOfRange):
        lemma_identity(1.0, 1)
    with pytest.raises(BadParameters):
        lemma_identity(0.5, -1)


@pytest.mark.parametrize("u", [0.5, -0.3 + 0.4j, 0.0])
@pytest.mark.parametrize("m", [1, 2, 3])
def test_rising_product(u, m):
    lhs, rhs = rising_product_identity(u, m)
    assert rhs == pytest.approx(math.factorial(m) / (1 - u) ** (m + 1))
    assert abs(lhs.value - rhs) <= lhs.tail_bound


@pytest.mark.parametrize("z", [0.0, 0.5, 0.3j, -0.2 + 0.4j])
@pytest.mark.parametrize("m_half", [1, 2])
def test_pairing_constant_closed_form(z, m_half):
    s = pairing_constant_probe(z, m_half, m_half)
    assert abs(s.value - pairing_constant_closed_form(z, m_half)) <= s.tail_bound


def test_pairing_constant_at_origin_is_not_two():
    s = pairing_constant_probe(0.0, 1, 1)
    assert s.value == pytest.approx(1.0)
    report = pairing_suite()
    assert report.verdict == Verdict.DEVIATES
    assert report.details['deviation_from_observed_pattern'] < 1e-10


@pytest.mark.parametrize("z", [0.1, 0.5, 0.4 + 0.3j, -0.6j])
@pytest.mark.parametrize("m1,m2", [(1, 1), (1, 2), (2, 2)])
def test_representation_ratio(z, m1, m2):
    a = representation_ratio(z, HoloFn.polynomial([2.0, 1.0]), m1, m2)
    b = representation_ratio(z, HoloFn.cayley(), m1, m2)
    assert abs(a.value - representation_closed_form(z, m1 + m2)) <= 1e-10
    assert abs(a.value - b.value) < 1e-12


def test_representation_closed_form_at_origin():
    assert representation_closed_form(0.0, 2) == pytest.approx(1.0)


def test_representation_rejects_zero_of_f():
    with pytest.raises(OutOfRange):
        representation_ratio(0.5, HoloFn.polynomial([-0.5, 1.0]), 1, 1)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_step2_ratio(m):
    for z in (0.5, 0.3j, -0.4 + 0.2j):
        for k in (2, 3, 7):
            assert step2_ratio(z, k, m).ratio == pytest.approx(2.0 ** (m - 2), rel=1e-10)


def test_step2_needs_k_at_least_two():
    with pytest.raises(BadParameters):
        step2_ratio(0.5, 1, 2)


@pytest.mark.parametrize("m", [3, 4])
def test_multipliers_match_hurwitz_zeta(m):
    sums = multiplier_bounds(50, m)
    for n, s in enumerate(sums, start=1):
        assert s.value == pytest.approx(multiplier_oracle(n, m), rel=1e-8)
    assert sums[0].value == pytest.approx(math.pi ** 2 / 6, rel=1e-9)
    assert max(s.value for s in sums) == sums[0].value


def test_multiplier_orders():
    with pytest.raises(BadParameters):
        multiplier_bounds(10, 5)


def test_contour_l1_first_term_is_the_arc_length():
    assert contour_l1_bound(2.0, 1) == pytest.approx(arc_length_oracle(2.0, 200_000), rel=1e-6)


@pytest.mark.slow
def test_contour_l1_stays_bounded():
    values = [contour_l1_bound(2.0, k) for k in (10, 100, 1000, 10_000)]
    assert max(values) / min(values) <= 2.0
    assert values[-1] == pytest.approx(4.0, rel=0.05)


def test_lemma_suite_reports_both_conventions():
    report = lemma_suite(K=500)
    assert report.verdict == Verdict.VERIFIED
    printed = report.details['printed_convention']
    assert printed['verdict'] == Verdict.DEVIATES
    assert printed['pattern']
    assert max(abs(row['u']) for row in report.grid) == pytest.approx(0.9)
    assert {row['n'] for row in report.grid} == set(range(7))


def test_run_suites_selects_one_suite():
    reports = run_suites(IdentitySuite.STEP2, K=200)
    assert [r.name for r in reports] == ['step2']
    step2 = reports[0]
    assert step2.verdict == Verdict.DEVIATES
    assert step2.to_dict()['verdict'] == Verdict.DEVIATES
    assert step2.pattern == 'lhs / rhs = 2^(m-2)'
    assert step2.details['deviation_from_observed_pattern'] < 1e-10
    for row in step2.grid:
        assert row['ratio'] == pytest.approx(2.0 ** (row['m'] - 2), rel=1e-10)


def test_run_suites_all_verified_suite():
    [report] = run_suites(IdentitySuite.RISING, K=300)
    assert report.verdict == Verdict.VERIFIED
    assert report.max_abs_deviation <= 10 * report.tail_bound
