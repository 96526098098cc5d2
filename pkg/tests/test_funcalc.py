import numpy as np
import pytest

from enums import CalcMethod
from errors import IllConditioned, NotAdmissible, SpectrumOutsideContour
from funcalc import (
    ContourCalculus, calc, calc_contour, calc_eigen_oracle, calc_regularized, cayley_inverse,
    convergence_lemma_check, dd_function, hinf_constant_estimate, probe_functions,
)
from holo import HoloFn
from stolz import StolzDomain


@pytest.fixture
def T(make_operator):
    # non-normal, spectrum {0.5, -0.2, 0.3 + 0.1i} of Stolz type 1.5
    return make_operator([[0.5, 0.3, 0.0], [0.0, -0.2, 0.2], [0.0, 0.0, 0.3 + 0.1j]])


def test_contour_matches_eigen_oracle(T):
    f = HoloFn.polynomial([1.0, -1.0, 0.5])
    result = calc_contour(T, HoloFn.polynomial([1.0, -1.0]).multiply(f), 3.0)
    oracle = calc_eigen_oracle(T, HoloFn.polynomial([1.0, -1.0]).multiply(f))
    assert result.method == CalcMethod.CONTOUR
    np.testing.assert_allclose(result.value.entries, oracle.value.entries, atol=1e-7)


def test_contour_matches_direct_rational_evaluation(T):
    f = HoloFn.rational([1.0, -1.0], [2.0, 1.0])  # (1 - z) / (2 + z)
    result = calc_contour(T, f, 3.0)
    np.testing.assert_allclose(result.value.entries, f.apply_direct(T), atol=1e-7)


def test_constant_is_not_admissible_for_the_contour(T):
    with pytest.raises(NotAdmissible):
        calc_contour(T, HoloFn.constant(1.0), 3.0)


def test_regularized_path_recovers_the_identity(T):
    result = calc(T, HoloFn.constant(1.0), 3.0)
    assert result.method == CalcMethod.REGULARIZED
    np.testing.assert_allclose(result.value.entries, np.eye(3), atol=1e-7)


def test_regularized_monomial(T):
    result = calc_regularized(T, HoloFn.monomial_power(3), 3.0)
    np.testing.assert_allclose(result.value.entries, np.linalg.matrix_power(T.entries, 3), atol=1e-7)


def test_cached_resolvents_are_reused(T):
    calculus = ContourCalculus(T, 3.0)
    first = calc(T, HoloFn.polynomial([1.0, -1.0]), 3.0, calculus=calculus)
    second = calc(T, HoloFn.polynomial([0.0, 1.0, -1.0]), 3.0, calculus=calculus)
    assert first.nodes > 0 and second.nodes > 0
    assert calculus.resolvents(calculus.base) is calculus.resolvents(calculus.base)



def test_resolvent_cache_is_bounded_by_bytes(T):
    base = ContourCalculus(T, 3.0).base
    stack_bytes = base.size * T.dim ** 2 * 16
    calculus = ContourCalculus(T, 3.0, cache_bytes=stack_bytes)
    first = calculus.resolvents(base)
    finer = base.refine()
    calculus.resolvents(finer)
    assert calculus.cached_levels == (finer.key,)
    assert calculus.cached_bytes == finer.size * T.dim ** 2 * 16
    assert calculus.resolvents(base) is not first

    roomy = ContourCalculus(T, 3.0, cache_size=2)
    roomy.resolvents(base)
    roomy.resolvents(finer)
    roomy.resolvents(finer.refine())
    assert roomy.cached_levels == (finer.key, finer.refine().key)


def test_spectrum_outside_contour(diag_operator):
    with pytest.raises(SpectrumOutsideContour):
        calc_contour(diag_operator(0.5, -0.9), HoloFn.polynomial([1.0, -1.0]), 2.0)


def test_vertex_eigenvalue_is_outside_contour(diag_operator):
    with pytest.raises(SpectrumOutsideContour):
        calc(diag_operator(1.0, 0.5), HoloFn.polynomial([1.0, -1.0]), 2.0)


def test_cayley_inverse(diag_operator):
    inv = cayley_inverse(diag_operator(0.5, -0.5))
    np.testing.assert_allclose(np.diag(inv), [3.0, 1.0 / 3.0], atol=1e-12)


def test_oracle_rejects_ill_conditioned_eigenvectors(make_operator):
    T = make_operator([[0.5, 1.0], [0.0, 0.5 + 1e-6]])
    with pytest.raises(IllConditioned):
        calc_eigen_oracle(T, HoloFn.monomial_power(2))


def test_dd_function():
    f = dd_function(3)
    assert f(0.5) == pytest.approx(3 * 0.5 * 0.25)


def test_probe_functions_families():
    domain = StolzDomain(2.0)
    assert len(probe_functions('monomials', 4, domain)) == 5
    assert len(probe_functions('dd_functions', 4, domain)) == 4
    assert len(probe_functions('pairings', 3, domain)) == 3
    with pytest.raises(ValueError):
        probe_functions('unknown', 1, domain)


def test_hinf_constant_of_normal_operator_is_one(diag_operator):
    T = diag_operator(0.5, 0.25)
    est = hinf_constant_estimate(T, 2.0, families=('monomials', 'dd_functions'), budget=4)
    assert est.theta == pytest.approx(2.0 ** 0.5)
    assert est.functions == 9
    assert 1.0 - 1e-7 <= est.value <= 1.0 + 1e-3
    assert not est.vertex_fallback


def test_hinf_vertex_fallback():
    from numkernel import Operator
    est = hinf_constant_estimate(Operator.identity(2), 2.0, budget=3)
    assert est.vertex_fallback
    assert est.value == pytest.approx(1.0)


def test_hinf_needs_spectrum_inside(diag_operator):
    with pytest.raises(SpectrumOutsideContour):
        hinf_constant_estimate(diag_operator(0.5, -0.9), 2.0, budget=2)


def test_convergence_lemma(diag_operator):
    check = convergence_lemma_check(diag_operator(0.5, -0.2), 3.0, powers=(1, 4, 16, 32), vectors=2)
    assert check.decaying
    assert check.norms[-1] < check.norms[0]
