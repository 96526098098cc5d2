import math

import numpy as np
import pytest

from errors import DimensionCap, IllConditionedWarning, InvalidOperator, SingularResolvent
from numkernel import (
    Operator, dual_exponent, eigenvalues, matrix_norm, norm_estimate, operator_norm, power_entries,
    resolvent, resolvent_apply, restrict,
)
from utils import lp_norm


def test_operator_rejects_bad_input():
    with pytest.raises(InvalidOperator):
        Operator(np.ones((2, 3)))
    with pytest.raises(InvalidOperator):
        Operator(np.eye(2), space_p=1.0)
    with pytest.raises(InvalidOperator):
        Operator(np.eye(2), space_p=math.inf)
    with pytest.raises(InvalidOperator):
        Operator(np.array([[np.nan]]))


def test_operator_record_round_trip(make_operator):
    T = make_operator([[0.5, 1j], [0.0, -0.25]], p=3.0)
    back = Operator.from_dict(T.to_dict())
    assert back.space_p == 3.0
    np.testing.assert_array_equal(back.entries, T.entries)


def test_operator_record_shape_mismatch():
    with pytest.raises(InvalidOperator):
        Operator.from_dict({'n': 3, 're': [[1.0, 0.0], [0.0, 1.0]]})


def test_entries_are_read_only(make_operator):
    T = make_operator([[1.0]])
    with pytest.raises(ValueError):
        T.entries[0, 0] = 2.0


def test_adjoint_acts_on_dual_space(make_operator):
    T = make_operator([[1.0, 2j], [0.0, 1.0]], p=3.0)
    assert T.adjoint().space_p == pytest.approx(1.5)
    np.testing.assert_array_equal(T.adjoint().entries, T.entries.conj().T)
    assert dual_exponent(2.0) == 2.0


def test_hilbert_norm_is_largest_singular_value(make_operator):
    a = np.array([[1.0, 2.0], [3.0, 4.0j]])
    est = norm_estimate(make_operator(a))
    assert est.exact
    assert est.value == pytest.approx(np.linalg.svd(a, compute_uv=False)[0], rel=1e-12)


def test_monomial_norm_is_exact_for_any_p(make_operator):
    a = np.array([[0.0, 3.0, 0.0], [0.0, 0.0, -2.0], [0.5, 0.0, 0.0]])
    est = norm_estimate(make_operator(a, p=3.0))
    assert est.exact
    assert est.value == 3.0


def test_power_iteration_reaches_sampled_maximum_on_nonnegative_matrix(make_operator):
    rng = np.random.default_rng(7)
    a = rng.uniform(0.0, 1.0, size=(5, 5))
    p = 3.0
    value = operator_norm(make_operator(a, p))
    xs = rng.uniform(0.0, 1.0, size=(4000, 5))
    sampled = np.max(lp_norm(xs @ a.T, p) / lp_norm(xs, p))
    assert value >= sampled * (1.0 - 1e-8)
    # Riesz-Thorin upper bound
    bound = np.max(a.sum(axis=0)) ** (1 / p) * np.max(a.sum(axis=1)) ** (1 - 1 / p)
    assert value <= bound * (1.0 + 1e-12)


def test_matrix_norm_matches_operator_norm(make_operator):
    a = np.array([[0.2, 0.1], [0.0, 0.3]])
    assert matrix_norm(a, 2.0) == pytest.approx(operator_norm(make_operator(a)))


def test_resolvent_inverts_shifted_operator(make_operator):
    T = make_operator([[0.5, 1.0], [0.0, -0.3]])
    lam = 1.2 + 0.4j
    R = resolvent(T, lam)
    np.testing.assert_allclose((lam * np.eye(2) - T.entries) @ R, np.eye(2), atol=1e-12)
    v = np.array([1.0, 2.0j])
    np.testing.assert_allclose(resolvent_apply(T, lam, v), R @ v, atol=1e-12)


def test_resolvent_at_eigenvalue_is_singular(diag_operator):
    with pytest.raises(SingularResolvent):
        resolvent(diag_operator(0.5, 0.25), 0.5)


def test_eigenvalues_and_radius(diag_operator):
    spec = eigenvalues(diag_operator(0.5, -0.75, 0.1j))
    assert spec.radius == pytest.approx(0.75)
    assert sorted(np.abs(spec.eigenvalues)) == pytest.approx([0.1, 0.5, 0.75])


def test_near_defective_matrix_warns(make_operator):
    T = make_operator([[0.5, 1.0], [0.0, 0.5 + 1e-12]])
    with pytest.warns(IllConditionedWarning):
        eigenvalues(T)


def test_dimension_cap():
    with pytest.raises(DimensionCap):
        eigenvalues(Operator.identity(257))


def test_restrict_to_invariant_range(diag_operator):
    T = diag_operator(1.0, 0.5)
    piece = restrict(T, np.diag([0.0, 1.0]))
    assert piece.dim == 1
    assert piece.entries[0, 0] == pytest.approx(0.5)


def test_power_entries(make_operator):
    T = make_operator([[0.0, 1.0], [0.0, 0.0]])
    np.testing.assert_array_equal(power_entries(T, 2), np.zeros((2, 2)))
