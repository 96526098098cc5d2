import math

import numpy as np
import pytest

from enums import ZooKind
from errors import BadParameters
from numkernel import eigenvalues
from stolz import StolzDomain
from utils import keyed_rng
from zoo import ZooSpec, generate, operator_id, stolz_patch, tangential_stolz_type


def assert_same_spectrum(actual, expected, atol):
    for lam in expected:
        assert np.min(np.abs(np.asarray(actual) - lam)) <= atol
    assert len(actual) == len(expected)


@pytest.mark.parametrize("kind", list(ZooKind))
def test_every_kind_generates(kind):
    base = ZooSpec(ZooKind.JORDAN, n=3) if kind == ZooKind.CONJUGATED else None
    T = generate(ZooSpec(kind, n=4, base=base))
    assert T.dim in (2, 3, 4)
    assert T.space_p == 2.0


def test_operator_id():
    assert operator_id(ZooSpec(ZooKind.ROTATION)) == "rotation(phi=1.5708)@p=2"
    spec = ZooSpec(ZooKind.JORDAN, lam=0.5 + 0.1j, n=3, delta=0.2).with_p(3)
    assert operator_id(spec) == "jordan(lam=0.5+0.1i,n=3,delta=0.2)@p=3"


def test_jordan_needs_eigenvalue_in_disc():
    with pytest.raises(BadParameters):
        generate(ZooSpec(ZooKind.JORDAN, lam=1.0))


def test_unknown_and_missing_keys():
    with pytest.raises(BadParameters):
        ZooSpec.from_dict({'kind': 'rotation', 'omega': 2.0})
    with pytest.raises(BadParameters):
        ZooSpec.from_dict({'kind': 'shift'})
    with pytest.raises(BadParameters):
        ZooSpec.from_dict({'phi': 1.0})


def test_record_round_trip():
    spec = ZooSpec(ZooKind.CONJUGATED, base=ZooSpec(ZooKind.JORDAN, lam=0.25j, n=2), cond_target=5.0, seed=4)
    back = ZooSpec.from_dict(spec.to_dict())
    assert back == spec
    assert operator_id(back) == operator_id(spec)


def test_diag_spectrum_lies_in_the_domain():
    T = generate(ZooSpec(ZooKind.DIAG_IN_STOLZ, omega=1.5, n=12, seed=9))
    domain = StolzDomain(1.5)
    assert all(domain.contains(lam) for lam in eigenvalues(T).eigenvalues)


def test_generation_is_seeded():
    spec = ZooSpec(ZooKind.DIAG_IN_STOLZ, n=5, seed=2)
    np.testing.assert_array_equal(generate(spec).entries, generate(spec).entries)
    other = generate(ZooSpec(ZooKind.DIAG_IN_STOLZ, n=5, seed=3)).entries
    assert not np.array_equal(generate(spec).entries, other)


def test_conjugation_keeps_the_spectrum():
    base = ZooSpec(ZooKind.DIAG_IN_STOLZ, n=4, seed=1)
    T = generate(ZooSpec(ZooKind.CONJUGATED, base=base, cond_target=20.0))
    expected = np.diag(generate(base).entries)
    assert_same_spectrum(eigenvalues(T).eigenvalues, expected, 1e-9)


def test_conjugation_arguments():
    with pytest.raises(BadParameters):
        generate(ZooSpec(ZooKind.CONJUGATED))
    with pytest.raises(BadParameters):
        generate(ZooSpec(ZooKind.CONJUGATED, base=ZooSpec(ZooKind.ROTATION), cond_target=0.5))


def test_tangential_average_spectrum():
    n = 8
    T = generate(ZooSpec(ZooKind.TANGENTIAL_AVERAGE, n=n))
    expected = 0.5 * (1 + np.exp(2j * math.pi * np.arange(n) / n))
    assert_same_spectrum(eigenvalues(T).eigenvalues, expected, 1e-12)
    assert tangential_stolz_type(8) == pytest.approx(1.0 / math.tan(math.pi / 16))


def test_stolz_patch_draws_inside():
    domain = StolzDomain(2.0)
    points = stolz_patch(domain, 20, keyed_rng(0, 'test', 0))
    assert points.size == 20
    assert all(domain.contains(z) for z in points)


def test_dimension_must_be_positive():
    with pytest.raises(BadParameters):
        generate(ZooSpec(ZooKind.JORDAN, n=0))
