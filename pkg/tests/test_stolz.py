import math

import numpy as np
import pytest

from errors import OutOfRange
from stolz import (
    LegacyStolzRegion, StolzDomain, arc_length_oracle, boundary, build_contour, c_theta, enclosing_legacy_radius,
    gamma_point, make_contour,
)


def test_domain_membership():
    domain = StolzDomain(2.0)
    assert domain.contains(0.0)
    assert domain.contains(0.5)
    assert not domain.contains(0.5 + 0.5j)  # |1-z| / (1-|z|) is about 2.41
    assert not domain.contains(1.0)
    assert domain.in_closure(1.0)
    np.testing.assert_array_equal(domain.contains_many([0.0, 0.5 + 0.5j, 1.5]), [True, False, False])


def test_domain_needs_omega_above_one():
    with pytest.raises(OutOfRange):
        StolzDomain(1.0)


def test_opening_angle():
    assert StolzDomain(2.0).opening_angle == pytest.approx(2.0 * math.pi / 3.0)


def test_boundary_lies_on_the_level_set():
    theta = 3.0
    t = np.linspace(-c_theta(theta) * 0.999, c_theta(theta) * 0.999, 101)
    z, _ = gamma_point(theta, t)
    np.testing.assert_allclose(np.abs(1 - z), theta * (1 - np.abs(z)), atol=1e-12)


def test_boundary_endpoints_meet_the_vertex():
    contour = build_contour(2.0)
    z, _ = boundary(contour, contour.c_theta)
    assert abs(z - 1.0) < 1e-12
    with pytest.raises(OutOfRange):
        boundary(contour, contour.c_theta + 0.1)


@pytest.mark.parametrize("z0", [0.0, -0.2, 0.3 + 0.1j])
def test_cauchy_probe_inside(z0):
    contour = make_contour(2.0, 1e-10, probe=z0)
    value = contour.integrate(1.0 / (contour.z - z0))
    assert abs(value - 2j * math.pi) <= 1e-10


def test_cauchy_probe_outside():
    contour = make_contour(2.0, 1e-10, probe=2.0)
    assert abs(contour.integrate(1.0 / (contour.z - 2.0))) <= 1e-10


def test_refine_adds_nodes():
    contour = build_contour(2.0)
    finer = contour.refine()
    assert finer.size > contour.size
    assert finer.levels == contour.levels + 2


def test_arc_length_agrees_with_midpoint_rule():
    contour = build_contour(2.0)
    assert contour.arc_length() == pytest.approx(arc_length_oracle(2.0, 200_000), rel=1e-8)


def test_legacy_region_membership():
    region = LegacyStolzRegion(0.5)
    assert region.contains(0.0)
    assert region.contains(0.9)
    assert not region.contains(-0.9)
    with pytest.raises(OutOfRange):
        LegacyStolzRegion(1.0)


def test_enclosing_legacy_radius_covers_the_contour():
    contour = build_contour(2.0)
    r = enclosing_legacy_radius(contour)
    assert r is not None
    # the vertex cone of the legacy region must open at least as wide as Stolz_2
    assert math.sin(c_theta(2.0)) - 0.01 <= r < 1.0


def test_contour_csv(tmp_path):
    path = build_contour(2.0).nodes_csv(str(tmp_path / "nodes.csv"))
    header = open(path, encoding="utf-8").readline().strip()
    assert header == "t,re_z,im_z,re_dz,im_dz,weight"
