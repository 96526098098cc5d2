"""
Stolz domains and graded Gauss-Legendre contours along their boundaries.

The boundary of Stolz_theta is parameterized as gamma(t) = 1 - r(t) e^{it} with
r(t) = 2 theta / (theta^2 - 1) * (theta cos t - 1) for |t| <= C_theta = arccos(1/theta).
The curve runs counterclockwise from the vertex back to the vertex.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from config import GAUSS_ORDER, GRADING_LEVELS, LEVELS_PER_REFINEMENT, MAX_DOUBLINGS, MAX_CONTOUR_NODES
from errors import NonConvergence, OutOfRange
from utils import write_csv

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StolzDomain:
    """{|z| < 1 : |1 - z| / (1 - |z|) < omega}"""
    omega: float

    def __post_init__(self):
        if not self.omega > 1.0:
            raise OutOfRange(f"Stolz type must exceed 1, got {self.omega}")

    @property
    def half_angle(self):
        return math.acos(1.0 / self.omega)

    @property
    def opening_angle(self):
        # angle convention of the theorem statements; geometry uses omega itself
        return 2.0 * self.half_angle

    def contains(self, z):
        z = complex(z)
        az = abs(z)
        return az < 1.0 and abs(1.0 - z) / (1.0 - az) < self.omega

    def contains_many(self, zs):
        zs = np.asarray(zs, dtype=np.complex128)
        az = np.abs(zs)
        inside = az < 1.0
        quotient = np.abs(1.0 - zs) / np.where(inside, 1.0 - az, 1.0)
        return inside & (quotient < self.omega)

    def in_closure(self, z):
        z = complex(z)
        if z == 1.0:
            return True
        az = abs(z)
        return az <= 1.0 and abs(1.0 - z) <= self.omega * (1.0 - az)


def contains(domain, z):
    return domain.contains(z)


@dataclass(frozen=True)
class LegacyStolzRegion:
    """Convex hull of {1} and the closed ball B(0, r)."""
    r: float

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise OutOfRange(f"Radius must lie in (0, 1), got {self.r}")

    def contains(self, z):
        z = complex(z)
        if abs(z) <= self.r:
            return True
        # triangle spanned by 1 and the tangent points r e^{+-i beta}, cos beta = r
        slope = self.r / math.sqrt(1.0 - self.r ** 2)
        return self.r ** 2 <= z.real <= 1.0 and abs(z.imag) <= (1.0 - z.real) * slope


# ==================== PARAMETERIZATION ====================

def c_theta(theta):
    return math.acos(1.0 / theta)


def radius_at(theta, t):
    return 2.0 * theta / (theta ** 2 - 1.0) * (theta * np.cos(t) - 1.0)


def gamma_point(theta, t):
    """gamma(t) and gamma'(t), vectorized in t."""
    t = np.asarray(t, dtype=float)
    r = radius_at(theta, t)
    dr = -2.0 * theta ** 2 / (theta ** 2 - 1.0) * np.sin(t)
    e = np.exp(1j * t)
    return 1.0 - r * e, -(dr + 1j * r) * e


@lru_cache(maxsize=8)
def _gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _graded_breakpoints(C, levels):
    """Breakpoints on [0, C] graded dyadically toward C."""
    inner = [C - C * 0.5 ** j for j in range(levels + 1)]
    return np.array(inner + [C])


@dataclass(frozen=True, eq=False)
class Contour:
    theta: float
    c_theta: float
    panels: tuple
    t: np.ndarray
    w: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    levels: int
    splits: int
    order: int

    @property
    def size(self):
        return self.t.size

    @property
    def key(self):
        return (self.theta, self.levels, self.splits, self.order)

    def integrate(self, values):
        """Quadrature of sum_j w_j dz_j values_j over the leading axis."""
        values = np.asarray(values)
        weights = self.w * self.dz
        return np.tensordot(weights, values, axes=(0, 0))

    def arc_length(self):
        return float(np.sum(self.w * np.abs(self.dz)))

    def refine(self):
        return build_contour(self.theta, self.levels + LEVELS_PER_REFINEMENT, self.splits * 2, self.order)

    def shell_index(self):
        """Dyadic shell of each node: j where C 2^-(j+1) <= C - |t| < C 2^-j."""
        d = (self.c_theta - np.abs(self.t)) / self.c_theta
        return np.floor(-np.log2(np.maximum(d, 1e-300))).astype(int)

    def nodes_csv(self, path):
        rows = zip(self.t, self.z.real, self.z.imag, self.dz.real, self.dz.imag, self.w)
        return write_csv(path, ['t', 're_z', 'im_z', 're_dz', 'im_dz', 'weight'], rows)


def boundary(contour, t):
    """Point gamma(t) and analytic derivative gamma'(t) on the contour."""
    if abs(t) > contour.c_theta:
        raise OutOfRange(f"|t| = {abs(t)} exceeds C_theta = {contour.c_theta}")
    z, dz = gamma_point(contour.theta, t)
    return complex(z), complex(dz)


def build_contour(theta, levels=GRADING_LEVELS, splits=1, order=GAUSS_ORDER):
    if not theta > 1.0:
        raise OutOfRange(f"Contour type must exceed 1, got {theta}")
    C = c_theta(theta)
    half = _graded_breakpoints(C, levels)
    cuts = []
    for a, b in zip(half[:-1], half[1:]):
        cuts.extend(np.linspace(a, b, splits + 1)[:-1])
    cuts.append(C)
    right = np.array(cuts)
    breaks = np.concatenate([-right[::-1], right[1:]])
    panels = tuple(zip(breaks[:-1], breaks[1:]))
    x, wx = _gauss_legendre(order)
    a = breaks[:-1, None]
    b = breaks[1:, None]
    t = (0.5 * (b - a) * x[None, :] + 0.5 * (a + b)).ravel()
    w = (0.5 * (b - a) * wx[None, :]).ravel()
    z, dz = gamma_point(theta, t)
    for arr in (t, w, z, dz):
        arr.setflags(write=False)
    return Contour(theta, C, panels, t, w, z, dz, levels, splits, order)


def make_contour(theta, tol, probe=0.0):
    """Refine until the Cauchy probe of dz/(z - probe) reaches its exact value within tol."""
    if not tol > 0:
        raise OutOfRange(f"tol must be positive, got {tol}")
    contour = build_contour(theta)
    inside = StolzDomain(theta).contains(probe)
    exact = 2j * math.pi if inside else 0.0
    for doubling in range(MAX_DOUBLINGS + 1):
        value = contour.integrate(1.0 / (contour.z - probe))
        error = abs(value - exact)
        if error <= tol:
            logger.debug(f"Contour theta={theta} settled after {doubling} refinements ({contour.size} nodes)")
            return contour
        if doubling < MAX_DOUBLINGS:
            contour = contour.refine()
            if contour.size > MAX_CONTOUR_NODES:
                break
    raise NonConvergence(f"Cauchy probe off by {error:.3e} with {contour.size} nodes")


def enclosing_legacy_radius(contour, grid=None):
    """Smallest r on the grid with every contour node inside LegacyStolzRegion(r)."""
    if grid is None:
        grid = np.linspace(0.01, 0.999, 990)
    for r in grid:
        region = LegacyStolzRegion(float(r))
        if all(region.contains(z) for z in contour.z):
            return float(r)
    return None


def arc_length_oracle(theta, points=1_000_000):
    """Midpoint rule for the arc length of the Stolz boundary."""
    C = c_theta(theta)
    h = 2.0 * C / points
    t = -C + h * (np.arange(points) + 0.5)
    _, dz = gamma_point(theta, t)
    return float(np.sum(np.abs(dz)) * h)
