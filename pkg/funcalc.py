"""
Functional calculus f(T): contour quadrature over the Stolz boundary, the
Cayley-regularized extension and an eigendecomposition oracle.
"""
import logging
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from config import (
    CALC_MAX_REFINEMENTS, CALC_TOL, DEFAULT_SEED, HINF_BUDGET, HINF_POLY_DEGREE, HINF_RANDOM_POLYS,
    LEMMA_DECAY_FACTOR, ORACLE_COND_CAP, RESOLVENT_CACHE_BYTES, SINGULAR_SIGMA_MIN,
)
from diagnostics import has_vertex_eigenvalue, stolz_type_of_spectrum
from enums import CalcMethod
from errors import (
    IllConditioned, NonConvergence, NotAdmissible, NotRegularizable, SpectrumOutsideContour,
)
from holo import HoloFn, admissible, sup_norm
from numkernel import EPS, Operator, eigendecomposition, matrix_norm, operator_norm, resolvent
from stolz import StolzDomain, build_contour
from utils import keyed_rng, lp_norm, pairwise_sum, parallel_map

logger = logging.getLogger(__name__)

HINF_FAMILIES = ('monomials', 'random_polys', 'dd_functions', 'pairings')


@dataclass(frozen=True)
class CalcResult:
    value: Operator
    method: CalcMethod
    quad_error_est: float
    contour_theta: float
    nodes: int = 0

    def to_dict(self):
        return {
            'method': self.method,
            'quad_error_est': self.quad_error_est,
            'contour_theta': self.contour_theta,
            'nodes': self.nodes,
            'value': self.value.to_dict(),
        }


class ContourCalculus:
    """Node resolvents of one operator on the contours of one Stolz type, cached per level.

    The cache holds at most cache_size stacks and at most cache_bytes in total,
    evicting least recently used levels first.
    """

    def __init__(self, T, theta, cache_size=3, cache_bytes=RESOLVENT_CACHE_BYTES):
        self.T = T
        self.theta = theta
        self.base = build_contour(theta)
        self._cache = OrderedDict()
        self._cache_size = cache_size
        self._cache_bytes = cache_bytes
        self._lock = threading.Lock()

    def resolvents(self, contour):
        with self._lock:
            if contour.key in self._cache:
                self._cache.move_to_end(contour.key)
                return self._cache[contour.key]
        stack = np.stack([resolvent(self.T, z) for z in contour.z])
        with self._lock:
            self._cache[contour.key] = stack
            while len(self._cache) > 1 and (len(self._cache) > self._cache_size
                                             or self.cached_bytes > self._cache_bytes):
                evicted, _ = self._cache.popitem(last=False)
                logger.debug(f"Resolvent cache: evicted level {evicted}")
        return stack

    @property
    def cached_bytes(self):
        return sum(stack.nbytes for stack in self._cache.values())

    @property
    def cached_levels(self):
        return tuple(self._cache)

    def integrate(self, f, contour):
        stack = self.resolvents(contour)
        weights = contour.w * contour.dz * f(contour.z) / (2j * math.pi)
        order = contour.order
        panels = [np.tensordot(weights[i:i + order], stack[i:i + order], axes=(0, 0))
                  for i in range(0, contour.size, order)]
        return pairwise_sum(panels)

    def evaluate(self, f, tol):
        contour = self.base
        value = self.integrate(f, contour)
        error = math.inf
        for _ in range(CALC_MAX_REFINEMENTS):
            finer = contour.refine()
            refined = self.integrate(f, finer)
            error = matrix_norm(refined - value, self.T.space_p)
            contour, value = finer, refined
            if error <= tol:
                return value, error, contour
        raise NonConvergence(f"Contour quadrature of {f.label} still moving by {error:.3e} "
                             f"after {CALC_MAX_REFINEMENTS} refinements")


def check_enclosed(T, theta):
    if has_vertex_eigenvalue(T):
        raise SpectrumOutsideContour("Eigenvalue at the vertex z=1; remove it with ergodic_split first")
    stolz_type = stolz_type_of_spectrum(T)
    if not stolz_type < theta:
        raise SpectrumOutsideContour(f"Spectral Stolz type {stolz_type:.6g} is not below theta={theta}")
    return stolz_type


def calc_contour(T, f, theta, tol=CALC_TOL, calculus=None):
    """f(T) = (2 pi i)^{-1} times the integral of f(z) R(z, T) over the boundary of Stolz_theta."""
    check_enclosed(T, theta)
    calculus = calculus or ContourCalculus(T, theta)
    cert = admissible(f, calculus.base)
    if not cert.integrable:
        raise NotAdmissible(f"{f.label}: f(z)/(1-z) not integrable on Stolz_{theta} boundary ({cert.flag})")
    value, error, contour = calculus.evaluate(f, tol)
    return CalcResult(Operator(value, T.space_p), CalcMethod.CONTOUR, error, theta, contour.size)


def cayley_inverse(T):
    """e(T)^{-1} = (I - T)^{-1} (I + T), after checking both factors are invertible."""
    eye = np.eye(T.dim)
    minus = eye - T.entries
    plus = eye + T.entries
    for name, m in (('I - T', minus), ('I + T', plus)):
        smin = scipy.linalg.svdvals(m).min()
        if smin <= SINGULAR_SIGMA_MIN:
            raise NotRegularizable(f"{name} is numerically singular (sigma_min={smin:.3e})")
    return scipy.linalg.solve(minus, plus)


def calc_regularized(T, f, theta, tol=CALC_TOL, calculus=None):
    """f(T) = e(T)^{-1} (e f)(T) with e(z) = (1 - z)/(1 + z)."""
    einv = cayley_inverse(T)
    inner = calc_contour(T, HoloFn.cayley().multiply(f), theta, tol, calculus)
    value = einv @ inner.value.entries
    error = matrix_norm(einv, T.space_p) * inner.quad_error_est
    return CalcResult(Operator(value, T.space_p), CalcMethod.REGULARIZED, error, theta, inner.nodes)


def calc_eigen_oracle(T, f):
    """V diag(f(lambda_j)) V^{-1} for diagonalizable T."""
    w, v, cond = eigendecomposition(T)
    if not cond <= ORACLE_COND_CAP:
        raise IllConditioned(f"Eigenvector condition {cond:.3e} exceeds {ORACLE_COND_CAP:.0e}")
    fw = np.asarray(f(w), dtype=np.complex128)
    value = scipy.linalg.solve(v.T, (v * fw[None, :]).T).T
    return CalcResult(Operator(value, T.space_p), CalcMethod.EIGEN_ORACLE,
                      float(EPS * cond * np.max(np.abs(fw))), math.nan)


def calc(T, f, theta, tol=CALC_TOL, calculus=None):
    """Contour path when f is admissible, regularized path otherwise."""
    try:
        return calc_contour(T, f, theta, tol, calculus)
    except NotAdmissible:
        logger.debug(f"{f.label} not admissible on Stolz_{theta}; using the regularized path")
        return calc_regularized(T, f, theta, tol, calculus)


# ==================== H-INFINITY CONSTANT ====================

@dataclass(frozen=True)
class HinfEstimate:
    value: float
    by_family: dict
    theta: float
    budget: int
    functions: int
    vertex_fallback: bool = False
    ratios: tuple = field(default=(), repr=False)

    def to_dict(self):
        return {
            'value': self.value,
            'by_family': self.by_family,
            'theta': self.theta,
            'budget': self.budget,
            'functions': self.functions,
            'vertex_fallback': self.vertex_fallback,
        }


def dd_function(k):
    """k (1 - z) z^{k-1}"""
    coeffs = np.zeros(k + 1)
    coeffs[k - 1] = k
    coeffs[k] = -k
    return HoloFn.polynomial(coeffs, label=f"dd_{k}")


def probe_functions(family, budget, domain, seed=DEFAULT_SEED):
    if family == 'monomials':
        return [HoloFn.monomial_power(n) for n in range(budget + 1)]
    if family == 'dd_functions':
        return [dd_function(k) for k in range(1, budget + 1)]
    if family == 'random_polys':
        out = []
        for i in range(HINF_RANDOM_POLYS):
            rng = keyed_rng(seed, 'hinf-poly', i)
            coeffs = rng.standard_normal(HINF_POLY_DEGREE + 1) + 1j * rng.standard_normal(HINF_POLY_DEGREE + 1)
            f = HoloFn.polynomial(coeffs, label=f"random_{i}")
            out.append(HoloFn.polynomial(coeffs / sup_norm(f, domain), label=f"random_{i}"))
        return out
    if family == 'pairings':
        from basis import pairing_polynomial
        return [pairing_polynomial(n) for n in range(1, budget + 1)]
    raise ValueError(f"Unknown test-function family {family!r}")


def hinf_constant_estimate(T, nu, families=HINF_FAMILIES, budget=HINF_BUDGET, seed=DEFAULT_SEED,
                           threads=1, tol=CALC_TOL):
    """Lower estimate of the H-infinity(Stolz_nu) calculus constant over test families."""
    domain = StolzDomain(nu)
    if has_vertex_eigenvalue(T):
        logger.warning("Eigenvalue at the vertex: only monomials, evaluated directly")
        ratios = [operator_norm(Operator(f.apply_direct(T), T.space_p)) / sup_norm(f, domain)
                  for f in probe_functions('monomials', budget, domain)]
        value = max(ratios)
        return HinfEstimate(value, {'monomials': value}, math.nan, budget, len(ratios), True, tuple(ratios))
    stolz_type = stolz_type_of_spectrum(T)
    if not stolz_type < nu:
        raise SpectrumOutsideContour(f"Spectral Stolz type {stolz_type:.6g} is not below nu={nu}")
    theta = math.sqrt(stolz_type * nu)
    calculus = ContourCalculus(T, theta)
    jobs = [(name, f) for name in families for f in probe_functions(name, budget, domain, seed)]

    def ratio(job):
        name, f = job
        bound = sup_norm(f, domain)
        if bound == 0.0:
            return name, 0.0
        return name, operator_norm(calc(T, f, theta, tol, calculus).value) / bound

    results = parallel_map(ratio, jobs, threads)
    by_family = {}
    for name, r in results:
        by_family[name] = max(by_family.get(name, 0.0), r)
    ratios = tuple(r for _, r in results)
    return HinfEstimate(max(ratios), by_family, theta, budget, len(ratios), False, ratios)


# ==================== CONVERGENCE LEMMA ====================

@dataclass(frozen=True)
class ConvergenceCheck:
    powers: tuple
    norms: tuple
    decaying: bool


def convergence_lemma_check(T, theta, f=None, powers=(1, 2, 4, 8, 16, 32, 64, 128, 256), vectors=4,
                            seed=DEFAULT_SEED, tol=CALC_TOL):
    """||f_n(T) e(T) y|| for f_n(z) = z^n f(z) on random vectors y."""
    f = f or HoloFn.constant(1.0)
    rng = keyed_rng(seed, 'lemma-vectors', 0)
    ys = rng.standard_normal((vectors, T.dim)) + 1j * rng.standard_normal((vectors, T.dim))
    eye = np.eye(T.dim)
    ey = scipy.linalg.solve(eye + T.entries, (eye - T.entries) @ ys.T)
    calculus = ContourCalculus(T, theta)
    norms = []
    for n in powers:
        fn = HoloFn.monomial_power(n).multiply(f)
        value = calc_regularized(T, fn, theta, tol, calculus).value.entries
        norms.append(float(np.max(lp_norm((value @ ey).T, T.space_p))))
    decaying = norms[-1] <= LEMMA_DECAY_FACTOR * max(norms[0], 1e-300) or norms[-1] <= 1e-12
    return ConvergenceCheck(tuple(powers), tuple(norms), decaying)
