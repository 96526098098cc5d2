"""
Partial-sum checkers for the series identities, multiplier sums and contour
estimates behind the square-function theorems.

Every series carries a closed-form tail bound plus a rounding allowance; an
identity is verified only when its deviation stays within ten times that bound.
Displayed constants that fail the check are reported with the pattern actually
observed.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.special

from config import CONTOUR_L1_KS, CONTOUR_L1_TOL, GRADING_LEVELS, IDENTITY_K, MULTIPLIER_HEAD
from enums import IdentitySuite, LemmaConvention, Verdict
from errors import BadParameters, NonConvergence, OutOfRange
from holo import HoloFn
from numkernel import EPS
from stolz import arc_length_oracle, build_contour
from utils import complex_powers, parallel_map

logger = logging.getLogger(__name__)

ROUNDING_FACTOR = 4.0
LEMMA_GRID = (0.5, 0.3 + 0.2j, -0.4, 0.6j, 0.1 - 0.7j, 0.0, 0.9, -0.54 + 0.72j, -0.9j)
LEMMA_ORDERS = range(0, 7)
PAIRING_GRID = (0.0, 0.5, 0.3j, -0.2 + 0.4j)
REPRESENTATION_GRID = (0.1, 0.5, 0.4 + 0.3j, -0.6j)


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    truncation_K: int
    tail_bound: float

    def __complex__(self):
        return complex(self.value)


@dataclass(frozen=True)
class IdentityReport:
    name: str
    grid: list
    max_abs_deviation: float
    truncation_K: int
    tail_bound: float
    verdict: Verdict
    pattern: str = ''
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'name': self.name,
            'grid': self.grid,
            'max_abs_deviation': self.max_abs_deviation,
            'truncation_K': self.truncation_K,
            'tail_bound': self.tail_bound,
            'verdict': self.verdict,
            'pattern': self.pattern,
            'details': self.details,
        }


def _series(terms, next_term, ratio):
    """Sum of terms with the bound |next_term| / (1 - ratio) plus rounding."""
    K = terms.size
    magnitude = float(np.sum(np.abs(terms)))
    tail = abs(next_term) / (1.0 - ratio) if ratio < 1.0 else math.inf
    tail += ROUNDING_FACTOR * (K + 1) * EPS * magnitude
    return SeriesValue(complex(np.sum(terms)), K, tail)


def _verdict(deviation, tail, pattern_if_off):
    if deviation <= 10.0 * tail:
        return Verdict.VERIFIED, ''
    return Verdict.DEVIATES, pattern_if_off


def _check_disk(u):
    if not abs(complex(u)) < 1.0:
        raise OutOfRange(f"|u| must be below 1, got {abs(complex(u))}")


# ==================== GEOMETRIC-SERIES LEMMA ====================

def _lemma_terms(u, n, K, convention):
    k = np.arange(1, K + 2, dtype=float)
    top = k + n - 1 if convention == LemmaConvention.SHIFTED else k
    coeffs = scipy.special.binom(top, n)
    return coeffs * (1.0 - u) ** (n + 1) * complex_powers(u, K + 1)


def lemma_identity(u, n, K=IDENTITY_K, convention=LemmaConvention.SHIFTED):
    """sum_{k=1}^K binom(., n) (1 - u)^{n+1} u^{k-1}; the shifted convention sums to 1."""
    _check_disk(u)
    if n < 0:
        raise BadParameters(f"n must be non-negative, got {n}")
    convention = LemmaConvention(convention)
    u = complex(u)
    terms = _lemma_terms(u, n, K, convention)
    if convention == LemmaConvention.SHIFTED:
        ratio = (K + 1.0 + n) / (K + 1.0) * abs(u)
    else:
        ratio = (K + 2.0) / max(K + 2.0 - n, 1.0) * abs(u)
    return _series(terms[:K], terms[K], ratio)


def lemma_limit(u, n, convention=LemmaConvention.SHIFTED):
    """Exact value of the infinite lemma series."""
    if LemmaConvention(convention) == LemmaConvention.SHIFTED or n == 0:
        return 1.0 + 0j
    return complex(u) ** (n - 1)


# ==================== RISING PRODUCTS ====================

def rising_product_identity(u, m, K=IDENTITY_K):
    """sum_k k(k+1)...(k+m-1) u^{k-1} against m!/(1 - u)^{m+1}."""
    _check_disk(u)
    if m < 1:
        raise BadParameters(f"m must be at least 1, got {m}")
    u = complex(u)
    k = np.arange(1, K + 2, dtype=float)
    terms = scipy.special.poch(k, m) * complex_powers(u, K + 1)
    ratio = (K + 1.0 + m) / (K + 1.0) * abs(u)
    return _series(terms[:K], terms[K], ratio), math.factorial(m) / (1.0 - u) ** (m + 1)


# ==================== PAIRING CONSTANT ====================

def pairing_constant_probe(z, m1, m2, K=IDENTITY_K):
    """sum_k sqrt(poch(k, m1) poch(k, m2)) z^{2k-2} (1 - z)^m (1 + z)^{-m}, m = m1 + m2."""
    _check_disk(z)
    z = complex(z)
    m = m1 + m2
    k = np.arange(1, K + 2, dtype=float)
    weights = np.sqrt(scipy.special.poch(k, m1) * scipy.special.poch(k, m2))
    terms = weights * complex_powers(z * z, K + 1) * (1.0 - z) ** m * (1.0 + z) ** -m
    ratio = math.sqrt((K + 1.0 + m1) * (K + 1.0 + m2)) / (K + 1.0) * abs(z) ** 2
    return _series(terms[:K], terms[K], ratio)


def pairing_constant_closed_form(z, m_half):
    """Value of the pairing constant when m1 = m2 = m_half."""
    z = complex(z)
    return math.factorial(m_half) * (1.0 - z) ** (m_half - 1) / (1.0 + z) ** (3 * m_half + 1)


# ==================== REPRESENTATION FORMULA ====================

def _phi(k, m, z):
    return k ** (m - 0.5) * (1.0 - z) ** m * complex_powers(z, k.size)


def representation_ratio(z, f, m1, m2, K=IDENTITY_K):
    """[sum_k m_k(z) phi_{m1}(k, z) phi_{m2}(k, z)] / f(z) with m_k exactly as displayed."""
    _check_disk(z)
    z = complex(z)
    fz = complex(f(z))
    if fz == 0:
        raise OutOfRange(f"f vanishes at z={z}")
    m = m1 + m2
    k = np.arange(1, K + 2, dtype=float)
    product = np.ones_like(k)
    for j in range(1, m + 1):
        product = product * (k + j) / k
    multipliers = (fz / math.factorial(m + 1) * (1.0 + z + z * z) ** (m + 1)
                   * product * k * (1.0 - z) * complex_powers(z, K + 1))
    terms = multipliers * _phi(k, m1, z) * _phi(k, m2, z) / fz
    ratio = (K + m + 2.0) / (K + 2.0) * abs(z) ** 3
    return _series(terms[:K], terms[K], ratio)


def representation_closed_form(z, m):
    """[1 - (1 - z^3)^{m+1}] / ((m + 1) z^3), expanded so that z = 0 is exact."""
    w = complex(z) ** 3
    return sum(scipy.special.comb(m + 1, j, exact=True) * (-1) ** (j + 1) * w ** (j - 1)
               for j in range(1, m + 2)) / (m + 1)


# ==================== STEP-2 PROBE ====================

@dataclass(frozen=True)
class Step2Probe:
    lhs: complex
    rhs: SeriesValue
    ratio: complex


def step2_ratio(z, k, m, J=IDENTITY_K):
    """(2k-2)^{m-1}(1-z)^{m-1}z^{2k-2} against 2(1+z) sum_{j>=k} (k-1)^{m-1}(1-z)^m z^{2j-2}."""
    _check_disk(z)
    if k < 2:
        raise BadParameters(f"k must be at least 2, got {k}")
    z = complex(z)
    lhs = (2 * k - 2) ** (m - 1) * (1.0 - z) ** (m - 1) * z ** (2 * k - 2)
    scale = 2.0 * (1.0 + z) * (k - 1) ** (m - 1) * (1.0 - z) ** m * z ** (2 * k - 2)
    terms = scale * complex_powers(z * z, J + 1)
    rhs = _series(terms[:J], terms[J], abs(z) ** 2)
    ratio = lhs / rhs.value if rhs.value != 0 else complex(math.nan)
    return Step2Probe(lhs, rhs, ratio)


# ==================== MULTIPLIERS ====================

def _multiplier_sum(n, m, head=MULTIPLIER_HEAD):
    k = np.arange(n, n + head, dtype=float)
    K = n + head - 1
    if m == 3:
        partial = float(np.sum(n / k ** 2))
        upper, lower = n / K, n / (K + 1.0)
    else:
        partial = float(np.sum(n * (k - n + 1) / k ** 3))
        upper = n * (1.0 / K - (n - 1) / (2.0 * K ** 2))
        lower = n * (1.0 / (K + 1.0) - (n - 1) / (2.0 * (K + 1.0) ** 2))
    return SeriesValue(partial + 0.5 * (upper + lower), head, 0.5 * abs(upper - lower) + ROUNDING_FACTOR * head * EPS * partial)


def multiplier_bounds(n_max, m):
    """Multiplier sums for n = 1..n_max: n sum_{k>=n} k^-2 (m=3), n sum_{k>=n} (k-n+1) k^-3 (m=4)."""
    if m not in (3, 4):
        raise BadParameters(f"Multiplier sums exist for m in (3, 4), got {m}")
    if n_max < 1:
        raise BadParameters(f"n_max must be positive, got {n_max}")
    return [_multiplier_sum(n, m) for n in range(1, n_max + 1)]


def multiplier_oracle(n, m):
    """Hurwitz-zeta form of the same sums."""
    if m == 3:
        return n * scipy.special.zeta(2, n)
    return n * (scipy.special.zeta(2, n) - (n - 1) * scipy.special.zeta(3, n))


# ==================== CONTOUR ESTIMATE ====================

def _contour_l1(contour, k):
    r = np.abs(contour.z)
    integrand = k * np.exp((k - 1) * np.log(np.maximum(r, 1e-300))) * np.abs(contour.dz) * contour.w
    return float(np.sum(integrand))


def contour_l1_bound(theta, k, tol=CONTOUR_L1_TOL, max_refinements=8):
    """Quadrature of k |gamma(t)|^{k-1} |gamma'(t)| over the Stolz boundary."""
    if k < 1:
        raise BadParameters(f"k must be positive, got {k}")
    levels = max(GRADING_LEVELS, int(math.ceil(math.log2(k))) + 4)
    contour = build_contour(theta, levels=levels)
    value = _contour_l1(contour, k)
    for _ in range(max_refinements):
        contour = contour.refine()
        refined = _contour_l1(contour, k)
        if abs(refined - value) <= tol * max(refined, 1.0):
            return refined
        value = refined
    raise NonConvergence(f"Contour L1 estimate for k={k} still moving at {contour.size} nodes")


# ==================== SUITES ====================

def lemma_suite(K=IDENTITY_K, convention=LemmaConvention.SHIFTED):
    convention = LemmaConvention(convention)
    grid, deviation, tail, exact_dev = [], 0.0, 0.0, 0.0
    for u in LEMMA_GRID:
        for n in LEMMA_ORDERS:
            s = lemma_identity(u, n, K, convention)
            grid.append({'u': complex(u), 'n': n, 'value': s.value})
            deviation = max(deviation, abs(s.value - 1.0))
            exact_dev = max(exact_dev, abs(s.value - lemma_limit(u, n, convention)))
            tail = max(tail, s.tail_bound)
    verdict, pattern = _verdict(deviation, tail, 'sum equals u^(n-1) for n >= 1')
    details = {'deviation_from_observed_pattern': exact_dev}
    if convention == LemmaConvention.SHIFTED:
        printed = lemma_suite(K, LemmaConvention.PRINTED)
        details['printed_convention'] = {
            'max_abs_deviation': printed.max_abs_deviation,
            'verdict': printed.verdict,
            'pattern': printed.pattern,
            'deviation_from_observed_pattern': printed.details['deviation_from_observed_pattern'],
        }
    return IdentityReport(f"lemma_{convention.value}", grid, deviation, K, tail, verdict, pattern, details)


def rising_suite(K=IDENTITY_K):
    grid, deviation, tail = [], 0.0, 0.0
    for u in (0.5, 0.0, 0.4j, -0.3 + 0.3j):
        for m in (1, 2, 3):
            lhs, rhs = rising_product_identity(u, m, K)
            grid.append({'u': complex(u), 'm': m, 'lhs': lhs.value, 'rhs': rhs})
            deviation = max(deviation, abs(lhs.value - rhs))
            tail = max(tail, lhs.tail_bound)
    verdict, pattern = _verdict(deviation, tail, 'partial sums disagree with m!/(1-u)^(m+1)')
    return IdentityReport('rising_product', grid, deviation, K, tail, verdict, pattern)


def pairing_suite(K=IDENTITY_K):
    grid, deviation, tail, corrected = [], 0.0, 0.0, 0.0
    for z in PAIRING_GRID:
        for m1, m2 in ((1, 1), (1, 2), (2, 2)):
            s = pairing_constant_probe(z, m1, m2, K)
            claimed = math.factorial(m1 + m2)
            grid.append({'z': complex(z), 'm1': m1, 'm2': m2, 'value': s.value, 'claimed': claimed})
            deviation = max(deviation, abs(s.value - claimed))
            tail = max(tail, s.tail_bound)
            if m1 == m2:
                corrected = max(corrected, abs(s.value - pairing_constant_closed_form(z, m1)))
    verdict, pattern = _verdict(deviation, tail,
                                "value depends on z; for m1 = m2 = m' it equals m'! (1-z)^(m'-1) / (1+z)^(3m'+1)")
    return IdentityReport('pairing_constant', grid, deviation, K, tail, verdict, pattern,
                          {'deviation_from_observed_pattern': corrected})


def representation_suite(K=IDENTITY_K):
    f, g = HoloFn.polynomial([2.0, 1.0, 0.5j]), HoloFn.cayley()
    cube_root = np.exp(2j * math.pi / 3)
    grid, deviation, tail = [], 0.0, 0.0
    closed, f_spread, rotation_spread = 0.0, 0.0, 0.0
    for z in REPRESENTATION_GRID:
        for m1, m2 in ((1, 1), (1, 2)):
            a = representation_ratio(z, f, m1, m2, K)
            b = representation_ratio(z, g, m1, m2, K)
            c = representation_ratio(z * cube_root, f, m1, m2, K)
            grid.append({'z': complex(z), 'm1': m1, 'm2': m2, 'ratio': a.value})
            deviation = max(deviation, abs(a.value - 1.0))
            tail = max(tail, a.tail_bound, b.tail_bound, c.tail_bound)
            closed = max(closed, abs(a.value - representation_closed_form(z, m1 + m2)))
            f_spread = max(f_spread, abs(a.value - b.value))
            rotation_spread = max(rotation_spread, abs(a.value - c.value))
    verdict, pattern = _verdict(deviation, tail, 'ratio equals [1 - (1 - z^3)^(m+1)] / ((m+1) z^3), independent of f')
    return IdentityReport('representation', grid, deviation, K, tail, verdict, pattern, {
        'deviation_from_observed_pattern': closed,
        'f_independence': f_spread,
        'z_cubed_dependence': rotation_spread,
    })


def step2_suite(J=IDENTITY_K):
    grid, deviation, tail, ratio_dev = [], 0.0, 0.0, 0.0
    for z in (0.5, 0.3j, -0.4 + 0.2j):
        for k in (2, 3, 5):
            for m in (1, 2, 3):
                probe = step2_ratio(z, k, m, J)
                grid.append({'z': complex(z), 'k': k, 'm': m, 'ratio': probe.ratio})
                deviation = max(deviation, abs(probe.lhs - probe.rhs.value))
                tail = max(tail, probe.rhs.tail_bound)
                ratio_dev = max(ratio_dev, abs(probe.ratio - 2.0 ** (m - 2)))
    verdict, pattern = _verdict(deviation, tail, 'lhs / rhs = 2^(m-2)')
    return IdentityReport('step2', grid, deviation, J, tail, verdict, pattern,
                          {'deviation_from_observed_pattern': ratio_dev})


def multiplier_suite(n_max=200):
    grid, deviation, tail = [], 0.0, 0.0
    argmax = {}
    basel = math.pi ** 2 / 6.0
    for m in (3, 4):
        sums = multiplier_bounds(n_max, m)
        values = [s.value for s in sums]
        argmax[m] = int(np.argmax(values)) + 1
        grid.append({'m': m, 'n_max': n_max, 'sup': max(values), 'argmax': argmax[m], 'last': values[-1]})
        deviation = max(deviation, abs(values[0] - basel))
        tail = max(tail, max(s.tail_bound for s in sums))
    verdict, pattern = _verdict(deviation, tail, 'n = 1 sum differs from pi^2/6')
    if verdict == Verdict.VERIFIED and any(a > 2 for a in argmax.values()):
        verdict, pattern = Verdict.DEVIATES, 'supremum not attained at small n'
    return IdentityReport('multipliers', grid, deviation, MULTIPLIER_HEAD, tail, verdict, pattern)


def contour_suite(thetas=(2.0, 3.0), ks=tuple(CONTOUR_L1_KS), threads=1):
    grid, deviation, spreads = [], 0.0, []
    for theta in thetas:
        values = parallel_map(lambda k: contour_l1_bound(theta, k), ks, threads)
        arc = arc_length_oracle(theta)
        deviation = max(deviation, abs(values[0] - arc) / arc)
        later = [v for k, v in zip(ks, values) if k >= 10] or values
        spreads.append(max(later) / min(later))
        grid.append({'theta': theta, 'k': list(ks), 'values': values, 'arc_length': arc})
    tail = CONTOUR_L1_TOL
    verdict, pattern = _verdict(deviation, max(tail, 1e-7), 'k = 1 value differs from the arc length')
    if verdict == Verdict.VERIFIED and max(spreads) > 2.0:
        verdict, pattern = Verdict.DEVIATES, 'sequence over k not uniformly bounded'
    return IdentityReport('contour_l1', grid, deviation, 0, tail, verdict, pattern, {'max_spread': max(spreads)})


SUITES = {
    IdentitySuite.LEMMA: lambda K: [lemma_suite(K)],
    IdentitySuite.RISING: lambda K: [rising_suite(K)],
    IdentitySuite.PAIRING: lambda K: [pairing_suite(K)],
    IdentitySuite.REPRESENTATION: lambda K: [representation_suite(K)],
    IdentitySuite.STEP2: lambda K: [step2_suite(K)],
    IdentitySuite.MULTIPLIERS: lambda K: [multiplier_suite()],
    IdentitySuite.CONTOUR: lambda K: [contour_suite()],
}


def run_suites(which=IdentitySuite.ALL, K=IDENTITY_K):
    which = IdentitySuite(which)
    names = [s for s in SUITES] if which == IdentitySuite.ALL else [which]
    reports = []
    for name in names:
        batch = SUITES[name](K)
        reports.extend(batch)
        logger.info(f"Identity suite {name.value}: {', '.join(r.verdict.value for r in batch)}")
    return reports
