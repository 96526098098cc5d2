"""
Ritt diagnostics: resolvent constant, power and discrete-derivative bounds,
spectral Stolz type, R-bound estimation and the ergodic splitting.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from config import (
    DD_HORIZON, DD_LINEAR_SLOPE, DD_RITT_SLOPE, DEFAULT_SEED, ERGODIC_TOL, EXACT_ENUMERATION_MAX,
    MC_BATCHES, OVERFLOW, POWER_GROWTH_RATIO, POWER_HORIZON, PROJECTOR_NODES, RBOUND_ASCENT_STEP,
    RBOUND_ASCENT_STEPS, RBOUND_FAMILY_SIZE, RBOUND_SIGN_SAMPLES, RBOUND_TRIALS, RITT_ANGLES, RITT_GROWTH_RATIO,
    RITT_GROWTH_WINDOW, RITT_RADII_J, SEMISIMPLE_TOL, TANGENTIAL_STOLZ_TYPE, VERTEX_TOL,
)
from enums import Classification, SignKind, Trend
from errors import BadParameters, EmptyFamily, NonSemisimple, SingularResolvent
from numkernel import Operator, eigenvalues, norm_estimate, operator_norm, resolvent
from utils import (
    keyed_rng, lp_norm, pairwise_sum, parallel_map, random_signs, random_unit_vectors, write_csv,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RittEstimate:
    value: float
    growing: bool
    radii: tuple
    per_radius: tuple
    skipped: int
    grid: tuple = field(default=(), repr=False)

    def to_dict(self):
        return {
            'value': self.value,
            'growing': self.growing,
            'radii': list(self.radii),
            'per_radius': list(self.per_radius),
            'skipped': self.skipped,
        }


@dataclass(frozen=True)
class PowerBound:
    value: float
    horizon: int
    trend: Trend
    overflow: bool
    norms: tuple = field(default=(), repr=False)

    def to_dict(self):
        return {'value': self.value, 'horizon': self.horizon, 'trend': self.trend, 'overflow': self.overflow}


@dataclass(frozen=True)
class DDBound:
    value: float
    horizon: int
    slope: float
    overflow: bool = False
    terms: tuple = field(default=(), repr=False)

    def to_dict(self):
        return {'value': self.value, 'horizon': self.horizon, 'slope': self.slope, 'overflow': self.overflow}


@dataclass(frozen=True)
class RBoundEstimate:
    value: float
    stderr: float
    samples: int
    sign_kind: SignKind
    family_size: int
    exact_signs: bool = False
    largest_norm: float = math.nan
    randomized: float = math.nan  # best randomized ratio, before taking the max with largest_norm


@dataclass(frozen=True)
class DiagnosticsReport:
    ritt: RittEstimate
    power: PowerBound
    dd: DDBound
    stolz_type_spec: float
    rbound: Optional[RBoundEstimate]
    classification: Classification

    @property
    def ritt_constant(self):
        return self.ritt.value

    @property
    def power_bound(self):
        return self.power.value

    @property
    def dd_bound(self):
        return self.dd.value

    @property
    def dd_trend(self):
        return self.dd.slope

    def to_dict(self):
        return {
            'ritt_constant': self.ritt,
            'power_bound': self.power,
            'dd_bound': self.dd,
            'dd_trend': self.dd.slope,
            'stolz_type_spec': self.stolz_type_spec,
            'rbound': self.rbound,
            'classification': self.classification,
        }


# ==================== RITT CONSTANT ====================

def default_radii(J=RITT_RADII_J):
    return tuple(1.0 + 2.0 ** -j for j in range(1, J + 1))


def default_angles(count=RITT_ANGLES, J=RITT_RADII_J):
    uniform = np.linspace(-math.pi, math.pi, count, endpoint=False)
    near_one = [s * math.pi * 2.0 ** -i for i in range(1, J + 1) for s in (1.0, -1.0)]
    return tuple(np.unique(np.concatenate([uniform, near_one])))


def ritt_constant(T, radii=None, angles=None, threads=1):
    """Lower estimate of sup_{|lambda|>1} ||(lambda - 1) R(lambda, T)||."""
    radii = tuple(radii) if radii is not None else default_radii()
    angles = np.asarray(angles if angles is not None else default_angles())

    def sweep(rho):
        rows, skipped = [], 0
        for phi in angles:
            lam = rho * np.exp(1j * phi)
            try:
                m = (lam - 1.0) * resolvent(T, lam)
            except SingularResolvent:
                logger.warning(f"Skipping lambda={lam:.6g}: resolvent is singular")
                skipped += 1
                continue
            rows.append((lam, operator_norm(Operator(m, T.space_p))))
        return rows, skipped

    results = parallel_map(sweep, radii, threads)
    grid = tuple(row for rows, _ in results for row in rows)
    per_radius = tuple(max((v for _, v in rows), default=0.0) for rows, _ in results)
    skipped = sum(s for _, s in results)
    value = max(per_radius, default=0.0)
    growing = False
    if len(per_radius) > RITT_GROWTH_WINDOW:
        growing = per_radius[-1] > RITT_GROWTH_RATIO * per_radius[-1 - RITT_GROWTH_WINDOW]
    return RittEstimate(value, growing, radii, per_radius, skipped, grid)


def ritt_grid_csv(estimate, path):
    rows = ((lam.real, lam.imag, v) for lam, v in estimate.grid)
    return write_csv(path, ['re_lambda', 'im_lambda', 'norm'], rows)


# ==================== POWERS ====================

def power_bound(T, N=POWER_HORIZON):
    """max_{1<=n<=N} ||T^n|| from sequential products reset at squaring checkpoints."""
    if N < 1:
        raise BadParameters(f"Horizon must be positive, got {N}")
    a = T.entries
    current = a.copy()
    checkpoint = a.copy()
    norms = []
    overflow = False
    for n in range(1, N + 1):
        if n > 1:
            current = current @ a
            if n & (n - 1) == 0:
                checkpoint = checkpoint @ checkpoint
                current = checkpoint.copy()
        value = operator_norm(Operator(current, T.space_p))
        norms.append(value)
        if not math.isfinite(value) or value > OVERFLOW:
            overflow = True
            break
    half = len(norms) // 2
    trend = Trend.BOUNDED
    if overflow or (half and max(norms[half:]) > POWER_GROWTH_RATIO * max(norms[:half])):
        trend = Trend.GROWING
    return PowerBound(max(norms), N, trend, overflow, tuple(norms))


def _top_decade_slope(terms):
    K = len(terms)
    lo = max(1, K // 10)
    k = np.arange(lo, K + 1, dtype=float)
    vals = np.asarray(terms[lo - 1:], dtype=float)
    if k.size < 2 or not np.any(vals > 0):
        return 0.0
    return float(np.polyfit(np.log(k), np.log(np.maximum(vals, 1e-300)), 1)[0])


def dd_bound(T, K=DD_HORIZON):
    """max_{1<=k<=K} k ||T^{k-1}(I - T)|| and its log-log slope over the top decade."""
    if K < 1:
        raise BadParameters(f"Horizon must be positive, got {K}")
    a = T.entries
    q = np.eye(T.dim) - a
    terms = []
    overflow = False
    for k in range(1, K + 1):
        if k > 1:
            q = a @ q
        value = k * operator_norm(Operator(q, T.space_p))
        terms.append(value)
        if not math.isfinite(value) or value > OVERFLOW:
            overflow = True
            break
    return DDBound(max(terms), K, _top_decade_slope(terms), overflow, tuple(terms))


# ==================== SPECTRUM ====================

def stolz_type_of_spectrum(T, vertex_tol=VERTEX_TOL):
    """max |1 - lambda| / (1 - |lambda|) over eigenvalues away from the vertex."""
    worst = 1.0
    for lam in eigenvalues(T).eigenvalues:
        gap = abs(1.0 - lam)
        if gap < vertex_tol:
            continue
        if abs(lam) >= 1.0 - vertex_tol:
            return math.inf
        worst = max(worst, gap / (1.0 - abs(lam)))
    return worst


def has_vertex_eigenvalue(T, vertex_tol=VERTEX_TOL):
    return bool(np.any(np.abs(1.0 - eigenvalues(T).eigenvalues) < vertex_tol))


# ==================== R-BOUNDS ====================

def _randomized_ratio(mats, xs, signs, p):
    tx = np.einsum('kij,kj->ki', mats, xs)
    num = lp_norm(signs @ tx, p)
    den = lp_norm(signs @ xs, p)
    return math.sqrt(float(np.mean(num ** 2)) / float(np.mean(den ** 2)))


def _ascend(mats, xs, signs, p, rng, steps=RBOUND_ASCENT_STEPS, step=RBOUND_ASCENT_STEP):
    """Random-perturbation hill climb of the randomized ratio at fixed signs."""
    best = _randomized_ratio(mats, xs, signs, p)
    size, n = xs.shape
    for _ in range(steps):
        scale = np.maximum(lp_norm(xs, p), 1e-300)[:, None]
        candidate = xs + step * scale * random_unit_vectors(rng, n, size, p)
        value = _randomized_ratio(mats, candidate, signs, p)
        if value > best:
            xs, best = candidate, value
    return best, xs


def rbound_estimate(family, trials=RBOUND_TRIALS, vectors_per_trial=RBOUND_SIGN_SAMPLES,
                    sign_kind=SignKind.RADEMACHER, seed=DEFAULT_SEED, threads=1):
    """Monte-Carlo lower estimate of the R-bound of a finite family.

    Expectations are taken in L^2. Each single-operator trial (one norming vector,
    all other vectors zero) is exact, so the estimate never drops below the largest
    norm in the family. Trial 0 starts from the norming vectors of all members at
    once, the others from random vectors; the best trial is then hill-climbed at
    fixed signs. Rademacher families of size at most EXACT_ENUMERATION_MAX are
    averaged over all sign patterns, larger ones are re-estimated on fresh signs.
    """
    family = list(family)
    if not family:
        raise EmptyFamily("R-bound of an empty family")
    n, p = family[0].dim, family[0].space_p
    if any(T.dim != n or T.space_p != p for T in family):
        raise BadParameters("Family members must share dimension and norm exponent")
    sign_kind = SignKind(sign_kind)
    size = len(family)
    mats = np.stack([T.entries for T in family])
    exact = sign_kind == SignKind.RADEMACHER and size <= EXACT_ENUMERATION_MAX
    patterns = np.array(list(itertools.product([-1.0, 1.0], repeat=size))) if exact else None
    norms = [norm_estimate(T) for T in family]
    single = max(est.value for est in norms)
    aligned = np.stack([np.asarray(est.vector, dtype=np.complex128) for est in norms])
    aligned = aligned / np.maximum(lp_norm(aligned, p), 1e-300)[:, None]

    def signs_for(stream, index):
        if exact:
            return patterns
        return random_signs(keyed_rng(seed, stream, index), (vectors_per_trial, size), sign_kind)

    def trial(t):
        if t == 0:
            xs = aligned
        else:
            rng = keyed_rng(seed, 'rbound-trial', t)
            xs = random_unit_vectors(rng, n, size, p) * rng.uniform(0.0, 1.0, size=(size, 1)) ** 2
        return _randomized_ratio(mats, xs, signs_for('rbound-signs', t), p), xs

    results = parallel_map(trial, range(trials), threads)
    best = max(range(len(results)), key=lambda i: results[i][0]) if results else None
    stderr = 0.0
    if best is None:
        return RBoundEstimate(single, 0.0, 0, sign_kind, size, exact, single, 0.0)
    climbed, xs = _ascend(mats, results[best][1], signs_for('rbound-signs', best), p,
                          keyed_rng(seed, 'rbound-ascent'))
    logger.debug(f"R-bound: best trial {best} at {results[best][0]:.6g}, climbed to {climbed:.6g}")
    if exact:
        random_value, samples = climbed, (trials + RBOUND_ASCENT_STEPS) * len(patterns)
    else:

        def batch(b):
            signs = random_signs(keyed_rng(seed, 'rbound-check', b), (vectors_per_trial, size), sign_kind)
            tx = np.einsum('kij,kj->ki', mats, xs)
            return float(np.mean(lp_norm(signs @ tx, p) ** 2)), float(np.mean(lp_norm(signs @ xs, p) ** 2))

        moments = parallel_map(batch, range(MC_BATCHES), threads)
        ratios = np.array([math.sqrt(a / b) for a, b in moments])
        random_value = math.sqrt(pairwise_sum([a for a, _ in moments]) / pairwise_sum([b for _, b in moments]))
        stderr = float(np.std(ratios, ddof=1) / math.sqrt(MC_BATCHES))
        samples = (trials + RBOUND_ASCENT_STEPS + MC_BATCHES) * vectors_per_trial
    return RBoundEstimate(max(single, random_value), stderr, samples, sign_kind, size, exact,
                          single, random_value)


def rritt_families(T, size=RBOUND_FAMILY_SIZE):
    """{T^n : 1 <= n <= size} and {k T^{k-1}(I - T) : 1 <= k <= size}."""
    a = T.entries
    powers, derivs = [], []
    current = np.eye(T.dim, dtype=np.complex128)
    q = np.eye(T.dim) - a
    for k in range(1, size + 1):
        derivs.append(Operator(k * current @ q, T.space_p))
        current = current @ a
        powers.append(Operator(current, T.space_p))
    return powers, derivs


# ==================== ERGODIC SPLITTING ====================

def riesz_projector(T, center, radius, nodes=PROJECTOR_NODES):
    """Trapezoid rule for (2 pi i)^{-1} times the resolvent integral over |z - center| = radius."""
    phis = 2.0 * math.pi * (np.arange(nodes) + 0.5) / nodes
    terms = [radius * np.exp(1j * phi) * resolvent(T, center + radius * np.exp(1j * phi)) for phi in phis]
    return pairwise_sum(terms) / nodes


def ergodic_split(T, tol=ERGODIC_TOL):
    """Spectral projections onto ker(I - T) and the closure of Im(I - T)."""
    n = T.dim
    eye = np.eye(n, dtype=np.complex128)
    spec = eigenvalues(T).eigenvalues
    dist = np.abs(spec - 1.0)
    near = dist <= tol
    if not near.any():
        return Operator(np.zeros((n, n)), T.space_p), Operator(eye, T.space_p)
    far = dist[~near]
    radius = min(0.5, 0.5 * float(far.min())) if far.size else 0.5
    p_ker = riesz_projector(T, 1.0, radius)
    defect = np.linalg.norm((T.entries - eye) @ p_ker, 2)
    if defect > SEMISIMPLE_TOL * max(1.0, np.linalg.norm(p_ker, 2)):
        raise NonSemisimple(f"(T - I) P_ker has norm {defect:.3e}; eigenvalue 1 is defective")
    p_ran = eye - p_ker
    basis = scipy.linalg.orth(p_ran)
    if basis.shape[1]:
        smin = scipy.linalg.svdvals((eye - T.entries) @ basis).min()
        if smin <= tol:
            raise NonSemisimple(f"I - T is not injective on the range part (sigma_min={smin:.3e})")
    return Operator(p_ker, T.space_p), Operator(p_ran, T.space_p)


# ==================== CLASSIFICATION ====================

def classify(power, dd, stolz_type=None):
    """Power trend first, then the dd slope; the spectral Stolz type settles the cases in between.

    A unimodular eigenvalue other than 1 (infinite type) rules out Ritt outright.
    """
    if power.overflow or power.trend == Trend.GROWING:
        return Classification.NOT_POWER_BOUNDED
    if stolz_type is not None and math.isinf(stolz_type):
        return Classification.POWER_BOUNDED_NOT_RITT
    if dd.slope <= DD_RITT_SLOPE:
        return Classification.RITT_LIKELY
    if dd.slope >= DD_LINEAR_SLOPE:
        return Classification.POWER_BOUNDED_NOT_RITT
    if stolz_type is not None and stolz_type >= TANGENTIAL_STOLZ_TYPE:
        return Classification.POWER_BOUNDED_NOT_RITT
    return Classification.INCONCLUSIVE


def diagnose(T, power_horizon=POWER_HORIZON, dd_horizon=DD_HORIZON, with_rbound=False,
             rbound_trials=RBOUND_TRIALS, seed=DEFAULT_SEED, threads=1):
    ritt = ritt_constant(T, threads=threads)
    power = power_bound(T, power_horizon)
    dd = dd_bound(T, dd_horizon)
    stolz_type = stolz_type_of_spectrum(T)
    rbound = None
    if with_rbound:
        powers, derivs = rritt_families(T)
        rbound = rbound_estimate(powers + derivs, trials=rbound_trials, seed=seed, threads=threads)
    classification = classify(power, dd, stolz_type)
    logger.info(f"Diagnosed n={T.dim} p={T.space_p}: {classification.value}, "
                f"K~{ritt.value:.4g}, C1~{power.value:.4g}, dd slope {dd.slope:.3f}")
    return DiagnosticsReport(ritt, power, dd, stolz_type, rbound, classification)
