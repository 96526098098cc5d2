"""
Square functions x -> (k^{m-1/2} T^{k-1} (I - T)^m x)_k and their gamma-norms.

Hilbert-space norms are exact through the Gram sum of the truncated sequence; on
l^p the gamma-norm is sampled with Gaussian or Rademacher coefficients and operator
norms are maximized (or minimized) over a probe set of unit vectors.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from config import (
    CHECKPOINT_MAX_EXPONENT, DEFAULT_SEED, MC_BATCHES, MC_SAMPLES, OVERFLOW, PROBE_COUNT,
    SQF_ACCEPT_TAIL, SQF_CHUNK_MAX, SQF_MAX_TERMS, SQF_MC_REL_TAIL, SQF_REL_TAIL, VERTEX_TOL,
)
from diagnostics import ergodic_split, has_vertex_eigenvalue
from enums import GammaMethod
from errors import BadParameters, NoDecay, TailBoundFailure
from numkernel import Operator, dual_exponent
from utils import (
    geometric_tail, keyed_rng, lp_norm, pairwise_sum, parallel_map, random_signs,
    random_unit_vectors, write_csv,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GammaNorm:
    value: float
    stderr: float
    method: GammaMethod
    truncation_K: int
    tail_bound: float

    def to_dict(self):
        return {
            'value': self.value,
            'stderr': self.stderr,
            'method': self.method,
            'truncation_K': self.truncation_K,
            'tail_bound': self.tail_bound,
        }


@dataclass(frozen=True)
class SqfNorm:
    """Upper and lower square-function constants of one operator."""
    value: float
    lower: float
    method: GammaMethod
    m: int
    truncation_K: int
    tail_bound: float
    probes: int = 0

    def to_dict(self):
        return {
            'value': self.value,
            'lower': self.lower,
            'method': self.method,
            'm': self.m,
            'truncation_K': self.truncation_K,
            'tail_bound': self.tail_bound,
            'probes': self.probes,
        }


# ==================== DECAY CONTROL ====================

def upper_norm(a, p):
    """Upper bound on the l^p operator norm (exact for p = 2, Riesz-Thorin otherwise)."""
    a = np.asarray(a)
    if p == 2:
        return float(np.linalg.norm(a, 2))
    one = float(np.max(np.sum(np.abs(a), axis=0)))
    inf = float(np.max(np.sum(np.abs(a), axis=1)))
    return one ** (1.0 / p) * inf ** (1.0 - 1.0 / p)


@dataclass(frozen=True)
class DecayProfile:
    """||T^j|| <= c s^floor(j/K0) from the checkpoints T^(2^i)."""
    K0: int
    c: float
    s: float

    @property
    def rate(self):
        return max(self.s, 1e-100) ** (1.0 / self.K0)

    def tail(self, exponent, power, K, scale):
        """Bound on sum_{k>K} scale k^exponent ||T^{k-1}||^power."""
        if self.s == 0.0:
            return 0.0 if K >= self.K0 else math.inf
        s = max(self.s, 1e-100)
        return geometric_tail(exponent, self.rate ** power, K, scale * (self.c / s) ** power)


def decay_profile(a, p):
    if float(np.max(np.abs(np.linalg.eigvals(a)), initial=0.0)) >= 1.0 - VERTEX_TOL:
        raise NoDecay("Spectral radius is not below one; square-function entries do not decay")
    checkpoint = np.asarray(a, dtype=np.complex128)
    c = 1.0
    for i in range(CHECKPOINT_MAX_EXPONENT + 1):
        s = upper_norm(checkpoint, p)
        if s < 1.0:
            return DecayProfile(2 ** i, c, s)
        if not s <= OVERFLOW:
            break
        c *= s
        checkpoint = checkpoint @ checkpoint
    raise NoDecay(f"No checkpoint T^(2^i), i <= {CHECKPOINT_MAX_EXPONENT}, has norm below one")


def effective_operator(T):
    """T restricted to the complement of ker(I - T), as a matrix on the full space."""
    if not has_vertex_eigenvalue(T):
        return T.entries
    _, p_ran = ergodic_split(T)
    return T.entries @ p_ran.entries


def _chunks(a, start):
    """Consecutive blocks (ks, W) with W[i] = a^{k-1} start."""
    current = np.array(start, dtype=np.complex128)
    k = 1
    size = 64
    while True:
        block = np.empty((size,) + current.shape, dtype=np.complex128)
        for i in range(size):
            block[i] = current
            current = a @ current
        yield np.arange(k, k + size), block
        k += size
        size = min(2 * size, SQF_CHUNK_MAX)


def _setup(T, m):
    if m < 1:
        raise BadParameters(f"Square-function order must be at least 1, got {m}")
    a = effective_operator(T)
    q_m = np.linalg.matrix_power(np.eye(T.dim) - T.entries, m)
    return a, q_m


# ==================== SEQUENCES ====================

@dataclass(frozen=True, eq=False)
class SqfSequence:
    """v_k = k^{m-1/2} T^{k-1} (I - T)^m x, produced by running products."""
    source: Operator
    x: np.ndarray
    m: int = 1

    @cached_property
    def _start(self):
        a, q_m = _setup(self.source, self.m)
        return a, q_m @ np.asarray(self.x, dtype=np.complex128)

    @cached_property
    def _cursor(self):
        """Last unweighted entry handed out by entry(), as [k, T^{k-1} (I - T)^m x]."""
        return [1, self._start[1]]

    def __iter__(self):
        a, start = self._start
        for ks, block in _chunks(a, start):
            for k, v in zip(ks, block):
                yield (k ** (self.m - 0.5)) * v

    def entry(self, k):
        """Random access; walks forward from the previous call, restarting only for smaller k."""
        if k < 1:
            raise BadParameters(f"Sequence index starts at 1, got {k}")
        a, start = self._start
        cursor = self._cursor
        if k < cursor[0]:
            cursor[:] = [1, start]
        v = cursor[1]
        for _ in range(k - cursor[0]):
            v = a @ v
        cursor[:] = [k, v]
        return k ** (self.m - 0.5) * v

    def truncated(self, method=GammaMethod.HILBERT_EXACT):
        vectors, K, tails = truncated_vectors(self.source, self.m, np.asarray(self.x)[:, None], method)
        return vectors[:, 0, :], K, float(tails[0])


def truncated_vectors(T, m, X, method):
    """Columns of X pushed through the square function until the tail bound is met.

    Returns (V, K, tails) with V of shape (K, probes, n). For exact Hilbert norms the
    tail bounds the squared norm; for sampled norms it bounds the linear sum of entries.
    """
    a, q_m = _setup(T, m)
    p = T.space_p
    profile = decay_profile(a, p)
    hilbert = GammaMethod(method) == GammaMethod.HILBERT_EXACT
    start = q_m @ X
    start_norms = lp_norm(start.T, p)
    blocks = []
    head = np.zeros(X.shape[1])
    K = 0
    tails = np.full(X.shape[1], math.inf)
    for ks, block in _chunks(a, start):
        weights = ks.astype(float) ** (m - 0.5)
        block = np.transpose(block * weights[:, None, None], (0, 2, 1))
        blocks.append(block)
        K = int(ks[-1])
        norms = lp_norm(block, p)
        if hilbert:
            head = head + np.sum(norms ** 2, axis=0)
            tails = np.array([profile.tail(2 * m - 1, 2, K, sn ** 2) for sn in start_norms])
            done = np.all(tails <= SQF_REL_TAIL * head)
        else:
            head = np.maximum(head, np.max(norms, axis=0))
            tails = np.array([profile.tail(m - 0.5, 1, K, sn) for sn in start_norms])
            done = np.all(tails <= SQF_MC_REL_TAIL * head)
        if done or K >= SQF_MAX_TERMS:
            break
    reference = np.sqrt(head) if hilbert else head
    scaled = np.sqrt(tails) if hilbert else tails
    if np.any(scaled > SQF_ACCEPT_TAIL * np.maximum(reference, 1e-300)):
        raise TailBoundFailure(f"Tail bound {float(np.max(scaled)):.3e} after {K} terms exceeds "
                               f"{SQF_ACCEPT_TAIL:.0%} of the head")
    return np.concatenate(blocks, axis=0), K, tails


# ==================== GAMMA NORMS ====================

def _sampled_gamma(vectors, p, kind, samples, seed, threads):
    per_batch = max(samples // MC_BATCHES, 1)
    K = vectors.shape[0]

    def batch(b):
        signs = random_signs(keyed_rng(seed, 'gamma', b), (per_batch, K), kind)
        return float(np.mean(lp_norm(signs @ vectors, p) ** 2))

    means = np.array(parallel_map(batch, range(MC_BATCHES), threads))
    value = math.sqrt(pairwise_sum(list(means)) / MC_BATCHES)
    stderr = float(np.std(means, ddof=1) / math.sqrt(MC_BATCHES)) / (2.0 * max(value, 1e-300))
    return value, stderr, per_batch * MC_BATCHES


def gamma_norm(seq, p=None, method=None, mc_samples=MC_SAMPLES, seed=DEFAULT_SEED, threads=1):
    """(E||sum_k g_k v_k||^2)^{1/2} of an SqfSequence or an explicit list of vectors."""
    if isinstance(seq, SqfSequence):
        p = seq.source.space_p
        method = GammaMethod(method or (GammaMethod.HILBERT_EXACT if p == 2 else GammaMethod.GAUSSIAN_MC))
        vectors, K, tail = seq.truncated(method)
    else:
        vectors = np.atleast_2d(np.asarray(seq, dtype=np.complex128))
        p = 2.0 if p is None else float(p)
        method = GammaMethod(method or (GammaMethod.HILBERT_EXACT if p == 2 else GammaMethod.GAUSSIAN_MC))
        K, tail = vectors.shape[0], 0.0
    if method == GammaMethod.HILBERT_EXACT:
        if p != 2:
            raise BadParameters(f"Exact gamma-norm needs a Hilbert space, got p={p}")
        squares = lp_norm(vectors, 2) ** 2
        return GammaNorm(math.sqrt(pairwise_sum(list(squares))), 0.0, method, K, math.sqrt(tail))
    kind = 'gaussian' if method == GammaMethod.GAUSSIAN_MC else 'rademacher'
    value, stderr, _ = _sampled_gamma(vectors, p, kind, mc_samples, seed, threads)
    return GammaNorm(value, stderr, method, K, tail)


# ==================== OPERATOR NORMS ====================

@dataclass(frozen=True)
class GramSum:
    matrix: np.ndarray
    truncation_K: int
    tail_bound: float


def sqf_gram(T, m):
    """sum_k k^{2m-1} W_k^H W_k with W_k = T^{k-1} (I - T)^m, truncated by the tail bound."""
    a, q_m = _setup(T, m)
    profile = decay_profile(a, 2)
    q_norm = upper_norm(q_m, 2)
    parts = []
    running = np.zeros_like(q_m)
    tail = math.inf
    K = 0
    for ks, block in _chunks(a, q_m):
        weights = ks.astype(float) ** (2 * m - 1)
        part = np.einsum('k,kji,kjl->il', weights, block.conj(), block)
        parts.append(part)
        running = running + part
        K = int(ks[-1])
        head = float(np.linalg.norm(running, 2))
        tail = profile.tail(2 * m - 1, 2, K, q_norm ** 2)
        if tail <= SQF_REL_TAIL * head or K >= SQF_MAX_TERMS:
            break
    gram = pairwise_sum(parts)
    if tail > SQF_ACCEPT_TAIL ** 2 * max(float(np.linalg.norm(gram, 2)), 1e-300):
        raise TailBoundFailure(f"Gram tail {tail:.3e} after {K} terms is too large")
    logger.debug(f"Square-function Gram sum m={m} truncated at K={K}, tail {tail:.2e}")
    return GramSum(gram, K, tail)


def _probes(dim, p, count, seed):
    rng = keyed_rng(seed, 'sqf-probe', dim)
    return np.concatenate([np.eye(dim, dtype=np.complex128),
                           random_unit_vectors(rng, dim, count, p)]).T


def phi_m_estimate(T, m, probe_count=PROBE_COUNT, method=None, mc_samples=MC_SAMPLES,
                   seed=DEFAULT_SEED, threads=1):
    p = T.space_p
    method = GammaMethod(method or (GammaMethod.HILBERT_EXACT if p == 2 else GammaMethod.GAUSSIAN_MC))
    if method == GammaMethod.HILBERT_EXACT:
        if p != 2:
            raise BadParameters(f"Exact square-function norm needs p=2, got p={p}")
        gram = sqf_gram(T, m)
        spectrum = np.linalg.eigvalsh(0.5 * (gram.matrix + gram.matrix.conj().T))
        return SqfNorm(math.sqrt(max(float(spectrum[-1]), 0.0)), math.sqrt(max(float(spectrum[0]), 0.0)),
                       method, m, gram.truncation_K, gram.tail_bound)
    X = _probes(T.dim, p, probe_count, seed)
    vectors, K, tails = truncated_vectors(T, m, X, method)

    def probe_value(j):
        return gamma_norm(vectors[:, j, :], p, method, mc_samples, seed, 1).value

    values = parallel_map(probe_value, range(X.shape[1]), threads)
    return SqfNorm(max(values), min(values), method, m, K, float(np.max(tails)), X.shape[1])


def phi_m_norm(T, m, probe_count=PROBE_COUNT, method=None, seed=DEFAULT_SEED, threads=1):
    """||Phi_m||: exact on Hilbert space, a probe maximum on l^p."""
    return phi_m_estimate(T, m, probe_count, method, seed=seed, threads=threads).value


def phi_m_dual_norm(T, m, probe_count=PROBE_COUNT, seed=DEFAULT_SEED, threads=1):
    """||Phi_m^*|| as the square-function norm of T' on l^q."""
    return phi_m_norm(T.adjoint(), m, probe_count, seed=seed, threads=threads)


def lower_bound_check(T, m, probes=PROBE_COUNT, seed=DEFAULT_SEED, threads=1):
    """inf over unit x of the gamma-norm of Phi_m x (0 when I - T has a kernel)."""
    return phi_m_estimate(T, m, probes, seed=seed, threads=threads).lower


# ==================== DUALITY ====================

@dataclass(frozen=True)
class PairingCheck:
    pairing: float
    bound: float
    stderr: float

    @property
    def holds(self):
        return self.pairing <= self.bound + 3.0 * self.stderr


def dual_pairing_inequality(xs, xps, p, mc_samples=MC_SAMPLES, seed=DEFAULT_SEED):
    """|sum_k <x'_k, x_k>| against gamma_{q}(x') gamma_p(x)."""
    xs = np.atleast_2d(np.asarray(xs, dtype=np.complex128))
    xps = np.atleast_2d(np.asarray(xps, dtype=np.complex128))
    pairing = abs(np.vdot(xps, xs))
    method = GammaMethod.GAUSSIAN_MC
    left = gamma_norm(xps, dual_exponent(p), method, mc_samples, seed)
    right = gamma_norm(xs, p, method, mc_samples, seed + 1)
    bound = left.value * right.value
    stderr = left.stderr * right.value + right.stderr * left.value
    return PairingCheck(float(pairing), float(bound), float(stderr))


def trace_pairing_norm(T, m, probe_count=PROBE_COUNT, mc_samples=MC_SAMPLES, seed=DEFAULT_SEED):
    """Lower estimate of ||Phi_m^*|| by pairing dual sequences against sequences in l^p.

    For each probe x' the sequence v'_k = k^{m-1/2} T'^{k-1}(I - T')^m x' is paired
    with u_k = v'_k S^{q-2}, S being the coordinatewise square function of (v'_k).
    """
    dual = T.adjoint()
    p, q = T.space_p, dual.space_p
    X = _probes(dual.dim, q, probe_count, seed)
    vectors, _, _ = truncated_vectors(dual, m, X, GammaMethod.GAUSSIAN_MC)
    best = 0.0
    for j in range(X.shape[1]):
        v = vectors[:, j, :]
        s = np.sqrt(np.sum(np.abs(v) ** 2, axis=0))
        weight = np.where(s > 0, np.where(s > 0, s, 1.0) ** (q - 2.0), 0.0)
        u = v * weight[None, :]
        pairing = abs(np.vdot(v, u))
        if pairing == 0.0:
            continue
        norm = gamma_norm(u, p, GammaMethod.GAUSSIAN_MC, mc_samples, seed).value
        best = max(best, pairing / norm)
    return best


def sequence_csv(seq, path, K=None):
    """Rows (k, ||v_k||) of a square-function sequence."""
    vectors, truncation, _ = seq.truncated()
    K = K or truncation
    norms = lp_norm(vectors[:K], seq.source.space_p)
    return write_csv(path, ['k', 'norm'], zip(range(1, K + 1), norms))
