"""
The F_m vector function, its pairings against the canonical basis, the block
Riesz basis built from A and D_k, and the window family whose pairings are the
closed forms (1 - z) z^{n-1} (1 - z^L) / (1 - root z).
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
import scipy.special

from config import (
    CLOSED_FORM_TOL, PAIRING_MAX_TERMS, PAIRING_REL_TAIL, POLYLOG_ASYMPTOTIC_FROM,
    POLYLOG_ASYMPTOTIC_TERMS, POLYLOG_REL_TAIL, SWEEP_CLOSEST,
)
from enums import BasisKind
from errors import ClosedFormMismatch, OutOfRange, TailBoundFailure
from holo import HoloFn
from stolz import c_theta, radius_at
from utils import complex_powers, geometric_tail, parallel_map, write_csv

logger = logging.getLogger(__name__)

ROOT_A = complex(np.exp(2j * math.pi / 3))
ROOT_B = 1j
BLOCK = 5

# residue of n mod 5 -> (root, window length)
WINDOWS = {
    1: (ROOT_A, 3),
    2: (ROOT_A ** 2, 3),
    3: (ROOT_B, 4),
    4: (ROOT_B ** 2, 4),
    0: (ROOT_B ** 3, 4),
}
MAX_WINDOW = 4


def block_matrix(a=ROOT_A, b=ROOT_B):
    return np.array([
        [1, a, a ** 2, 0, 0],
        [1, a ** 2, a ** 4, 0, 0],
        [0, 1, b, b ** 2, b ** 4],
        [0, 1, b ** 2, b ** 4, b ** 6],
        [0, 1, b ** 3, b ** 6, b ** 9],
    ], dtype=np.complex128)


def block_scaling(k):
    """Diagonal of D_k = diag(sqrt((5k+1)/(5k+j)))_{j=1..5}, block index k >= 0."""
    j = np.arange(1, BLOCK + 1)
    return np.sqrt((BLOCK * k + 1.0) / (BLOCK * k + j))


@dataclass(frozen=True, eq=False)
class RieszBasis:
    """Rows of the block diagonal matrix diag(A D_0, A D_1, ...)."""
    block_count: int
    a: complex = ROOT_A
    b: complex = ROOT_B
    blocks: tuple = field(init=False)

    def __post_init__(self):
        A = block_matrix(self.a, self.b)
        blocks = tuple(A * block_scaling(k)[None, :] for k in range(self.block_count))
        object.__setattr__(self, 'blocks', blocks)

    @property
    def A(self):
        return block_matrix(self.a, self.b)

    def vector(self, n):
        """(first coordinate, coefficients) of b_n, both 1-based in n."""
        k, row = divmod(n - 1, BLOCK)
        return BLOCK * k + 1, self.blocks[k][row]

    def condition_numbers(self):
        return np.array([np.linalg.cond(block) for block in self.blocks])

    def verify_conditioning(self):
        """cond(A_k) <= cond(A) max_k cond(D_k) for every built block."""
        scalings = [block_scaling(k) for k in range(self.block_count)]
        bound = np.linalg.cond(self.A) * max(s.max() / s.min() for s in scalings)
        return bool(np.all(self.condition_numbers() <= bound * (1.0 + 1e-12))), float(bound)


# ==================== F_m AND PAIRINGS ====================

def F_m_entries(z, m, K):
    """(k^{m-1/2} (1 - z)^m z^{k-1})_{k=1..K}"""
    k = np.arange(1, K + 1, dtype=float)
    return k ** (m - 0.5) * (1.0 - complex(z)) ** m * complex_powers(z, K)


def window_coefficients(n):
    root, length = WINDOWS[n % BLOCK]
    i = np.arange(length)
    return root ** i * np.sqrt(n / (n + i))


def basis_pairings(kind, F, N):
    """Bilinear pairings <F, b_n> for n = 1..N; F must carry at least N + MAX_WINDOW entries."""
    kind = BasisKind(kind)
    if kind == BasisKind.CANONICAL:
        return np.asarray(F[:N])
    if kind == BasisKind.RIESZ:
        B = -(-N // BLOCK)
        scaling = np.stack([block_scaling(k) for k in range(B)])
        values = (F[:BLOCK * B].reshape(B, BLOCK) * scaling) @ block_matrix().T
        return values.ravel()[:N]
    n = np.arange(1, N + 1)
    values = np.zeros(N, dtype=np.complex128)
    for residue, (root, length) in WINDOWS.items():
        sel = n[n % BLOCK == residue]
        for i in range(length):
            values[sel - 1] += F[sel - 1 + i] * root ** i * np.sqrt(sel / (sel + i))
    return values


def pairing_tail(kind, z, m, N):
    """Bound on sum_{n>N} |<F_m(z), b_n>|."""
    z = complex(z)
    base = geometric_tail(m - 0.5, abs(z), N, abs(1.0 - z) ** m)
    multiplier = {BasisKind.CANONICAL: 1.0, BasisKind.RIESZ: float(BLOCK), BasisKind.WINDOWS: float(MAX_WINDOW)}
    return multiplier[BasisKind(kind)] * base


@dataclass(frozen=True, eq=False)
class PairingTable:
    z: complex
    values: np.ndarray
    l1: float
    l2: float
    truncation_K: int
    tail_bound: float
    basis: BasisKind
    m: int
    skipped: bool = False

    def to_dict(self):
        return {
            'z': self.z,
            'l1': self.l1,
            'l2': self.l2,
            'truncation_K': self.truncation_K,
            'tail_bound': self.tail_bound,
            'basis': self.basis,
            'm': self.m,
            'skipped': self.skipped,
        }


def pairing_table(z, m=1, kind=BasisKind.WINDOWS, rel_tail=PAIRING_REL_TAIL, max_terms=PAIRING_MAX_TERMS):
    """Pairings of F_m(z) against a basis, truncated once the l1 tail is below rel_tail of the head."""
    if not abs(complex(z)) < 1.0:
        raise OutOfRange(f"|z| must be below 1, got {abs(complex(z))}")
    kind = BasisKind(kind)
    N = 64
    while True:
        F = F_m_entries(z, m, N + MAX_WINDOW)
        values = basis_pairings(kind, F, N)
        l1 = float(np.sum(np.abs(values)))
        tail = pairing_tail(kind, z, m, N)
        if tail <= rel_tail * l1 or (l1 == 0.0 and tail == 0.0):
            l2 = float(np.sqrt(np.sum(np.abs(values) ** 2)))
            return PairingTable(complex(z), values, l1, l2, N, tail, kind, m)
        if N >= max_terms:
            raise TailBoundFailure(f"Pairing tail {tail:.3e} at z={complex(z):.6g} after {N} terms")
        N = min(2 * N, max_terms)


def canonical_l1_closed_form(z):
    """sum_k sqrt(k) |1 - z| |z|^{k-1} = |1 - z| Li_{-1/2}(|z|) / |z| (m = 1)."""
    r = abs(complex(z))
    if r == 0.0:
        return 1.0
    return abs(1.0 - complex(z)) * polylog_half(r) / r


# ==================== POLYLOGARITHM ====================

@lru_cache(maxsize=1)
def _zeta_coefficients(terms):
    return tuple(float(mpmath.zeta(-0.5 - j)) / math.factorial(j) for j in range(terms))


def _polylog_asymptotic(x):
    mu = -math.log(x)
    series = sum(c * (-mu) ** j for j, c in enumerate(_zeta_coefficients(POLYLOG_ASYMPTOTIC_TERMS)))
    return scipy.special.gamma(1.5) * mu ** -1.5 + series


def _integral_tail(mu, K):
    """int_K^inf sqrt(t) e^{-mu t} dt, an upper bound on sum_{k>K} sqrt(k) x^k past the peak."""
    return mu ** -1.5 * scipy.special.gamma(1.5) * scipy.special.gammaincc(1.5, mu * K)


def polylog_half(x):
    """Li_{-1/2}(x) = sum_{k>=1} sqrt(k) x^k for 0 <= x < 1."""
    x = float(x)
    if not 0.0 <= x < 1.0:
        raise OutOfRange(f"Li_(-1/2) needs 0 <= x < 1, got {x}")
    if x == 0.0:
        return 0.0
    if x > POLYLOG_ASYMPTOTIC_FROM:
        return _polylog_asymptotic(x)
    mu = -math.log(x)
    K = max(64, int(math.ceil(1.0 / (2.0 * mu))))
    while True:
        k = np.arange(1, K + 1, dtype=float)
        head = float(np.sum(np.sqrt(k) * np.exp(k * np.log(x))))
        if _integral_tail(mu, K) <= POLYLOG_REL_TAIL * head:
            return head
        K *= 2


# ==================== CLOSED FORMS ====================

def closed_form_pairings(z, n):
    """sqrt(n)(1 - z) z^{n-1} (1 + w + ... + w^{L-1}) with w = root z, checked against its quotient form."""
    if not 1 <= n <= 7:
        raise OutOfRange(f"Closed forms are tabulated for 1 <= n <= 7, got {n}")
    z = complex(z)
    if not abs(z) < 1.0:
        raise OutOfRange(f"|z| must be below 1, got {abs(z)}")
    root, length = WINDOWS[n % BLOCK]
    w = root * z
    prefix = math.sqrt(n) * (1.0 - z) * z ** (n - 1)
    product = prefix * sum(w ** i for i in range(length))
    if abs(1.0 - w) > 1e-8:
        quotient = prefix * (1.0 - z ** length) / (1.0 - w)
        if abs(product - quotient) > CLOSED_FORM_TOL * max(1.0, abs(product)):
            raise ClosedFormMismatch(f"b_{n} at z={z}: product {product} vs quotient {quotient}")
    return product


def pairing_polynomial(n, m=1):
    """<F_m(z), b_n> for the window family as a polynomial in z."""
    coeffs = np.zeros(n + MAX_WINDOW + m + 1, dtype=np.complex128)
    for i, c in enumerate(window_coefficients(n)):
        coeffs[n - 1 + i] += c * math.sqrt(n + i) ** (2 * m - 1)
    one_minus_z = np.polynomial.polynomial.polypow([1.0, -1.0], m)
    return HoloFn.polynomial(np.polynomial.polynomial.polymul(coeffs, one_minus_z), label=f"pairing_{n}")


def row_sum_audit():
    """Row sums of A, i.e. the value at z = 1 of each block row's pairing polynomial."""
    sums = block_matrix().sum(axis=1)
    return [{'row': r + 1, 'sum': complex(s), 'vanishes': bool(abs(s) < 1e-12)} for r, s in enumerate(sums)]


def basis_matrix(kind, count):
    """First `count` basis vectors as rows over enough coordinates."""
    kind = BasisKind(kind)
    width = count + MAX_WINDOW + BLOCK
    M = np.zeros((count, width), dtype=np.complex128)
    if kind == BasisKind.CANONICAL:
        M[:, :count] = np.eye(count)
    elif kind == BasisKind.RIESZ:
        basis = RieszBasis(-(-count // BLOCK))
        for n in range(1, count + 1):
            start, coeffs = basis.vector(n)
            M[n - 1, start - 1:start - 1 + BLOCK] = coeffs
    else:
        for n in range(1, count + 1):
            coeffs = window_coefficients(n)
            M[n - 1, n - 1:n - 1 + coeffs.size] = coeffs
    return M


def gram_condition(kind, blocks):
    M = basis_matrix(kind, BLOCK * blocks)
    spectrum = np.linalg.eigvalsh(M @ M.conj().T)
    return float(spectrum[-1] / spectrum[0])


# ==================== STOLZ GRIDS ====================

def stolz_grid(domain, n_phi=20, n_u=25, closest=SWEEP_CLOSEST):
    """z = 1 - rho e^{i phi}: rays inside the opening, radii graded from `closest` toward the boundary."""
    C = c_theta(domain.omega)
    phis = np.linspace(-0.9 * C, 0.9 * C, n_phi)
    us = np.linspace(0.0, 0.95, n_u)
    points = []
    for phi in phis:
        edge = float(radius_at(domain.omega, phi))
        for u in us:
            rho = closest * (edge / closest) ** u
            points.append(1.0 - rho * np.exp(1j * phi))
    return np.array(points)


def real_axis_grid(points=30, near=1e-3, far=0.1):
    """Real z with 1 - z spaced geometrically from far to near."""
    return 1.0 - np.geomspace(far, near, points)


def pairing_sweep(domain, m=1, kind=BasisKind.WINDOWS, grid=None, threads=1):
    """Pairing tables over a grid of points inside the domain; points past the term budget are flagged."""
    grid = stolz_grid(domain) if grid is None else np.asarray(grid)
    kind = BasisKind(kind)

    def evaluate(z):
        if not domain.contains(z):
            raise OutOfRange(f"Grid point {complex(z):.6g} lies outside Stolz_{domain.omega}")
        try:
            return pairing_table(z, m, kind)
        except TailBoundFailure as exc:
            logger.warning(f"Skipping sweep point: {exc}")
            return PairingTable(complex(z), np.zeros(0), math.nan, math.nan, PAIRING_MAX_TERMS, math.inf,
                                kind, m, skipped=True)

    return parallel_map(evaluate, grid, threads)


def sup_l1(tables):
    values = [t.l1 for t in tables if not t.skipped]
    return max(values) if values else math.nan


def blow_up_exponent(kind=BasisKind.CANONICAL, m=1, points=30):
    """Slope alpha of log l1 ~ -alpha log(1 - z) along the real axis toward the vertex."""
    z = real_axis_grid(points)
    l1 = np.array([pairing_table(x, m, kind).l1 for x in z])
    return float(-np.polyfit(np.log(1.0 - z), np.log(l1), 1)[0])


def sweep_csv(tables, path):
    rows = ((t.z.real, t.z.imag, t.l1, t.l2, t.basis.value, t.m) for t in tables)
    return write_csv(path, ['re_z', 'im_z', 'l1', 'l2', 'basis', 'm'], rows)
