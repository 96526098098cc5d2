"""
Dense complex linear algebra on X = l^p_n: operators, resolvents, norms, spectra.
"""
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from config import (
    EIG_DIM_CAP, ILL_CONDITIONED_EIGVEC, NORM_MAX_ITER, NORM_REL_TOL, RESOLVENT_RESIDUAL_TOL,
)
from errors import (
    DimensionCap, IllConditionedWarning, InvalidOperator, NonConvergence, SingularResolvent,
)
from utils import lp_norm

logger = logging.getLogger(__name__)

EPS = np.finfo(float).eps


def dual_exponent(p):
    return p / (p - 1.0)


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix acting on l^p_n."""
    entries: np.ndarray
    space_p: float = 2.0

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.complex128, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise InvalidOperator(f"Operator entries must be a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidOperator("Operator entries must be finite")
        p = float(self.space_p)
        if not (p > 1.0 and np.isfinite(p)):
            raise InvalidOperator(f"Norm exponent must lie in (1, inf), got {self.space_p}")
        a.setflags(write=False)
        object.__setattr__(self, 'entries', a)
        object.__setattr__(self, 'space_p', p)

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def is_hilbert(self):
        return self.space_p == 2.0

    def adjoint(self):
        """Conjugate transpose acting on the dual space l^q_n."""
        return Operator(self.entries.conj().T, dual_exponent(self.space_p))

    def with_entries(self, entries):
        return Operator(entries, self.space_p)

    def with_p(self, p):
        return Operator(self.entries, p)

    def to_dict(self):
        return {
            'n': self.dim,
            'p': self.space_p,
            're': self.entries.real.tolist(),
            'im': self.entries.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        try:
            n = int(data['n'])
            re = np.asarray(data['re'], dtype=float)
            im = np.asarray(data.get('im', np.zeros_like(re)), dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidOperator(f"Malformed operator record: {exc}") from exc
        if re.shape != (n, n) or im.shape != (n, n):
            raise InvalidOperator(f"Operator record declares n={n} but carries shape {re.shape}")
        return cls(re + 1j * im, float(data.get('p', 2.0)))

    @classmethod
    def identity(cls, n, p=2.0):
        return cls(np.eye(n), p)

    def __repr__(self):
        return f"Operator(n={self.dim}, p={self.space_p})"


@dataclass(frozen=True, eq=False)
class Spectrum:
    eigenvalues: np.ndarray
    radius: float
    eigvec_condition: float = 1.0


@dataclass(frozen=True, eq=False)
class NormEstimate:
    """Operator norm with provenance; vector is a (near) maximizer."""
    value: float
    exact: bool
    iterations: int
    vector: np.ndarray


# ==================== RESOLVENTS ====================

def _lu(T, lam):
    a = lam * np.eye(T.dim) - T.entries
    lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= T.dim * EPS * max(pivots.max(), EPS):
        raise SingularResolvent(f"lambda={lam} is numerically in the spectrum")
    return a, (lu, piv)


def resolvent_apply(T, lam, v):
    """Solve (lambda*I - T) w = v."""
    a, factors = _lu(T, complex(lam))
    v = np.asarray(v, dtype=np.complex128)
    w = scipy.linalg.lu_solve(factors, v, check_finite=False)
    residual = np.linalg.norm(a @ w - v)
    scale = np.linalg.norm(a, 2) * np.linalg.norm(w) + np.linalg.norm(v)
    if residual > RESOLVENT_RESIDUAL_TOL * max(scale, EPS):
        w = w + scipy.linalg.lu_solve(factors, v - a @ w, check_finite=False)
        residual = np.linalg.norm(a @ w - v)
        if residual > RESOLVENT_RESIDUAL_TOL * max(scale, EPS):
            raise SingularResolvent(f"Residual {residual:.3e} too large at lambda={lam}")
    return w


def resolvent(T, lam):
    """Full matrix R(lambda, T)."""
    _, factors = _lu(T, complex(lam))
    return scipy.linalg.lu_solve(factors, np.eye(T.dim, dtype=np.complex128), check_finite=False)


# ==================== NORMS ====================

def _is_monomial(a):
    nz = np.abs(a) > 0
    return bool(np.all(nz.sum(axis=0) <= 1) and np.all(nz.sum(axis=1) <= 1))


def _dual_vector(y, p):
    """Unit-norm element of l^q norming y in l^p."""
    ay = np.abs(y)
    norm = lp_norm(y, p)
    if norm == 0:
        return np.zeros_like(y)
    phase = np.where(ay > 0, y / np.where(ay > 0, ay, 1.0), 0.0)
    return phase * (ay / norm) ** (p - 1.0)


def _higham_power(a, p, x):
    q = dual_exponent(p)
    x = x / lp_norm(x, p)
    estimate = 0.0
    for it in range(1, NORM_MAX_ITER + 1):
        y = a @ x
        new = float(lp_norm(y, p))
        if new == 0.0:
            return 0.0, it, x
        z = a.conj().T @ _dual_vector(y, p)
        converged = new - estimate <= NORM_REL_TOL * new
        estimate = new
        if converged or lp_norm(z, q) <= np.real(np.vdot(z, x)) * (1 + NORM_REL_TOL):
            return estimate, it, x
        x = _dual_vector(z, q)
    raise NonConvergence(f"l^{p} norm iteration did not settle in {NORM_MAX_ITER} steps")


def norm_estimate(T):
    """Operator norm on l^p with an exactness flag.

    p = 2 and monomial (diagonal or permutation-scaled) matrices are exact; any other
    p uses the Boyd/Higham dual power iteration, which gives a lower estimate.
    """
    a = T.entries
    n = T.dim
    if T.is_hilbert:
        u, s, vh = scipy.linalg.svd(a, check_finite=False)
        return NormEstimate(float(s[0]), True, 0, vh[0].conj())
    if _is_monomial(a):
        absa = np.abs(a)
        i, j = np.unravel_index(np.argmax(absa), absa.shape)
        e = np.zeros(n, dtype=np.complex128)
        e[j] = 1.0
        return NormEstimate(float(absa[i, j]), True, 0, e)
    starts = [np.ones(n, dtype=np.complex128)]
    col = np.argmax(lp_norm(a.T, T.space_p))
    e = np.zeros(n, dtype=np.complex128)
    e[col] = 1.0
    starts.append(e)
    best = None
    total = 0
    for x0 in starts:
        value, its, x = _higham_power(a, T.space_p, x0)
        total += its
        if best is None or value > best[0]:
            best = (value, x)
    return NormEstimate(best[0], False, total, best[1])


def operator_norm(T):
    return norm_estimate(T).value


def matrix_norm(entries, p):
    """operator_norm for a raw matrix in the l^p context."""
    return operator_norm(Operator(entries, p))


# ==================== SPECTRA ====================

def eigendecomposition(T):
    if T.dim > EIG_DIM_CAP:
        raise DimensionCap(f"dim {T.dim} exceeds spectral cap {EIG_DIM_CAP}")
    w, v = scipy.linalg.eig(T.entries, check_finite=False)
    cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > ILL_CONDITIONED_EIGVEC:
        warnings.warn(f"Eigenvector condition {cond:.3e} exceeds {ILL_CONDITIONED_EIGVEC:.0e}",
                      IllConditionedWarning, stacklevel=2)
    return w, v, cond


def eigenvalues(T):
    w, _, cond = eigendecomposition(T)
    w.setflags(write=False)
    radius = float(np.max(np.abs(w)))
    return Spectrum(w, radius, cond)


def restrict(T, P):
    """Matrix of T on the range of the invariant projection P (orthonormal coordinates)."""
    q = scipy.linalg.orth(np.asarray(P.entries if isinstance(P, Operator) else P))
    return Operator(q.conj().T @ T.entries @ q, T.space_p)


def power_entries(T, k):
    return np.linalg.matrix_power(T.entries, k)
