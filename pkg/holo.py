"""
Scalar holomorphic functions on Stolz domains: evaluation, sup-norms, admissibility.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg
from numpy.polynomial import polynomial as P

from config import (
    ADMISSIBILITY_GROWTH, ADMISSIBILITY_REFINEMENTS, ADMISSIBILITY_REL_CHANGE,
    ADMISSIBILITY_SHELL_RATIO, SUP_GRID_DENSITY, SUP_MAX_DOUBLINGS, SUP_RICHARDSON_TOL,
)
from enums import HoloKind
from errors import PoleOnDomain
from stolz import c_theta, gamma_point

logger = logging.getLogger(__name__)

MAX_CERTIFIED_DEGREE = 64


def _trim(coeffs):
    c = np.asarray(coeffs, dtype=np.complex128)
    c = np.trim_zeros(c, 'b')
    return c if c.size else np.zeros(1, dtype=np.complex128)


def _matrix_poly(coeffs, a):
    n = a.shape[0]
    out = coeffs[-1] * np.eye(n, dtype=np.complex128)
    for c in coeffs[-2::-1]:
        out = out @ a + c * np.eye(n)
    return out


@dataclass(frozen=True, eq=False)
class HoloFn:
    kind: HoloKind
    num: tuple = (1.0,)
    den: tuple = (1.0,)
    evaluator: Optional[Callable] = None
    derivative_fn: Optional[Callable] = None
    label: str = ''

    # ---- constructors ----

    @classmethod
    def polynomial(cls, coeffs, label=''):
        c = _trim(coeffs)
        return cls(HoloKind.POLYNOMIAL, tuple(c), (1.0,), label=label or f"poly(deg={c.size - 1})")

    @classmethod
    def constant(cls, value=1.0):
        return cls.polynomial([value], label=f"const({value})")

    @classmethod
    def rational(cls, num, den, label=''):
        d = _trim(den)
        if not np.any(d):
            raise PoleOnDomain("Denominator vanishes identically")
        n = _trim(num)
        return cls(HoloKind.RATIONAL, tuple(n), tuple(d), label=label or f"rational({n.size - 1}/{d.size - 1})")

    @classmethod
    def monomial_power(cls, n):
        return cls(HoloKind.MONOMIAL_POWER, tuple([0.0] * n + [1.0]), (1.0,), label=f"z^{n}")

    @classmethod
    def cayley(cls):
        """e(z) = (1 - z) / (1 + z)"""
        return cls(HoloKind.CAYLEY, (1.0, -1.0), (1.0, 1.0), label='cayley')

    @classmethod
    def opaque(cls, evaluator, derivative=None, label='opaque'):
        return cls(HoloKind.OPAQUE, evaluator=evaluator, derivative_fn=derivative, label=label)

    # ---- evaluation ----

    @property
    def is_closed_form(self):
        return self.kind != HoloKind.OPAQUE

    def __call__(self, z):
        if not self.is_closed_form:
            return self.evaluator(z)
        return P.polyval(z, self.num) / P.polyval(z, self.den)

    def derivative(self, z):
        if not self.is_closed_form:
            if self.derivative_fn is None:
                raise NotImplementedError(f"{self.label} carries no derivative")
            return self.derivative_fn(z)
        n, d = self.num, self.den
        dn = P.polyval(z, P.polyder(n)) if len(n) > 1 else 0.0
        dd = P.polyval(z, P.polyder(d)) if len(d) > 1 else 0.0
        nv, dv = P.polyval(z, n), P.polyval(z, d)
        return (dn * dv - nv * dd) / dv ** 2

    def multiply(self, other):
        if self.is_closed_form and other.is_closed_form:
            num = P.polymul(self.num, other.num)
            den = P.polymul(self.den, other.den)
            label = f"{self.label}*{other.label}"
            if len(_trim(den)) == 1:
                return HoloFn.polynomial(num / den[0], label=label)
            return HoloFn.rational(num, den, label=label)
        f, g = self, other
        return HoloFn.opaque(lambda z: f(z) * g(z), label=f"{f.label}*{g.label}")

    def reciprocal(self):
        if not self.is_closed_form:
            f = self
            return HoloFn.opaque(lambda z: 1.0 / f(z), label=f"1/{f.label}")
        return HoloFn.rational(self.den, self.num, label=f"1/{self.label}")

    # ---- poles ----

    def poles(self):
        d = _trim(self.den)
        if d.size <= 1:
            return np.zeros(0, dtype=np.complex128)
        if d.size - 1 > MAX_CERTIFIED_DEGREE:
            raise PoleOnDomain(f"Denominator degree {d.size - 1} exceeds certification limit")
        return P.polyroots(d)

    def certify_pole_free(self, domain):
        """Raise PoleOnDomain when a pole lies in the closure of the domain."""
        if not self.is_closed_form:
            return
        for pole in self.poles():
            if domain.in_closure(pole):
                raise PoleOnDomain(f"{self.label} has a pole at {complex(pole):.6g} in closed Stolz_{domain.omega}")

    def apply_direct(self, T):
        """Direct rational evaluation num(T) den(T)^{-1}."""
        if not self.is_closed_form:
            raise NotImplementedError(f"{self.label} has no closed form")
        a = T.entries
        top = _matrix_poly(np.asarray(self.num), a)
        if len(self.den) == 1:
            return top / self.den[0]
        bottom = _matrix_poly(np.asarray(self.den), a)
        return scipy.linalg.solve(bottom, top)

    def to_dict(self):
        out = {'kind': self.kind.value, 'label': self.label}
        if self.is_closed_form:
            out['num'] = [complex(c) for c in self.num]
            out['den'] = [complex(c) for c in self.den]
        return out


@dataclass(frozen=True)
class AdmissibilityCert:
    theta: float
    integrable: bool
    l1_value: float
    flag: Optional[str] = None
    shell_ratio: float = 0.0
    rel_change: float = 0.0


def boundary_grid(omega, density):
    C = c_theta(omega)
    z, _ = gamma_point(omega, np.linspace(-C, C, density))
    return z


def sup_norm(f, domain, grid_density=SUP_GRID_DENSITY):
    """Boundary-grid lower estimate of sup |f| over Stolz_omega."""
    f.certify_pole_free(domain)
    density = max(int(grid_density), 8)
    value = float(np.max(np.abs(f(boundary_grid(domain.omega, density)))))
    for _ in range(SUP_MAX_DOUBLINGS):
        density *= 2
        finer = float(np.max(np.abs(f(boundary_grid(domain.omega, density)))))
        settled = abs(finer - value) <= SUP_RICHARDSON_TOL * max(finer, 1e-300)
        value = max(value, finer)
        if settled:
            return value
    logger.warning(f"sup_norm of {f.label} on Stolz_{domain.omega} still moving at {density} points")
    return value


def l1_profile(f, contour):
    """Quadrature of |f(z)/(1-z)| |dz| and its per-shell contributions."""
    with np.errstate(divide='ignore', invalid='ignore'):
        integrand = np.abs(f(contour.z) / (1.0 - contour.z)) * np.abs(contour.dz) * contour.w
    shells = contour.shell_index()
    per_shell = np.bincount(shells, weights=np.where(np.isfinite(integrand), integrand, 0.0))
    return float(np.sum(integrand)), per_shell


def admissible(f, contour):
    """Check f(z)/(1-z) in L^1 of the contour by refinement and shell decay."""
    values = []
    c = contour
    per_shell = None
    for step in range(ADMISSIBILITY_REFINEMENTS):
        total, per_shell = l1_profile(f, c)
        values.append(total)
        if not math.isfinite(total):
            return AdmissibilityCert(contour.theta, False, math.inf, flag='nonfinite')
        if step + 1 < ADMISSIBILITY_REFINEMENTS:
            c = c.refine()
    inner = c.levels - 1
    shell_ratio = float(per_shell[inner] / per_shell[inner - 1]) if per_shell[inner - 1] > 0 else 0.0
    rel_change = abs(values[-1] - values[-2]) / max(values[-2], 1e-300)
    if values[-1] > ADMISSIBILITY_GROWTH * values[0]:
        return AdmissibilityCert(contour.theta, False, values[-1], 'diverging', shell_ratio, rel_change)
    if shell_ratio >= ADMISSIBILITY_SHELL_RATIO:
        return AdmissibilityCert(contour.theta, False, values[-1], 'log_divergent', shell_ratio, rel_change)
    if rel_change >= ADMISSIBILITY_REL_CHANGE:
        return AdmissibilityCert(contour.theta, False, values[-1], 'unstable', shell_ratio, rel_change)
    return AdmissibilityCert(contour.theta, True, values[-1], None, shell_ratio, rel_change)
