"""
Named operator families
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from config import DEFAULT_SEED, STOLZ_PATCH_RHO_MAX, STOLZ_PATCH_RHO_MIN
from enums import ZooKind
from errors import BadParameters, OutOfRange
from numkernel import Operator, eigenvalues
from stolz import StolzDomain
from utils import keyed_rng

logger = logging.getLogger(__name__)

PARAMETERS = {
    ZooKind.DIAG_IN_STOLZ: ('omega', 'n', 'seed'),
    ZooKind.JORDAN: ('lam', 'n', 'delta'),
    ZooKind.ROTATION: ('phi',),
    ZooKind.TANGENTIAL_AVERAGE: ('n',),
    ZooKind.CONJUGATED: ('base', 'cond_target', 'seed'),
}


@dataclass(frozen=True)
class ZooSpec:
    kind: ZooKind
    omega: float = 2.0
    n: int = 8
    seed: int = DEFAULT_SEED
    lam: complex = 0.5
    delta: float = 0.2
    phi: float = math.pi / 2
    base: Optional['ZooSpec'] = None
    cond_target: float = 10.0
    space_p: float = 2.0

    def with_p(self, p):
        base = self.base.with_p(p) if self.base is not None else None
        return replace(self, space_p=float(p), base=base)

    def to_dict(self):
        out = {'kind': self.kind.value, 'p': self.space_p}
        for name in PARAMETERS[self.kind]:
            value = getattr(self, name)
            if name == 'base':
                value = value.to_dict()
            elif name == 'lam':
                value = {'re': complex(value).real, 'im': complex(value).imag}
            out[name] = value
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        try:
            kind = ZooKind(data.pop('kind'))
        except (KeyError, ValueError) as exc:
            raise BadParameters(f"Unknown or missing operator kind: {exc}") from exc
        p = float(data.pop('p', 2.0))
        unknown = set(data) - set(PARAMETERS[kind])
        if unknown:
            raise BadParameters(f"Unknown keys for {kind.value}: {sorted(unknown)}")
        if 'base' in data:
            data['base'] = cls.from_dict(data['base'])
        if isinstance(data.get('lam'), dict):
            data['lam'] = complex(data['lam'].get('re', 0.0), data['lam'].get('im', 0.0))
        return cls(kind, space_p=p, **data)


def operator_id(spec):
    params = ','.join(
        f"{name}={operator_id(spec.base) if name == 'base' else _fmt(getattr(spec, name))}"
        for name in PARAMETERS[spec.kind]
    )
    return f"{spec.kind.value}({params})@p={spec.space_p:g}"


def _fmt(value):
    if isinstance(value, complex):
        return f"{value.real:g}{value.imag:+g}i"
    if isinstance(value, float):
        return f"{value:g}"
    return str(value)


# ==================== GENERATORS ====================

def stolz_patch(domain, count, rng, rho_min=STOLZ_PATCH_RHO_MIN, rho_max=STOLZ_PATCH_RHO_MAX):
    """Draws of z = 1 - rho e^{i phi}, rho and |phi| < arccos(1/omega) uniform, kept when inside."""
    limit = domain.half_angle
    out = []
    while len(out) < count:
        rho = rng.uniform(rho_min, rho_max)
        phi = rng.uniform(-limit, limit)
        z = 1.0 - rho * np.exp(1j * phi)
        if domain.contains(z):
            out.append(complex(z))
    return np.array(out)


def _diag_in_stolz(spec):
    domain = StolzDomain(spec.omega)
    eig = stolz_patch(domain, spec.n, keyed_rng(spec.seed, 'zoo-diag', spec.n))
    return np.diag(eig)


def _jordan(spec):
    if not abs(complex(spec.lam)) < 1.0:
        raise BadParameters(f"Jordan eigenvalue must lie in the open disc, got {spec.lam}")
    return complex(spec.lam) * np.eye(spec.n) + spec.delta * np.eye(spec.n, k=1)


def _rotation(spec):
    c, s = math.cos(spec.phi), math.sin(spec.phi)
    return np.array([[c, -s], [s, c]])


def _tangential_average(spec):
    shift = np.roll(np.eye(spec.n), 1, axis=0)
    return 0.5 * (np.eye(spec.n) + shift)


def _random_unitary(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


def _conjugated(spec):
    if spec.base is None:
        raise BadParameters("conjugated needs a base spec")
    if not spec.cond_target >= 1.0:
        raise BadParameters(f"cond_target must be at least 1, got {spec.cond_target}")
    base = generate(spec.base.with_p(spec.space_p)).entries
    n = base.shape[0]
    rng = keyed_rng(spec.seed, 'zoo-conjugate', n)
    sigma = np.geomspace(1.0, spec.cond_target, n)
    V = _random_unitary(rng, n) @ np.diag(sigma) @ _random_unitary(rng, n).conj().T
    return np.linalg.solve(V.T, (V @ base).T).T


GENERATORS = {
    ZooKind.DIAG_IN_STOLZ: _diag_in_stolz,
    ZooKind.JORDAN: _jordan,
    ZooKind.ROTATION: _rotation,
    ZooKind.TANGENTIAL_AVERAGE: _tangential_average,
    ZooKind.CONJUGATED: _conjugated,
}


def generate(spec):
    if spec.kind != ZooKind.ROTATION and spec.kind != ZooKind.CONJUGATED and spec.n < 1:
        raise BadParameters(f"n must be positive, got {spec.n}")
    try:
        entries = GENERATORS[spec.kind](spec)
    except OutOfRange as exc:
        raise BadParameters(str(exc)) from exc
    T = Operator(entries, spec.space_p)
    if spec.kind == ZooKind.DIAG_IN_STOLZ:
        domain = StolzDomain(spec.omega)
        if not all(domain.contains(lam) for lam in eigenvalues(T).eigenvalues):
            raise BadParameters(f"Generated spectrum leaves Stolz_{spec.omega}")
    logger.debug(f"Generated {operator_id(spec)}")
    return T


def tangential_stolz_type(n):
    """cot(pi / (2n)), the spectral Stolz type of the tangential average on n points."""
    return 1.0 / math.tan(math.pi / (2 * n))
