"""
Type-safe enumerations for the Ritt operator lab
"""
from enum import Enum


class Classification(str, Enum):
    """Verdict of the Ritt diagnostics"""
    RITT_LIKELY = "RittLikely"
    POWER_BOUNDED_NOT_RITT = "PowerBoundedNotRitt"
    NOT_POWER_BOUNDED = "NotPowerBounded"
    INCONCLUSIVE = "Inconclusive"


class Trend(str, Enum):
    """Behaviour of a sampled sequence as its horizon grows"""
    BOUNDED = "bounded"
    GROWING = "growing"


class SignKind(str, Enum):
    """Random coefficients used in randomized sums"""
    RADEMACHER = "rademacher"
    GAUSSIAN = "gaussian"


class GammaMethod(str, Enum):
    """How a gamma-norm is obtained"""
    HILBERT_EXACT = "hilbert_exact"
    GAUSSIAN_MC = "gaussian_mc"
    RADEMACHER_MC = "rademacher_mc"


class CalcMethod(str, Enum):
    """Evaluation path of the functional calculus"""
    CONTOUR = "contour"
    REGULARIZED = "regularized"
    EIGEN_ORACLE = "eigen_oracle"


class BasisKind(str, Enum):
    """Bases paired against the F_m vector function"""
    CANONICAL = "canonical"
    RIESZ = "riesz"
    WINDOWS = "windows"


class HoloKind(str, Enum):
    """Representations of scalar holomorphic functions"""
    POLYNOMIAL = "polynomial"
    RATIONAL = "rational"
    MONOMIAL_POWER = "monomial_power"
    CAYLEY = "cayley"
    OPAQUE = "opaque"


class Verdict(str, Enum):
    """Outcome of an identity check"""
    VERIFIED = "verified"
    DEVIATES = "deviates"


class LemmaConvention(str, Enum):
    """Binomial indexing of the geometric-series lemma"""
    SHIFTED = "shifted"
    PRINTED = "printed"


class ZooKind(str, Enum):
    """Named operator families"""
    DIAG_IN_STOLZ = "diag_in_stolz"
    JORDAN = "jordan"
    ROTATION = "rotation"
    TANGENTIAL_AVERAGE = "tangential_average"
    CONJUGATED = "conjugated"


class Subcommand(str, Enum):
    """CLI subcommands"""
    DIAGNOSE = "diagnose"
    CALC = "calc"
    SQF = "sqf"
    BASIS_SWEEP = "basis-sweep"
    VERIFY_IDENTITIES = "verify-identities"
    EQUIVALENCE = "equivalence"


class IdentitySuite(str, Enum):
    """Groups of series identities audited by verify-identities"""
    LEMMA = "lemma"
    RISING = "rising"
    PAIRING = "pairing"
    REPRESENTATION = "representation"
    STEP2 = "step2"
    MULTIPLIERS = "multipliers"
    CONTOUR = "contour"
    ALL = "all"
