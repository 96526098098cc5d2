"""
Exception hierarchy for the Ritt operator lab.

ConfigError and its subclasses map to CLI exit code 1, NumericalError and its
subclasses to exit code 2.
"""


class RittLabError(Exception):
    """Base class for all lab errors"""


# ==================== CONFIGURATION ====================

class ConfigError(RittLabError):
    """Invalid arguments, config files or operator files"""


class InvalidOperator(ConfigError):
    """Operator entries or norm exponent violate the operator invariants"""


class BadParameters(ConfigError):
    """Zoo parameters outside their documented ranges"""


class OutOfRange(ConfigError):
    """Argument outside the domain of a geometric or special function"""


class EmptyFamily(ConfigError):
    """An operator family with no members"""


class DimensionCap(ConfigError):
    """Matrix dimension exceeds the dense spectral cap"""


# ==================== NUMERICAL ====================

class NumericalError(RittLabError):
    """A computation failed to meet its numerical contract"""


class SingularResolvent(NumericalError):
    """lambda*I - T is numerically singular"""


class NonConvergence(NumericalError):
    """An iteration or refinement loop exhausted its budget"""


NoConvergence = NonConvergence


class NotAdmissible(NumericalError):
    """f(z)/(1-z) is not integrable along the contour"""


class SpectrumOutsideContour(NumericalError):
    """Some eigenvalue is not enclosed by the contour"""


class NotRegularizable(NumericalError):
    """I - T or I + T is numerically singular"""


class IllConditioned(NumericalError):
    """Eigenvector basis too ill-conditioned for the requested oracle"""


class PoleOnDomain(NumericalError):
    """A rational function has a pole in the closed Stolz domain"""


class NoDecay(NumericalError):
    """Square-function entries do not decay"""


class NonSemisimple(NumericalError):
    """Eigenvalue 1 carries a nontrivial Jordan block"""


class TailBoundFailure(NumericalError):
    """Series truncation budget too small for the requested tail bound"""


class ClosedFormMismatch(NumericalError):
    """Two closed forms of the same pairing disagree"""


class IllConditionedWarning(UserWarning):
    """Eigenvector matrix condition number above the warning threshold"""
