"""
Exception hierarchy for GaugeForge

Oracles report mathematical outcomes as verdicts; these exceptions are for
malformed input and violated preconditions only.
"""

from typing import Any, Optional


class GaugeForgeError(Exception):
    """Base class for all GaugeForge errors"""


class ExpressionSyntaxError(GaugeForgeError):
    """Raised when a DSL string cannot be parsed"""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownIdentifierError(ExpressionSyntaxError):
    """Raised for identifiers outside the grammar (or behind a disabled flag)"""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier '{name}'", position)
        self.name = name


class NetDomainError(GaugeForgeError):
    """Raised when a net is evaluated outside its domain"""


class NotDifferentiableError(GaugeForgeError):
    """Raised when a node has no symbolic derivative"""


class UnsupportedIndexSetError(GaugeForgeError):
    """Raised for index sets outside the segmented downward-directed class"""


class IndexSetMismatchError(GaugeForgeError):
    """Raised when two objects live on different index sets"""


class MorphismMismatchError(GaugeForgeError):
    """Raised when morphisms cannot be composed (source/target mismatch)"""


class UnverifiedMorphismError(GaugeForgeError):
    """Raised when an operation needs a verified morphism"""


class PreconditionError(GaugeForgeError):
    """Raised when an operation's precondition does not hold"""


class GaugeConditionError(GaugeForgeError):
    """Raised when a gauge construction condition fails (e.g. muSquare)"""


class InclusionFailure(GaugeForgeError):
    """Raised when a moderate-class inclusion fails; carries the witness generator"""

    def __init__(self, message: str, witness: Any = None, verdict: Optional[Any] = None):
        super().__init__(message)
        self.witness = witness
        self.verdict = verdict


class InterleaveDepthError(GaugeForgeError):
    """Raised when no admissible switching point exists at the working precision"""


class QuadratureError(GaugeForgeError):
    """Raised when adaptive quadrature does not converge"""


class UnsupportedDistributionError(GaugeForgeError):
    """Raised for distribution/domain combinations without an embedding"""


class BlowUpError(GaugeForgeError):
    """Raised when a per-eps trajectory leaves every bounded set before t2"""

    def __init__(self, eps: Any, time: Any):
        super().__init__(f"solution blows up at t={time} for eps={eps}")
        self.eps = eps
        self.time = time


class ConfigError(GaugeForgeError):
    """Raised for malformed run configurations"""
