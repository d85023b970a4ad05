"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes):

* :class:`ContractError` -- malformed input or a violated precondition.
* :class:`RegimeError` -- well-formed input that lies outside the regime in
  which an answer is guaranteed (e.g. a state with no unique decomposition).
"""


class SepfactError(Exception):
    """Base class for all package errors."""


class ContractError(SepfactError, ValueError):
    """Input violates a documented precondition."""


class DimensionError(ContractError):
    """Shapes or tensor-factor dimensions do not agree."""


class SchemaError(ContractError):
    """A JSON document does not match the expected format."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class InvalidState(ContractError):
    """A matrix fails one of the density-matrix invariants."""

    def __init__(self, deviation, message=""):
        self.deviation = float(deviation)
        super().__init__(message or f"{type(self).__name__} (deviation {self.deviation:.3g})")


class NotHermitian(InvalidState):
    pass


class TraceNotOne(InvalidState):
    pass


class NotPositive(InvalidState):
    pass


class RegimeError(SepfactError):
    """The input is valid but outside the guaranteed regime."""


class DegeneratePencil(RegimeError):
    """Generalized eigenvalues collide within tolerance."""


class NotInRegime(RegimeError):
    """A state has no certified unique pure-product decomposition."""


class DependentF(RegimeError):
    """The right-hand factors of an ensemble are linearly dependent."""


class RankTooHigh(RegimeError):
    """Requested decomposition size is below the rank of the state."""


class Unbounded(RegimeError):
    """No decomposition is known, so no upper length bound exists."""
