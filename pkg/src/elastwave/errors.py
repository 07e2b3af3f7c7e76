"""Exception hierarchy shared across the package.

Two broad families matter to callers: input/validation problems
(:class:`ValidationError` and subclasses, CLI exit code 2) and numerical
failures discovered mid-computation (:class:`NumericalError` and
subclasses, CLI exit code 3).
"""


class ElastwaveError(Exception):
    """Base class for all package errors."""


class ValidationError(ElastwaveError):
    """Invalid input: bad material data, direction, or configuration."""


class MaterialError(ValidationError):
    """Material constants violate a structural requirement."""


class MaterialFormatError(MaterialError):
    """Material file does not parse against the expected schema."""


class SymmetryViolationError(MaterialError):
    """Provided constants contradict the declared index/crystal symmetry."""


class PositiveDefinitenessError(MaterialError):
    """Second-order constants are not positive definite."""


class DirectionError(ValidationError):
    """Propagation direction is degenerate (zero) or malformed."""


class NotAcousticAxisError(ValidationError):
    """An operation restricted to acoustic axes was called off-axis."""


class NotDecoupledError(ValidationError):
    """Decoupling transform requested for a pair whose coupling invariant
    does not vanish."""


class NumericalError(ElastwaveError):
    """A computation failed for numerical reasons."""


class IllConditionedError(NumericalError):
    """A linear solve was refused because of excessive condition number."""


class DegenerateModeError(NumericalError):
    """Single-mode corrector requested for a mode inside a degenerate pair
    whose coupling makes the corrector equation unsolvable."""


class CFLError(NumericalError):
    """Requested time step violates the stability bound."""


class BlowupError(NumericalError):
    """Solution left the finite range; carries the last finite state."""

    def __init__(self, message, last_field=None):
        super().__init__(message)
        self.last_field = last_field
