"""Exception hierarchy shared by all chemflood modules."""


class ChemFloodError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ChemFloodError, ValueError):
    """An input lies outside the admissible domain of an operation."""


class ModelShapeError(ChemFloodError):
    """The flux or adsorption model violates a structural assumption."""


class NoPreimageError(DomainError):
    """A Lagrange state has no preimage in original coordinates (DRY)."""


class WrongShockKindError(DomainError):
    """A U-shock routine got a zeta-jump, or vice versa."""


class StructuralError(ChemFloodError):
    """A Riemann problem could not be resolved into an admissible fan."""


class InconsistencyError(ChemFloodError):
    """A check that must succeed by construction did not (signals a sign bug)."""


class ConfigError(ChemFloodError, ValueError):
    """Malformed or out-of-bounds run configuration."""


class SolverError(ChemFloodError):
    """The viscous solver hit an unrecoverable state."""


class MeasurementError(ChemFloodError):
    """A post-processing measurement could not be made on the given field."""
