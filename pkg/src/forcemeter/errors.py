"""Exception hierarchy shared by all engine modules."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class StructureError(EngineError):
    """Mismatched grids, channel bases, or array shapes."""


class ContractError(EngineError):
    """An operation was applied to an object that does not support it
    (e.g. spectral density of a non-self-adjoint form)."""


class SingularityError(EngineError):
    """A pole, zero transfer function, or degenerate optimum was hit."""


class NoCancellationError(EngineError):
    """Back-action compensation is impossible at the requested frequency
    (the quadrature rotation condition has no solution)."""


class UnsupportedSchemeError(EngineError):
    """The requested operation is not defined for this measurement scheme."""


class ConfigError(EngineError):
    """Invalid scenario configuration (CLI layer)."""
