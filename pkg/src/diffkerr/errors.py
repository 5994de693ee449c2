"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class DiffKerrError(Exception):
    exit_code = 1


class ConfigError(DiffKerrError, ValueError):
    exit_code = 2


class InvariantError(DiffKerrError):
    """A checked physical or numerical invariant did not hold."""

    exit_code = 3


class ImaginaryResidueError(InvariantError):
    pass


class NegativityError(InvariantError):
    """Initial distribution is not a valid (non-negative) classical density."""


class GeometryError(DiffKerrError, ValueError):
    exit_code = 3


class TruncationError(DiffKerrError):
    """Fock truncation too small for the requested state or evolution."""

    exit_code = 4


class StabilityError(DiffKerrError):
    exit_code = 4


class TruncationWarning(UserWarning):
    """Result is usable but shows artefacts of a too-small truncation."""
